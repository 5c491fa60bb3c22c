#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "cew/types.hpp"

namespace cew {

struct MgrParams {
  long M = 1;
  long N = 1;
  double c = 0.5;
  double epsilon = 0.1;
  double lambda = 1.0;
  // The uncapped repeat count the schedule asked for.
  long M_schedule = 1;
  bool capped = false;

  void validate() const;
};

// lambda = (L_hat + 1)^{-1/2}, N = ceil((2/lambda) ln(1/(eps lambda))),
// M = ceil(24 ln(d H T)/eps^2 * 4 / (lambda^2 ln^2(1/(eps lambda)))),
// then M is clamped to m_cap (capped flag set when it binds).
MgrParams mgr_params(double L_hat_prev, const ProblemDims& dims, double epsilon, double H,
                     long m_cap = 100000);

using MgrPair = std::pair<ContextVector, Vector>;

// Supplies the next (x, q) pair; called exactly M * N times in order.
using MgrPairSource = std::function<void(ContextVector& x, Vector& q)>;

// Per repeat: Z_n = prod_{j<=n} (I - c Y_j) with Y_j = diag_a(q_a^2 x x^T),
// estimate c I + c sum_n Z_n; averaged over repeats and symmetrised.
BlockCovariance mgr_inverse(const MgrPairSource& next, const MgrParams& params, int K, int d);
BlockCovariance mgr_inverse(const std::vector<MgrPair>& pairs, const MgrParams& params);

// Sigma^{-1} (I - (I - c Sigma)^{N+1}) blockwise.
BlockCovariance mgr_expected_value(const BlockCovariance& sigma, double c, long N);

// (2 / lambda) ln(1 / (eps lambda)).
double mgr_norm_bound(const MgrParams& params);

struct MgrDrawCheck {
  double norm = 0.0;            // ||S||
  double error_norm = 0.0;      // ||S - Sigma^{-1}||
  double product_norm = 0.0;    // ||S Sigma||
  bool bounded = false;         // norm <= (2/lambda) ln(1/(eps lambda))
  bool accurate = false;        // error_norm <= eps
  bool product_ok = false;      // product_norm <= 1 + 2 eps
};

MgrDrawCheck mgr_check_draw(const BlockCovariance& sigma_hat_plus,
                            const BlockCovariance& sigma, const MgrParams& params);

struct MgrPropertyReport {
  long draws = 0;
  long bound_violations = 0;     // deterministic norm bound
  double mean_error_norm = 0.0;  // ||mean(S) - Sigma^{-1}||
  double mean_error_se = 0.0;    // Frobenius norm of the entrywise SE
  double accuracy_rate = 0.0;    // fraction of draws within eps
  double product_rate = 0.0;     // fraction of draws with ||S Sigma|| <= 1 + 2 eps
  double required_rate = 0.0;    // 1 - 2 / T^3
  bool bound_ok = false;
  bool mean_ok = false;  // mean error <= eps + 4 SE
  bool accuracy_ok = false;
  bool product_ok = false;
};

MgrPropertyReport mgr_property_check(const std::vector<BlockCovariance>& draws,
                                     const BlockCovariance& sigma, const MgrParams& params,
                                     long T);

}  // namespace cew
