#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cew/config.hpp"
#include "cew/covariance.hpp"
#include "cew/estimators.hpp"
#include "cew/mgr.hpp"
#include "cew/sampler.hpp"
#include "cew/zcalc.hpp"

// Statistical self-checks shared by the CLI and the acceptance suite.

namespace cew {

struct SamplerTestOptions {
  std::vector<int> arms{2, 3, 4};
  int vectors_per_arm = 10;
  long draws = 50000;
  long hit_and_run_draws = 5000;  // per K, against `draws` exact draws
  int bins = 20;
  double cost_scale = 4.0;  // costs uniform in [-scale, scale]
  double alpha = 0.01;
  std::uint64_t seed = 3;
  SamplerMethod method = SamplerMethod::exact;
};

struct SamplerCase {
  int K = 0;
  CostVector costs;
  int coordinate = 0;
  double chi_square_p = 0.0;
  int bins_used = 0;
};

struct SamplerCrossCase {
  int K = 0;
  CostVector costs;
  int coordinate = 0;
  double ks_p = 0.0;
};

struct SamplerTestReport {
  std::vector<SamplerCase> marginals;
  std::vector<SamplerCrossCase> cross;
  double min_marginal_p = 1.0;
  double min_cross_p = 1.0;
  bool pass = false;
};

// Marginal chi-square of `method` against quadrature bin probabilities,
// coordinates taken round-robin over the cost vectors; then one exact vs
// hit-and-run two-sample KS per K.
SamplerTestReport sampler_self_test(const SamplerTestOptions& opt);

struct MgrTestOptions {
  int d = 2;
  int K = 2;
  long N = 20;
  long M = 1;
  double c = 0.5;
  long draws = 10000;
  long T = 1000;  // only sets the required accuracy rate
  double epsilon = 0.1;
  std::uint64_t seed = 1;
};

struct MgrTestReport {
  MgrParams params;
  BlockCovariance sigma;
  BlockCovariance expected;  // Sigma^{-1} (I - (I - c Sigma)^{N+1})
  Matrix mean_first_block;
  double max_abs_z = 0.0;    // max |mean - expected| / SE over entries
  long bound_violations = 0;
  MgrPropertyReport property;
  bool expectation_ok = false;
};

// Uniform-ball contexts with a flat policy (K = 2 gives Sigma_a = I / 12
// for d = 2). Draws are independent mgr_inverse outputs.
MgrTestReport mgr_self_test(const MgrTestOptions& opt);

// Covariance of the flat policy on the unit-ball instance used above:
// E[q_a^2] / (d + 2) * I.
BlockCovariance flat_policy_ball_covariance(int K, int d);

struct ZEvalReport {
  ZResult pf;
  double quadrature = 0.0;
  double rel_diff = 0.0;
  double shift = 0.0;  // Z(c) = exp(-shift) Z(reduced)
  double Z = 0.0;      // for the costs as given
};
ZEvalReport z_eval(const CostVector& c, double quad_tol = 1e-12);

struct DiagnoseOptions {
  long round = 0;   // 0: T / 2
  long S = 100000;  // covariance samples for the frozen state
  long n = 100000;  // ghost-identity Monte Carlo size
  double sandwich_lo = 0.70;
  double sandwich_hi = 1.40;
};

struct DiagnoseReport {
  long round = 0;
  GhostReport ghost;
  SandwichMargins sandwich;
  bool sandwich_ok = false;
  bool pass = false;
};

// Runs replication 0 of cfg to the given round, freezes the state, then
// runs the ghost-identity and sandwich checks.
DiagnoseReport diagnose(const RunConfig& cfg, const DiagnoseOptions& opt);

}  // namespace cew
