#pragma once

#include "cew/environment.hpp"
#include "cew/rng.hpp"
#include "cew/sampler.hpp"
#include "cew/types.hpp"

namespace cew {

// Costs c(x) = eta * Theta x, one entry per arm.
struct CostModel {
  Matrix cumulative;  // K x d
  double eta = 0.0;

  void costs(const ContextVector& x, CostVector& out) const {
    out.noalias() = cumulative * x;
    out *= eta;
  }
  CostVector costs(const ContextVector& x) const {
    CostVector c;
    costs(x, c);
    return c;
  }
};

// Block a = (1/S) sum_i Q_a^(i)^2 X^(i) X^(i)^T over S fresh pairs. With
// truncated = true each Q^(i) is redrawn until it passes the truncation
// event for its own X^(i); that event needs the untruncated covariance,
// which is estimated first from a separate S-sample batch unless supplied.
BlockCovariance estimate_sigma(const ContextDistribution& contexts, const CostModel& costs,
                               PolicySampler& sampler, long S, bool truncated, double gamma,
                               Rng& rng, const BlockCovariance* untruncated = nullptr,
                               int max_rejects = 100);

struct SigmaPair {
  BlockCovariance sigma;        // untruncated
  BlockCovariance sigma_tilde;  // truncated
  long rejections = 0;
  long forced = 0;
};

// Both covariances from one batch of contexts: each X^(i) contributes its
// first policy draw to the untruncated estimate and its first accepted draw
// to the truncated one. Marginally each estimate is an S-sample average of
// the right law.
SigmaPair estimate_sigma_pair(const ContextDistribution& contexts, const CostModel& costs,
                              PolicySampler& sampler, long S, double gamma, int max_rejects,
                              Rng& rng);

inline constexpr double kJitterCondition = 1e10;

// Inverse of (B + jitter I); jitter = 1e-10 tr(B)/d once cond(B) > 1e10.
// Throws NumericalError if B has an eigenvalue below -1e-12 * ||B||.
Matrix invert_block(const Matrix& B);
BlockCovariance invert(const BlockCovariance& sigma);

double mahalanobis_stat(const SimplexPoint& q, const ContextVector& x,
                        const BlockCovariance& sigma);

struct SandwichMargins {
  double lower = 0.0;
  double upper = 0.0;
};

// Extreme generalised eigenvalues of (sigma_tilde, sigma) over all blocks.
SandwichMargins sandwich_check(const BlockCovariance& sigma,
                               const BlockCovariance& sigma_tilde);

// Smallest eigenvalue over all blocks.
double min_eigenvalue(const BlockCovariance& sigma);

}  // namespace cew
