#pragma once

#include <functional>

#include "cew/covariance.hpp"
#include "cew/environment.hpp"
#include "cew/rng.hpp"
#include "cew/sampler.hpp"
#include "cew/types.hpp"

namespace cew {

struct EstimatorState {
  ThetaMatrix cumulative;
  ThetaMatrix optimistic;
  long round = 0;

  EstimatorState() = default;
  EstimatorState(int K, int d) : cumulative(K, d), optimistic(K, d) {}
};

// Row a = m_a + [a == played] q_a Sigma~_a^{-1} x (loss - <x, m_a>).
ThetaMatrix estimate_theta(const ContextVector& x, int a_played, double loss,
                           const SimplexPoint& q_tilde, const BlockCovariance& sigma_tilde_inv,
                           const ThetaMatrix& m);

// Row a = [a == played] q_a S_a x loss with S the resampled inverse.
ThetaMatrix estimate_theta_mgr(const ContextVector& x, int a_played, double loss,
                               const SimplexPoint& q, const BlockCovariance& sigma_hat_plus);

EstimatorState accumulate(EstimatorState state, const ThetaMatrix& theta_hat);

// Everything the estimator needs at one round, held fixed.
struct FrozenRoundState {
  CostModel costs;
  BlockCovariance sigma;            // untruncated, defines the truncation event
  BlockCovariance sigma_tilde_inv;  // inverse truncated covariance used by the estimator
  ThetaMatrix theta;                // true parameters of the round
  ThetaMatrix optimistic;           // m
  double gamma = 0.0;
  int max_rejects = 100;
  SamplerConfig sampler;
};

// Comparator as a distribution over arms given x.
using ComparatorFn = std::function<Vector(const ContextVector&)>;

// Deterministic argmin comparator for a parameter sum.
ComparatorFn argmin_comparator(const ThetaMatrix& theta_sum);

struct GhostReport {
  double lhs_mean = 0.0, lhs_se = 0.0;
  double rhs_mean = 0.0, rhs_se = 0.0;
  long n = 0;
  bool pass = false;  // 95% intervals overlap
};

// Left: E <q(X) - pi*(X), theta X> over fresh contexts and untruncated policy
// draws. Right: E <q(X0) - pi*(X0), theta_hat X0> where theta_hat comes from
// one simulated round (truncated draw, arm, loss) and X0 is an independent
// ghost context with its own policy draw.
GhostReport ghost_identity_check(const FrozenRoundState& state,
                                 const ContextDistribution& contexts,
                                 const ComparatorFn& comparator, long n_mc, Rng& rng);

}  // namespace cew
