#include "cew/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "cew/errors.hpp"
#include "cew/oracles.hpp"
#include "cew/regret.hpp"

namespace cew {

namespace {

void check_shapes(const ContextVector& x, int a_played, int K, int d, const BlockCovariance& B,
                  const SimplexPoint& q) {
  if (x.size() != d || B.arms() != K || B.dim() != d || q.arms() != K)
    throw ConfigError("estimator dimension mismatch");
  if (a_played < 0 || a_played >= K)
    throw std::out_of_range(fmt::format("played arm {} out of range", a_played));
}

}  // namespace

ThetaMatrix estimate_theta(const ContextVector& x, int a_played, double loss,
                           const SimplexPoint& q_tilde, const BlockCovariance& sigma_tilde_inv,
                           const ThetaMatrix& m) {
  const int K = m.arms();
  const int d = m.dim();
  check_shapes(x, a_played, K, d, sigma_tilde_inv, q_tilde);
  ThetaMatrix out = m;
  const double residual = loss - m.row(a_played).dot(x);
  out.row(a_played) +=
      (q_tilde[a_played] * residual * (sigma_tilde_inv.blocks[a_played] * x)).transpose();
  return out;
}

ThetaMatrix estimate_theta_mgr(const ContextVector& x, int a_played, double loss,
                               const SimplexPoint& q, const BlockCovariance& sigma_hat_plus) {
  const int K = sigma_hat_plus.arms();
  const int d = sigma_hat_plus.dim();
  check_shapes(x, a_played, K, d, sigma_hat_plus, q);
  ThetaMatrix out(K, d);
  out.row(a_played) = (q[a_played] * loss * (sigma_hat_plus.blocks[a_played] * x)).transpose();
  return out;
}

EstimatorState accumulate(EstimatorState state, const ThetaMatrix& theta_hat) {
  state.cumulative += theta_hat;
  ++state.round;
  return state;
}

ComparatorFn argmin_comparator(const ThetaMatrix& theta_sum) {
  return [theta_sum](const ContextVector& x) {
    Vector p = Vector::Zero(theta_sum.arms());
    p[comparator_policy(theta_sum, x)] = 1.0;
    return p;
  };
}

GhostReport ghost_identity_check(const FrozenRoundState& state,
                                 const ContextDistribution& contexts,
                                 const ComparatorFn& comparator, long n_mc, Rng& rng) {
  if (n_mc < 2) throw ConfigError("ghost check needs n_mc >= 2");
  const int K = state.theta.arms();
  const int d = state.theta.dim();
  PolicySampler sampler(state.sampler);
  const BlockCovariance sigma_inv = invert(state.sigma);

  Rng lhs_rng = rng.split(1);
  Rng rhs_rng = rng.split(2);
  MomentAccumulator lhs(1), rhs(1);
  ContextVector x(d), x0(d);
  CostVector c(K);
  Vector q(K), q0(K), v(1);

  for (long i = 0; i < n_mc; ++i) {
    contexts.draw_into(lhs_rng, x);
    state.costs.costs(x, c);
    sampler.draw(c, lhs_rng, q);
    const Vector diff = q - comparator(x);
    v[0] = diff.dot(state.theta.matrix() * x);
    lhs.add(v);
  }

  for (long i = 0; i < n_mc; ++i) {
    contexts.draw_into(rhs_rng, x);
    state.costs.costs(x, c);
    const TruncatedDraw draw =
        sample_truncated(c, sigma_inv, x, state.gamma, state.max_rejects, sampler, rhs_rng);
    std::discrete_distribution<int> arm(draw.q.values().data(),
                                        draw.q.values().data() + K);
    const int a = arm(rhs_rng);
    const double loss = state.theta.row(a).dot(x);
    const ThetaMatrix theta_hat =
        estimate_theta(x, a, loss, draw.q, state.sigma_tilde_inv, state.optimistic);

    contexts.draw_into(rhs_rng, x0);
    state.costs.costs(x0, c);
    sampler.draw(c, rhs_rng, q0);
    const Vector diff = q0 - comparator(x0);
    v[0] = diff.dot(theta_hat.matrix() * x0);
    rhs.add(v);
  }

  const MonteCarloEstimate l = lhs.finish();
  const MonteCarloEstimate r = rhs.finish();
  GhostReport rep;
  rep.n = n_mc;
  rep.lhs_mean = l.mean[0];
  rep.lhs_se = l.se[0];
  rep.rhs_mean = r.mean[0];
  rep.rhs_se = r.se[0];
  const double z = 1.959963984540054;
  rep.pass = std::abs(rep.lhs_mean - rep.rhs_mean) <= z * (rep.lhs_se + rep.rhs_se);
  return rep;
}

}  // namespace cew
