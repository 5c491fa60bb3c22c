#include <doctest.h>

#include <cmath>
#include <limits>

#include "cew/errors.hpp"
#include "cew/estimators.hpp"
#include "cew/oracles.hpp"

using namespace cew;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

ThetaMatrix two_arms() {
  Matrix th(2, 2);
  th << 0.6, -0.3,
        -0.4, 0.5;
  return ThetaMatrix(th);
}

// Flat policy (eta = 0) on the unit disc with K = 2: block a = E[q_a^2] I / 4
// = I / 12, so the exact inverse is 12 I.
BlockCovariance flat_inverse() {
  BlockCovariance b(2, 2, CovarianceKind::inverse);
  b.blocks[0] = 12.0 * Matrix::Identity(2, 2);
  b.blocks[1] = b.blocks[0];
  return b;
}

BlockCovariance flat_covariance() {
  BlockCovariance b(2, 2, CovarianceKind::untruncated);
  b.blocks[0] = Matrix::Identity(2, 2) / 12.0;
  b.blocks[1] = b.blocks[0];
  return b;
}

FrozenRoundState flat_state() {
  FrozenRoundState s;
  s.costs = CostModel{Matrix::Zero(2, 2), 0.0};
  s.sigma = flat_covariance();
  s.sigma_tilde_inv = flat_inverse();
  s.theta = two_arms();
  s.optimistic = ThetaMatrix(2, 2);
  s.gamma = std::numeric_limits<double>::infinity();
  return s;
}

}  // namespace

TEST_CASE("single-round estimate updates only the played row") {
  const ThetaMatrix m(Matrix::Constant(2, 2, 0.1));
  BlockCovariance inv(2, 2, CovarianceKind::inverse);
  inv.blocks[0] = Matrix::Identity(2, 2);
  inv.blocks[1] << 2.0, 0.0, 0.0, 3.0;
  const Vector x = v2(0.5, 1.0);
  const SimplexPoint q(v2(0.25, 0.75));
  const ThetaMatrix th = estimate_theta(x, 1, 0.4, q, inv, m);
  // residual = 0.4 - 0.15 = 0.25; row 1 += 0.75 * 0.25 * (1, 3).
  CHECK(th.row(0) == m.row(0));
  CHECK(th.row(1)(0) == doctest::Approx(0.1 + 0.1875));
  CHECK(th.row(1)(1) == doctest::Approx(0.1 + 0.5625));

  const ThetaMatrix r = estimate_theta_mgr(x, 0, 0.4, q, inv);
  CHECK(r.row(1).norm() == 0.0);
  CHECK(r.row(0)(0) == doctest::Approx(0.25 * 0.4 * 0.5));

  CHECK_THROWS_AS(estimate_theta(x, 2, 0.4, q, inv, m), std::out_of_range);
  CHECK_THROWS_AS(estimate_theta(Vector::Ones(3), 0, 0.4, q, inv, m), ConfigError);
}

TEST_CASE("accumulation adds and counts rounds") {
  EstimatorState s(2, 2);
  const ThetaMatrix one(Matrix::Ones(2, 2));
  s = accumulate(s, one);
  s = accumulate(s, one);
  CHECK(s.round == 2);
  CHECK(s.cumulative.matrix()(1, 1) == 2.0);
}

TEST_CASE("estimator is unbiased under the exact inverse") {
  const auto ball = ContextDistribution::uniform_ball(2, 1.0);
  const ThetaMatrix theta = two_arms();
  const ThetaMatrix m(Matrix::Constant(2, 2, 0.2));
  const BlockCovariance inv = flat_inverse();
  PolicySampler sampler;
  Rng rng(51);
  const MonteCarloEstimate e = mc_moment(
      [&](Rng& r) {
        const Vector x = ball.draw(r);
        Vector q;
        sampler.draw(Vector::Zero(2), r, q);
        const int a = r.uniform() < q[0] ? 0 : 1;
        const ThetaMatrix th =
            estimate_theta(x, a, theta.row(a).dot(x), SimplexPoint(q), inv, m);
        return Vector(th.matrix().reshaped());
      },
      100000, rng);
  const Vector truth = theta.matrix().reshaped();
  for (int i = 0; i < 4; ++i) CHECK(std::abs(e.mean[i] - truth[i]) < 4.0 * e.se[i]);
}

TEST_CASE("argmin comparator is one-hot") {
  const ComparatorFn pi = argmin_comparator(two_arms());
  const Vector p = pi(v2(1.0, 0.0));
  CHECK(p[1] == 1.0);
  CHECK(p[0] == 0.0);
  CHECK(pi(v2(0.0, 1.0))[0] == 1.0);
}

TEST_CASE("ghost identity holds for the exact inverse and fails for a wrong one") {
  const auto ball = ContextDistribution::uniform_ball(2, 1.0);
  const ComparatorFn pi = argmin_comparator(two_arms());
  Rng rng(52);
  const GhostReport good = ghost_identity_check(flat_state(), ball, pi, 40000, rng);
  CHECK(good.pass);
  CHECK(good.lhs_mean > 10.0 * good.lhs_se);

  FrozenRoundState wrong = flat_state();
  wrong.sigma_tilde_inv.blocks[0] *= 2.0;
  wrong.sigma_tilde_inv.blocks[1] *= 2.0;
  Rng rng2(53);
  const GhostReport bad = ghost_identity_check(wrong, ball, pi, 40000, rng2);
  CHECK_FALSE(bad.pass);
  CHECK_THROWS_AS(ghost_identity_check(flat_state(), ball, pi, 1, rng), ConfigError);
}
