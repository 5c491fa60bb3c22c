#include <doctest.h>

#include <cmath>

#include "cew/environment.hpp"
#include "cew/errors.hpp"
#include "cew/mgr.hpp"
#include "cew/oracles.hpp"

using namespace cew;

namespace {

MgrParams fixed_params(long M, long N) {
  MgrParams p;
  p.M = M;
  p.N = N;
  p.M_schedule = M;
  return p;
}

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("schedule values") {
  const ProblemDims dims(2, 3, 100, 1.0, 1.0);
  const MgrParams p0 = mgr_params(0.0, dims, 0.1, 100.0);
  CHECK(p0.lambda == 1.0);
  CHECK(p0.N == 5);  // ceil(2 ln 10)
  CHECK(p0.M == 17932);
  CHECK_FALSE(p0.capped);

  const MgrParams p8 = mgr_params(8.0, dims, 0.1, 100.0);
  CHECK(p8.lambda == doctest::Approx(1.0 / 3.0));
  CHECK(p8.N == 21);  // ceil(6 ln 30)
  CHECK(p8.M_schedule == 73968);

  const MgrParams capped = mgr_params(8.0, dims, 0.1, 100.0, 500);
  CHECK(capped.M == 500);
  CHECK(capped.M_schedule == 73968);
  CHECK(capped.capped);
  CHECK(mgr_norm_bound(p8) == doctest::Approx(6.0 * std::log(30.0)));
}

TEST_CASE("schedule rejects bad inputs") {
  const ProblemDims dims(2, 3, 100, 1.0, 1.0);
  CHECK_THROWS_AS(mgr_params(0.0, dims, 1.0, 100.0), ConfigError);
  CHECK_THROWS_AS(mgr_params(0.0, dims, 0.1, 0.5), ConfigError);
  CHECK_THROWS_AS(mgr_params(-1.0, dims, 0.1, 100.0), ConfigError);
  CHECK_THROWS_AS(mgr_params(0.0, dims, 0.1, 100.0, 0), ConfigError);
  MgrParams p = fixed_params(1, 1);
  p.c = 0.3;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("deterministic pairs give the truncated Neumann series") {
  // One-dimensional blocks: arm 0 sees Y = 1, arm 1 sees Y = 0.
  // Arm 0: c (1 + sum_{n<=N} (1 - c)^n) = 1 - 2^{-(N+1)}; arm 1: c (N + 1).
  const long N = 6;
  std::vector<MgrPair> pairs;
  for (long i = 0; i < 2 * N; ++i) pairs.push_back({Vector::Ones(1), v2(1.0, 0.0)});
  const BlockCovariance s = mgr_inverse(pairs, fixed_params(2, N));
  CHECK(s.blocks[0](0, 0) == doctest::Approx(1.0 - std::pow(0.5, N + 1)).epsilon(1e-14));
  CHECK(s.blocks[1](0, 0) == doctest::Approx(0.5 * (N + 1)).epsilon(1e-14));
  CHECK(s.sample_count == 2 * N);

  BlockCovariance sigma(2, 1, CovarianceKind::untruncated);
  sigma.blocks[0] << 1.0;
  sigma.blocks[1] << 1.0;
  const BlockCovariance e = mgr_expected_value(sigma, 0.5, N);
  CHECK(e.blocks[0](0, 0) == doctest::Approx(s.blocks[0](0, 0)));
}

TEST_CASE("shape and contraction errors") {
  std::vector<MgrPair> pairs{{Vector::Ones(1), v2(1.0, 0.0)}};
  CHECK_THROWS_AS(mgr_inverse(pairs, fixed_params(1, 2)), ConfigError);
  CHECK_THROWS_AS(mgr_inverse(std::vector<MgrPair>{}, fixed_params(1, 1)), ConfigError);
  // ||q^2 x x^T|| = 4 > 1 / c.
  std::vector<MgrPair> big{{Vector::Constant(1, 2.0), v2(1.0, 0.0)}};
  CHECK_THROWS_AS(mgr_inverse(big, fixed_params(1, 1)), InvariantError);
}

TEST_CASE("mean of the estimator matches its expected value") {
  // q = (1/2, 1/2) and x uniform on the unit disc: block a = I / 16, so the
  // estimator's expectation is 16 (1 - (1 - 1/32)^{N+1}) I.
  const auto ball = ContextDistribution::uniform_ball(2, 1.0);
  const long N = 20;
  const MgrParams p = fixed_params(1, N);
  Rng rng(41);
  const MonteCarloEstimate est = mc_moment(
      [&](Rng& r) {
        const BlockCovariance s = mgr_inverse(
            [&](ContextVector& x, Vector& q) {
              x = ball.draw(r);
              q = v2(0.5, 0.5);
            },
            p, 2, 2);
        Vector out(3);
        out << s.blocks[0](0, 0), s.blocks[0](0, 1), s.blocks[1](1, 1);
        return out;
      },
      4000, rng);
  const double diag = 16.0 * (1.0 - std::pow(1.0 - 1.0 / 32.0, N + 1));
  CHECK(std::abs(est.mean[0] - diag) < 4.0 * est.se[0]);
  CHECK(std::abs(est.mean[1]) < 4.0 * est.se[1]);
  CHECK(std::abs(est.mean[2] - diag) < 4.0 * est.se[2]);

  BlockCovariance sigma(2, 2, CovarianceKind::untruncated);
  sigma.blocks[0] = Matrix::Identity(2, 2) / 16.0;
  sigma.blocks[1] = sigma.blocks[0];
  CHECK(mgr_expected_value(sigma, 0.5, N).blocks[0](1, 1) == doctest::Approx(diag));
}

TEST_CASE("every draw respects the deterministic norm bound") {
  const auto ball = ContextDistribution::uniform_ball(2, 1.0);
  const ProblemDims dims(2, 2, 50, 1.0, 1.0);
  Rng rng(42);
  for (double L : {0.0, 3.0, 30.0}) {
    const MgrParams p = mgr_params(L, dims, 0.2, 50.0, 3);
    for (int i = 0; i < 20; ++i) {
      const BlockCovariance s = mgr_inverse(
          [&](ContextVector& x, Vector& q) {
            x = ball.draw(rng);
            const double u = rng.uniform();
            q = v2(u, 1.0 - u);
          },
          p, 2, 2);
      REQUIRE(s.op_norm() <= mgr_norm_bound(p));
    }
  }
}

TEST_CASE("draw check against an exact inverse") {
  BlockCovariance sigma(1, 2, CovarianceKind::untruncated);
  sigma.blocks[0] << 0.4, 0.1, 0.1, 0.3;
  BlockCovariance exact(1, 2, CovarianceKind::inverse);
  exact.blocks[0] = sigma.blocks[0].inverse();
  MgrParams p = fixed_params(1, 50);
  p.lambda = 0.5;
  const MgrDrawCheck ok = mgr_check_draw(exact, sigma, p);
  CHECK(ok.error_norm < 1e-12);
  CHECK(ok.product_norm == doctest::Approx(1.0));
  CHECK(ok.accurate);
  CHECK(ok.product_ok);
  BlockCovariance off = exact;
  off.blocks[0] *= 1.5;
  const MgrDrawCheck bad = mgr_check_draw(off, sigma, p);
  CHECK_FALSE(bad.accurate);
  CHECK_FALSE(bad.product_ok);
  CHECK(bad.product_norm == doctest::Approx(1.5));
}
