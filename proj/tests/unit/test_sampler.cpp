#include <doctest.h>

#include <cmath>
#include <limits>

#include "cew/covariance.hpp"
#include "cew/errors.hpp"
#include "cew/oracles.hpp"
#include "cew/sampler.hpp"

using namespace cew;

namespace {

CostVector costs(std::initializer_list<double> v) {
  CostVector c(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) c[i++] = x;
  return c;
}

SamplerConfig with(SamplerMethod m) {
  SamplerConfig cfg;
  cfg.method = m;
  return cfg;
}

// Mean of q_0 when K = 2: density on [0, 1] proportional to exp(-r u).
double two_arm_mean(double r) { return 1.0 / r - 1.0 / std::expm1(r); }

}  // namespace

TEST_CASE("method names round-trip") {
  for (auto m : {SamplerMethod::exact, SamplerMethod::rejection, SamplerMethod::hit_and_run})
    CHECK(parse_sampler_method(to_string(m)) == m);
  CHECK_THROWS_AS(parse_sampler_method("gibbs"), ConfigError);
}

TEST_CASE("sampler config validation") {
  SamplerConfig cfg;
  CHECK_NOTHROW(cfg.validate(3));
  cfg.clip_floor = 0.5;
  CHECK_THROWS_AS(cfg.validate(3), ConfigError);
  cfg = SamplerConfig{};
  cfg.hr_burnin = cfg.hr_steps;
  CHECK_THROWS_AS(cfg.validate(3), ConfigError);
  cfg = SamplerConfig{};
  cfg.rejection_proposals = 0;
  CHECK_THROWS_AS(cfg.validate(3), ConfigError);
}

TEST_CASE("truncated exponential draws") {
  CHECK(truncated_exponential(2.0, 1.0, 0.0) == 0.0);
  CHECK(truncated_exponential(2.0, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(truncated_exponential(2.0, 0.0, 0.3) == 0.0);
  // F(s) = (1 - e^{-rs}) / (1 - e^{-rL}) solved at u = 1/2.
  const double median = -std::log(1.0 - 0.5 * (1.0 - std::exp(-2.0))) / 2.0;
  CHECK(truncated_exponential(2.0, 1.0, 0.5) == doctest::Approx(median).epsilon(1e-14));
  CHECK(truncated_exponential(0.0, 0.8, 0.25) == doctest::Approx(0.2));
  // In law: the mean over a fine midpoint grid of u matches the truncated
  // exponential mean 1/r - L/(e^{rL} - 1), for both signs of the rate.
  for (double r : {3.0, -3.0}) {
    const int n = 100000;
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += truncated_exponential(r, 0.7, (i + 0.5) / n) / n;
    CHECK(mean == doctest::Approx(1.0 / r - 0.7 / std::expm1(r * 0.7)).epsilon(1e-8));
  }
}

TEST_CASE("every method returns simplex points") {
  Rng rng(21);
  for (auto m : {SamplerMethod::exact, SamplerMethod::rejection, SamplerMethod::hit_and_run}) {
    SamplerConfig cfg = with(m);
    cfg.hr_steps = 200;
    cfg.hr_burnin = 50;
    PolicySampler s(cfg);
    Vector q;
    for (int i = 0; i < 300; ++i) {
      const int K = 2 + i % 5;
      CostVector c(K);
      for (int a = 0; a < K; ++a) c[a] = 20.0 * (rng.uniform() - 0.5);
      s.draw(c, rng, q);
      REQUIRE(q.size() == K);
      REQUIRE(q.minCoeff() >= 0.0);
      REQUIRE(std::abs(q.sum() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("two-arm marginal mean matches the closed form") {
  const CostVector c = costs({1.5, -0.5});
  const double expect = two_arm_mean(2.0);
  for (auto m : {SamplerMethod::exact, SamplerMethod::rejection, SamplerMethod::hit_and_run}) {
    SamplerConfig cfg = with(m);
    cfg.hr_steps = 60;
    cfg.hr_burnin = 20;
    PolicySampler s(cfg);
    Rng rng(22);
    Vector q;
    const long n = m == SamplerMethod::hit_and_run ? 5000 : 40000;
    const MonteCarloEstimate e = mc_moment(
        [&](Rng& r) {
          s.draw(c, r, q);
          return Vector(q.head(1));
        },
        n, rng);
    INFO(to_string(m));
    CHECK(std::abs(e.mean[0] - expect) < 4.0 * e.se[0]);
  }
}

TEST_CASE("three-arm cell probability matches quadrature") {
  const CostVector c = costs({1.0, -1.0, 0.5});
  const double total = simplex_quadrature(c, 1.0, 1e-12);
  const double p = simplex_cell_quadrature(c, 0.0, 0.3, 0.2, 0.6, 1e-12) / total;
  for (auto m : {SamplerMethod::exact, SamplerMethod::rejection}) {
    PolicySampler s(with(m));
    Rng rng(23);
    Vector q;
    const long n = 40000;
    long hits = 0;
    for (long i = 0; i < n; ++i) {
      s.draw(c, rng, q);
      if (q[0] <= 0.3 && q[1] >= 0.2 && q[1] <= 0.6) ++hits;
    }
    const double se = std::sqrt(p * (1.0 - p) / n);
    INFO(to_string(m));
    CHECK(std::abs(static_cast<double>(hits) / n - p) < 4.0 * se);
  }
}

TEST_CASE("large cost spread concentrates on the cheap vertex") {
  Rng rng(24);
  const CostVector c = costs({200.0, 0.0, 150.0});
  for (auto m : {SamplerMethod::exact, SamplerMethod::rejection}) {
    const SimplexPoint q = m == SamplerMethod::exact ? sample_exact(c, rng) : sample_rejection(c, rng);
    CHECK(q[1] > 0.9);
  }
}

TEST_CASE("clip floor keeps every coordinate above the floor") {
  SamplerConfig cfg = with(SamplerMethod::rejection);
  cfg.clip_floor = 0.05;
  PolicySampler s(cfg);
  Rng rng(25);
  Vector q;
  for (int i = 0; i < 1000; ++i) {
    s.draw(costs({30.0, 0.0, 30.0}), rng, q);
    REQUIRE(q.minCoeff() >= 0.05 - 1e-15);
    REQUIRE(std::abs(q.sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("truncated draws respect the threshold or flag forced acceptance") {
  BlockCovariance inv(2, 2, CovarianceKind::inverse);
  inv.blocks[0] = Matrix::Identity(2, 2) * 3.0;
  inv.blocks[1] = Matrix::Identity(2, 2);
  Vector x(2);
  x << 0.6, 0.8;
  Vector q(2);
  q << 0.5, 0.5;
  CHECK(truncation_statistic(q, x, inv) == doctest::Approx(0.25 * 3.0 + 0.25 * 1.0));

  PolicySampler s;
  Rng rng(26);
  const CostVector c = costs({0.0, 0.0});
  // Threshold dK gamma^2 = 4 gamma^2; the statistic is at most 3 here.
  const TruncatedDraw easy = sample_truncated(c, inv, x, 1.0, 10, s, rng);
  CHECK(easy.rejections == 0);
  CHECK_FALSE(easy.forced_accept);
  CHECK(easy.statistic <= 4.0);
  // Statistic >= 3/4 everywhere on the simplex, so gamma = 0.1 rejects all.
  const TruncatedDraw hard = sample_truncated(c, inv, x, 0.1, 7, s, rng);
  CHECK(hard.forced_accept);
  CHECK(hard.rejections == 7);
  const TruncatedDraw open = sample_truncated(
      c, inv, x, std::numeric_limits<double>::infinity(), 1, s, rng);
  CHECK_FALSE(open.forced_accept);
  CHECK_THROWS_AS(sample_truncated(c, inv, x, 0.0, 1, s, rng), ConfigError);
}

TEST_CASE("density is exp of minus the inner product") {
  const SimplexPoint q(costs({0.2, 0.3, 0.5}));
  CHECK(density_unnormalized(q, costs({1.0, 2.0, -1.0})) ==
        doctest::Approx(std::exp(-(0.2 + 0.6 - 0.5))));
}
