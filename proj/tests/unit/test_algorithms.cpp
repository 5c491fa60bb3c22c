#include <doctest.h>

#include <cmath>

#include "cew/errors.hpp"
#include "cew/learner.hpp"
#include "learners.hpp"

using namespace cew;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

struct Setup {
  ProblemDims dims{2, 3, 40, 1.0, 1.0};
  ContextDistribution contexts = ContextDistribution::uniform_box(v2(0.1, 0.1), v2(0.6, 0.6));
  ThetaMatrix theta;

  Setup() {
    Matrix th(3, 2);
    th << 0.6, 0.3,
          0.2, 0.5,
          0.4, 0.4;
    theta = ThetaMatrix(th);
  }

  LearnerConfig config(LearnerMode mode) const {
    LearnerConfig cfg;
    cfg.mode = mode;
    cfg.covariance_samples = 200;
    cfg.mgr_m_cap = 5;
    return cfg;
  }

  // Plays T rounds against the fixed parameters; returns the actions.
  std::vector<int> play(Learner& l, std::uint64_t seed) const {
    std::vector<int> actions;
    for (long t = 1; t <= dims.T; ++t) {
      Rng rng(seed, 0, static_cast<std::uint64_t>(t), Purpose::context);
      const Vector x = contexts.draw(rng);
      const int a = l.act(x);
      actions.push_back(a);
      l.feed(theta.row(a).dot(x));
    }
    return actions;
  }
};

constexpr LearnerMode kModes[] = {LearnerMode::contextew_second, LearnerMode::contextew_first,
                                  LearnerMode::resampling, LearnerMode::linexp3,
                                  LearnerMode::uniform};

}  // namespace

TEST_CASE("mode names round-trip") {
  for (auto m : kModes) CHECK(parse_learner_mode(to_string(m)) == m);
  CHECK_THROWS_AS(parse_learner_mode("exp4"), ConfigError);
}

TEST_CASE("every learner completes the protocol and fills its trace") {
  const Setup s;
  for (auto m : kModes) {
    INFO(to_string(m));
    auto l = make_learner(s.dims, s.config(m), s.contexts, 9, 0);
    const auto actions = s.play(*l, 9);
    REQUIRE(l->trace().size() == static_cast<std::size_t>(s.dims.T));
    for (std::size_t i = 0; i < actions.size(); ++i) {
      const RoundRecord& r = l->trace().rounds[i];
      REQUIRE(r.t == static_cast<long>(i) + 1);
      REQUIRE(r.action == actions[i]);
      REQUIRE(r.action >= 0);
      REQUIRE(r.action < 3);
      REQUIRE(r.loss == doctest::Approx(s.theta.row(r.action).dot(r.context)));
    }
  }
}

TEST_CASE("act and feed must alternate") {
  const Setup s;
  for (auto m : kModes) {
    auto l = make_learner(s.dims, s.config(m), s.contexts, 1, 0);
    CHECK_THROWS_AS(l->feed(0.1), InvariantError);
    l->act(v2(0.3, 0.3));
    CHECK_THROWS_AS(l->act(v2(0.3, 0.3)), InvariantError);
  }
}

TEST_CASE("same seed gives the same actions; another replication does not") {
  const Setup s;
  for (auto m : {LearnerMode::contextew_second, LearnerMode::linexp3}) {
    auto a = make_learner(s.dims, s.config(m), s.contexts, 4, 0);
    auto b = make_learner(s.dims, s.config(m), s.contexts, 4, 0);
    auto c = make_learner(s.dims, s.config(m), s.contexts, 4, 1);
    const auto xa = s.play(*a, 4);
    CHECK(xa == s.play(*b, 4));
    CHECK(xa != s.play(*c, 4));
  }
}

TEST_CASE("continuous-weights learners: monotone step size and truncation ceiling") {
  const Setup s;
  for (auto m : {LearnerMode::contextew_second, LearnerMode::contextew_first}) {
    auto l = make_learner(s.dims, s.config(m), s.contexts, 2, 0);
    s.play(*l, 2);
    const auto& rounds = l->trace().rounds;
    for (std::size_t i = 1; i < rounds.size(); ++i) REQUIRE(rounds[i].eta <= rounds[i - 1].eta);
    for (const auto& r : rounds) {
      REQUIRE(r.diagnostics.at("play_prob") > 0.0);
      REQUIRE(r.diagnostics.at("gamma") == doctest::Approx(default_gamma(s.dims)));
      if (!r.forced_accept)
        REQUIRE(r.diagnostics.at("truncation_stat") <= r.diagnostics.at("truncation_ceiling"));
    }
    auto* cw = dynamic_cast<ContinuousWeightsLearner*>(l.get());
    REQUIRE(cw != nullptr);
    const LearnerSnapshot snap = cw->snapshot();
    CHECK(snap.round == s.dims.T);
    CHECK(snap.eta <= rounds.back().eta);
    CHECK(snap.cumulative.matrix().allFinite());
  }
}

TEST_CASE("resampling learner records its schedule and cap") {
  const Setup s;
  auto l = make_learner(s.dims, s.config(LearnerMode::resampling), s.contexts, 3, 0);
  s.play(*l, 3);
  for (const auto& r : l->trace().rounds) {
    REQUIRE(r.diagnostics.at("mgr_M") == 5.0);
    REQUIRE(r.mgr_capped);
    REQUIRE(r.diagnostics.at("mgr_norm") <= r.diagnostics.at("mgr_norm_bound"));
    REQUIRE(r.diagnostics.at("play_prob") >= 1.0 / s.dims.T);
  }
}

TEST_CASE("linexp3 policy keeps the exploration floor") {
  const Setup s;
  LearnerConfig cfg = s.config(LearnerMode::linexp3);
  cfg.linexp3_exploration = 0.09;
  cfg.linexp3_eta = 5.0;
  detail::LinExp3Learner l(s.dims, cfg, s.contexts, 5, 0);
  s.play(l, 5);
  const Vector p = l.policy(v2(0.4, 0.2));
  CHECK(p.sum() == doctest::Approx(1.0));
  CHECK(p.minCoeff() >= 0.03 - 1e-15);
  CHECK(default_linexp3_eta(s.dims) == doctest::Approx(std::sqrt(std::log(3.0) / (3.0 * 6 * 40))));
  cfg.linexp3_exploration = 1.5;
  CHECK_THROWS_AS(detail::LinExp3Learner(s.dims, cfg, s.contexts, 5, 0), ConfigError);
}

TEST_CASE("uniform learner spreads its plays") {
  const Setup s;
  ProblemDims dims(2, 3, 3000, 1.0, 1.0);
  detail::UniformLearner l(dims, 6, 0);
  std::array<long, 3> counts{};
  for (long t = 0; t < dims.T; ++t) {
    ++counts[l.act(v2(0.2, 0.2))];
    l.feed(0.0);
  }
  for (long c : counts) CHECK(std::abs(c - 1000.0) < 4.0 * std::sqrt(3000.0 * 2.0 / 9.0));
}

TEST_CASE("factory checks the context dimension and sampler settings") {
  const Setup s;
  const auto wide = ContextDistribution::uniform_ball(3, 1.0);
  CHECK_THROWS_AS(make_learner(s.dims, s.config(LearnerMode::uniform), wide, 1, 0), ConfigError);
  LearnerConfig cfg = s.config(LearnerMode::contextew_second);
  cfg.sampler.clip_floor = 0.01;
  CHECK_THROWS_AS(make_learner(s.dims, cfg, s.contexts, 1, 0), ConfigError);
  cfg = s.config(LearnerMode::contextew_second);
  cfg.optimistic = ThetaMatrix(2, 2);
  CHECK_THROWS_AS(make_learner(s.dims, cfg, s.contexts, 1, 0), ConfigError);
}
