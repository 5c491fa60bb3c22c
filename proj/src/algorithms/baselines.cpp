#include <cmath>

#include <fmt/format.h>

#include "cew/errors.hpp"
#include "learners.hpp"

namespace cew {

double default_linexp3_eta(const ProblemDims& dims) {
  return std::sqrt(std::log(static_cast<double>(dims.K)) /
                   (3.0 * dims.d * dims.K * static_cast<double>(dims.T) * dims.sigma * dims.sigma));
}

namespace detail {

LinExp3Learner::LinExp3Learner(const ProblemDims& dims, const LearnerConfig& cfg,
                               const ContextDistribution& contexts, std::uint64_t seed,
                               std::uint64_t replication)
    : dims_(dims),
      cfg_(cfg),
      contexts_(contexts),
      seed_(seed),
      replication_(replication),
      eta_(cfg.linexp3_eta.value_or(default_linexp3_eta(dims))),
      cumulative_(dims.K, dims.d) {
  const double g = cfg_.linexp3_exploration;
  if (!(g >= 0.0 && g <= 1.0))
    throw ConfigError(fmt::format("exploration rate {} outside [0, 1]", g));
  if (!(eta_ >= 0.0)) throw ConfigError("LinExp3 step size must be non-negative");
}

Vector LinExp3Learner::policy(const ContextVector& x) const {
  const int K = dims_.K;
  Vector logits = -eta_ * (cumulative_.matrix() * x);
  logits.array() -= logits.maxCoeff();
  Vector w = logits.array().exp().matrix();
  w /= w.sum();
  const double g = cfg_.linexp3_exploration;
  return ((1.0 - g) * w).array() + g / K;
}

int LinExp3Learner::act(const ContextVector& x) {
  if (awaiting_loss_) throw InvariantError("act() called twice without feed()");
  ++t_;
  const int K = dims_.K;
  const int d = dims_.d;

  BlockCovariance S(K, d, CovarianceKind::untruncated);
  Rng mc_rng(seed_, replication_, t_, Purpose::linexp3);
  ContextVector xi(d);
  for (long i = 0; i < cfg_.covariance_samples; ++i) {
    contexts_.draw_into(mc_rng, xi);
    const Vector p = policy(xi);
    for (int a = 0; a < K; ++a)
      S.blocks[a].selfadjointView<Eigen::Lower>().rankUpdate(xi, p[a]);
  }
  for (auto& b : S.blocks) {
    Matrix full = b.selfadjointView<Eigen::Lower>();
    b = full / static_cast<double>(cfg_.covariance_samples);
  }
  S.sample_count = cfg_.covariance_samples;
  s_inv_ = invert(S);

  const Vector p = policy(x);
  Rng arm_rng(seed_, replication_, t_, Purpose::arm);
  action_ = draw_arm(p, arm_rng);
  x_ = x;
  awaiting_loss_ = true;

  double proxy_max = 0.0;
  for (int a = 0; a < K; ++a) proxy_max = std::max(proxy_max, x.dot(s_inv_.blocks[a] * x));

  RoundRecord r;
  r.t = t_;
  r.action = action_;
  r.eta = eta_;
  r.context = x;
  r.diagnostics["variance_proxy_max"] = proxy_max;
  r.diagnostics["variance_proxy_played"] = x.dot(s_inv_.blocks[action_] * x);
  r.diagnostics["play_prob"] = p[action_];
  trace_.rounds.push_back(std::move(r));
  return action_;
}

void LinExp3Learner::feed(double loss) {
  if (!awaiting_loss_) throw InvariantError("feed() called before act()");
  awaiting_loss_ = false;
  cumulative_.row(action_) += (loss * (s_inv_.blocks[action_] * x_)).transpose();
  trace_.rounds.back().loss = loss;
}

UniformLearner::UniformLearner(const ProblemDims& dims, std::uint64_t seed,
                               std::uint64_t replication)
    : dims_(dims), seed_(seed), replication_(replication) {}

int UniformLearner::act(const ContextVector& x) {
  if (awaiting_loss_) throw InvariantError("act() called twice without feed()");
  ++t_;
  Rng arm_rng(seed_, replication_, t_, Purpose::arm);
  const int a = static_cast<int>(arm_rng.below(static_cast<std::uint64_t>(dims_.K)));
  awaiting_loss_ = true;
  RoundRecord r;
  r.t = t_;
  r.action = a;
  r.context = x;
  trace_.rounds.push_back(std::move(r));
  return a;
}

void UniformLearner::feed(double loss) {
  if (!awaiting_loss_) throw InvariantError("feed() called before act()");
  awaiting_loss_ = false;
  trace_.rounds.back().loss = loss;
}

}  // namespace detail

LearnerMode parse_learner_mode(const std::string& name) {
  if (name == "contextew-second") return LearnerMode::contextew_second;
  if (name == "contextew-first") return LearnerMode::contextew_first;
  if (name == "resampling") return LearnerMode::resampling;
  if (name == "linexp3") return LearnerMode::linexp3;
  if (name == "uniform") return LearnerMode::uniform;
  throw ConfigError(fmt::format("unknown learner mode '{}'", name));
}

const char* to_string(LearnerMode mode) {
  switch (mode) {
    case LearnerMode::contextew_second: return "contextew-second";
    case LearnerMode::contextew_first: return "contextew-first";
    case LearnerMode::resampling: return "resampling";
    case LearnerMode::linexp3: return "linexp3";
    case LearnerMode::uniform: return "uniform";
  }
  return "?";
}

std::unique_ptr<Learner> make_learner(const ProblemDims& dims, const LearnerConfig& cfg,
                                      const ContextDistribution& contexts, std::uint64_t seed,
                                      std::uint64_t replication) {
  if (contexts.dim() != dims.d) throw ConfigError("context distribution does not match d");
  switch (cfg.mode) {
    case LearnerMode::contextew_second:
    case LearnerMode::contextew_first:
      return std::make_unique<detail::ContextEwLearner>(dims, cfg, contexts, seed, replication);
    case LearnerMode::resampling:
      return std::make_unique<detail::ResamplingLearner>(dims, cfg, contexts, seed, replication);
    case LearnerMode::linexp3:
      return std::make_unique<detail::LinExp3Learner>(dims, cfg, contexts, seed, replication);
    case LearnerMode::uniform:
      return std::make_unique<detail::UniformLearner>(dims, seed, replication);
  }
  throw ConfigError("unknown learner mode");
}

}  // namespace cew
