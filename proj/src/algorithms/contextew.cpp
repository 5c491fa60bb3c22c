#include <cmath>

#include <fmt/format.h>

#include "cew/errors.hpp"
#include "learners.hpp"

namespace cew::detail {

namespace {

RateSchedule schedule_for(LearnerMode mode) {
  return mode == LearnerMode::contextew_first ? RateSchedule::first_order
                                              : RateSchedule::second_order;
}

}  // namespace

ContextEwLearner::ContextEwLearner(const ProblemDims& dims, const LearnerConfig& cfg,
                                   const ContextDistribution& contexts, std::uint64_t seed,
                                   std::uint64_t replication)
    : dims_(dims),
      cfg_(cfg),
      contexts_(contexts),
      seed_(seed),
      replication_(replication),
      gamma_(cfg.gamma.value_or(default_gamma(dims))),
      est_(dims.K, dims.d),
      rates_(schedule_for(cfg.mode), dims, gamma_, cfg.g_variant),
      sampler_(cfg.sampler) {
  cfg_.sampler.validate(dims.K);
  if (cfg_.sampler.clip_floor != 0.0)
    throw ConfigError("the clipped simplex is only used by the resampling variant");
  if (cfg_.mode == LearnerMode::contextew_second && cfg_.optimistic) {
    if (cfg_.optimistic->arms() != dims.K || cfg_.optimistic->dim() != dims.d)
      throw ConfigError("optimistic estimate must be K x d");
    est_.optimistic = *cfg_.optimistic;
  }
}

int ContextEwLearner::act(const ContextVector& x) {
  if (awaiting_loss_) throw InvariantError("act() called twice without feed()");
  ++t_;
  const double eta = rates_.next_eta();
  const CostModel model{est_.cumulative.matrix(), eta};

  Rng cov_rng(seed_, replication_, t_, Purpose::covariance);
  const SigmaPair pair = estimate_sigma_pair(contexts_, model, sampler_, cfg_.covariance_samples,
                                             gamma_, cfg_.max_rejects, cov_rng);
  const BlockCovariance sigma_inv = invert(pair.sigma);
  sigma_tilde_inv_ = invert(pair.sigma_tilde);

  Rng policy_rng(seed_, replication_, t_, Purpose::policy);
  const CostVector c = model.costs(x);
  TruncatedDraw draw =
      sample_truncated(c, sigma_inv, x, gamma_, cfg_.max_rejects, sampler_, policy_rng);
  const double ceiling = static_cast<double>(dims_.d) * dims_.K * gamma_ * gamma_;
  if (!draw.forced_accept && draw.statistic > ceiling)
    throw InvariantError(fmt::format("round {}: accepted draw has statistic {} > dK gamma^2",
                                     t_, draw.statistic));

  Rng arm_rng(seed_, replication_, t_, Purpose::arm);
  action_ = draw_arm(draw.q.values(), arm_rng);
  x_ = x;
  q_ = std::move(draw.q);
  awaiting_loss_ = true;

  RoundRecord r;
  r.t = t_;
  r.action = action_;
  r.eta = eta;
  r.rejections = draw.rejections;
  r.forced_accept = draw.forced_accept;
  r.context = x;
  const SandwichMargins margins = sandwich_check(pair.sigma, pair.sigma_tilde);
  r.diagnostics["truncation_stat"] = draw.statistic;
  r.diagnostics["truncation_ceiling"] = ceiling;
  r.diagnostics["gamma"] = gamma_;
  r.diagnostics["sandwich_lower"] = margins.lower;
  r.diagnostics["sandwich_upper"] = margins.upper;
  r.diagnostics["covariance_rejections"] = static_cast<double>(pair.rejections);
  r.diagnostics["covariance_forced"] = static_cast<double>(pair.forced);
  r.diagnostics["play_prob"] = q_[action_];
  trace_.rounds.push_back(std::move(r));
  return action_;
}

void ContextEwLearner::feed(double loss) {
  if (!awaiting_loss_) throw InvariantError("feed() called before act()");
  awaiting_loss_ = false;
  const ThetaMatrix theta_hat =
      estimate_theta(x_, action_, loss, q_, sigma_tilde_inv_, est_.optimistic);
  est_ = accumulate(std::move(est_), theta_hat);
  rates_.observe(loss, est_.optimistic.row(action_).dot(x_));
  trace_.rounds.back().loss = loss;
}

LearnerSnapshot ContextEwLearner::snapshot() const {
  LearnerSnapshot s;
  s.cumulative = est_.cumulative;
  s.optimistic = est_.optimistic;
  s.eta = rates_.peek_eta();
  s.gamma = gamma_;
  s.round = t_;
  return s;
}

int draw_arm(const Vector& p, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  int last = 0;
  for (int a = 0; a < p.size(); ++a) {
    if (p[a] <= 0.0) continue;
    acc += p[a];
    last = a;
    if (u < acc) return a;
  }
  return last;
}

}  // namespace cew::detail
