#include <cmath>

#include <fmt/format.h>

#include "cew/errors.hpp"
#include "cew/mgr.hpp"
#include "learners.hpp"

namespace cew::detail {

namespace {

SamplerConfig clipped(SamplerConfig cfg, const ProblemDims& dims) {
  cfg.clip_floor = 1.0 / static_cast<double>(dims.T);
  return cfg;
}

}  // namespace

ResamplingLearner::ResamplingLearner(const ProblemDims& dims, const LearnerConfig& cfg,
                                     const ContextDistribution& contexts, std::uint64_t seed,
                                     std::uint64_t replication)
    : dims_(dims),
      cfg_(cfg),
      contexts_(contexts),
      seed_(seed),
      replication_(replication),
      est_(dims.K, dims.d),
      rates_(RateSchedule::resampling, dims, default_gamma(dims), cfg.g_variant),
      sampler_(clipped(cfg.sampler, dims)) {
  sampler_.config().validate(dims.K);
  if (dims.K * (1.0 / static_cast<double>(dims.T)) >= 1.0)
    throw ConfigError("clipped simplex needs T > K");
}

int ResamplingLearner::act(const ContextVector& x) {
  if (awaiting_loss_) throw InvariantError("act() called twice without feed()");
  ++t_;
  eta_ = rates_.next_eta();
  const CostModel model{est_.cumulative.matrix(), eta_};
  Vector q;
  Rng policy_rng(seed_, replication_, t_, Purpose::policy);
  sampler_.draw(model.costs(x), policy_rng, q);
  q_ = SimplexPoint(std::move(q), sampler_.config().clip_floor);
  Rng arm_rng(seed_, replication_, t_, Purpose::arm);
  action_ = draw_arm(q_.values(), arm_rng);
  x_ = x;
  awaiting_loss_ = true;

  RoundRecord r;
  r.t = t_;
  r.action = action_;
  r.eta = eta_;
  r.context = x;
  r.diagnostics["play_prob"] = q_[action_];
  trace_.rounds.push_back(std::move(r));
  return action_;
}

void ResamplingLearner::feed(double loss) {
  if (!awaiting_loss_) throw InvariantError("feed() called before act()");
  awaiting_loss_ = false;
  const int K = dims_.K;
  const int d = dims_.d;
  const double H = cfg_.mgr_H.value_or(static_cast<double>(dims_.T));
  const MgrParams params = mgr_params(rates_.L_hat(), dims_, cfg_.mgr_epsilon, H, cfg_.mgr_m_cap);

  const CostModel model{est_.cumulative.matrix(), eta_};
  Rng mgr_rng(seed_, replication_, t_, Purpose::mgr);
  BlockCovariance second(K, d, CovarianceKind::untruncated);
  CostVector c(K);
  auto source = [&](ContextVector& x, Vector& q) {
    contexts_.draw_into(mgr_rng, x);
    model.costs(x, c);
    sampler_.draw(c, mgr_rng, q);
    for (int a = 0; a < K; ++a)
      second.blocks[a].selfadjointView<Eigen::Lower>().rankUpdate(x, q[a] * q[a]);
  };
  const BlockCovariance sigma_hat_plus = mgr_inverse(source, params, K, d);

  const double bound = mgr_norm_bound(params);
  const double norm = sigma_hat_plus.op_norm();
  if (norm > bound * (1.0 + 1e-12))
    throw InvariantError(
        fmt::format("round {}: resampled inverse has norm {} > bound {}", t_, norm, bound));

  const ThetaMatrix theta_hat = estimate_theta_mgr(x_, action_, loss, q_, sigma_hat_plus);
  est_ = accumulate(std::move(est_), theta_hat);
  rates_.observe(loss, 0.0);

  for (auto& b : second.blocks) {
    Matrix full = b.selfadjointView<Eigen::Lower>();
    b = full / static_cast<double>(params.M * params.N);
  }
  const double variance_term = resampling_variance_term(eta_, dims_, params.lambda, params.epsilon);

  RoundRecord& r = trace_.rounds.back();
  r.loss = loss;
  r.mgr_capped = params.capped;
  r.diagnostics["mgr_M"] = static_cast<double>(params.M);
  r.diagnostics["mgr_M_schedule"] = static_cast<double>(params.M_schedule);
  r.diagnostics["mgr_N"] = static_cast<double>(params.N);
  r.diagnostics["mgr_lambda"] = params.lambda;
  r.diagnostics["mgr_norm"] = norm;
  r.diagnostics["mgr_norm_bound"] = bound;
  r.diagnostics["lambda_min_sigma"] = min_eigenvalue(second);
  r.diagnostics["variance_term"] = variance_term;
  r.diagnostics["variance_precondition_ok"] = variance_term <= 0.01 ? 1.0 : 0.0;
}

LearnerSnapshot ResamplingLearner::snapshot() const {
  LearnerSnapshot s;
  s.cumulative = est_.cumulative;
  s.optimistic = est_.optimistic;
  s.eta = rates_.peek_eta();
  s.gamma = rates_.gamma();
  s.round = t_;
  return s;
}

}  // namespace cew::detail
