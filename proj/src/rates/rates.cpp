#include "cew/rates.hpp"

#include <cmath>

#include <fmt/format.h>

#include "cew/errors.hpp"

namespace cew {

double default_gamma(const ProblemDims& dims) {
  return 4.0 * std::log(10.0 * dims.d * dims.K * static_cast<double>(dims.T));
}

double g_term(double v_hat, long T, GVariant variant) {
  const double lt = std::log(static_cast<double>(T));
  const double lead = variant == GVariant::main
                          ? v_hat * std::log(2.0 * static_cast<double>(T) * static_cast<double>(T))
                          : 2.0 * v_hat * lt;
  return 8.0 * std::sqrt(lead + 144.0 * lt * lt) + 176.0 * lt;
}

double h_term(double l_hat, long T) {
  const double lt = std::log(static_cast<double>(T));
  return 8.0 * std::sqrt(2.0 * l_hat * lt + 40.0 * lt * lt) + 72.0 * lt;
}

double second_order_eta(double V_hat_prev, const ProblemDims& dims, double gamma,
                        GVariant variant) {
  if (!(V_hat_prev >= 0.0)) throw ConfigError("V_hat must be non-negative");
  const double d = dims.d, K = dims.K;
  return 1.0 / std::sqrt(100.0 * d * K * gamma * gamma +
                         d * (V_hat_prev + 1.0 + g_term(V_hat_prev, dims.T, variant)));
}

double first_order_eta(double L_hat_prev, const ProblemDims& dims, double gamma) {
  if (!(L_hat_prev >= 0.0))
    throw ConfigError(fmt::format(
        "first-order schedule saw cumulative loss {} < 0; the environment must have "
        "non-negative losses",
        L_hat_prev));
  const double d = dims.d, K = dims.K;
  return 1.0 / std::sqrt(100.0 * d * gamma * gamma +
                         d * K * (L_hat_prev + 1.0 + h_term(L_hat_prev, dims.T)));
}

double resampling_eta(double L_hat_prev, const ProblemDims& dims, GVariant variant) {
  if (!(L_hat_prev >= 0.0))
    throw ConfigError(fmt::format("resampling schedule saw cumulative loss {} < 0", L_hat_prev));
  const double d = dims.d, K = dims.K;
  return 0.1 / std::sqrt(2.0 * d * K * (L_hat_prev + 1.0 + g_term(L_hat_prev, dims.T, variant)));
}

double freedman_bound(double hat_sum, double l, BoundKind kind) {
  if (!(hat_sum >= 0.0) || !(l > 0.0))
    throw ConfigError("freedman_bound needs hat_sum >= 0 and ln(1/delta) > 0");
  if (kind == BoundKind::variance)
    return hat_sum + 8.0 * std::sqrt(hat_sum * l + 72.0 * l * l) + 88.0 * l;
  return hat_sum + 8.0 * std::sqrt(hat_sum * l + 20.0 * l * l) + 36.0 * l;
}

double resampling_variance_term(double eta, const ProblemDims& dims, double lambda,
                                double epsilon) {
  const double lg = std::log(1.0 / (epsilon * lambda));
  return eta * eta * dims.d * dims.sigma * dims.sigma * 4.0 / (lambda * lambda) * lg * lg;
}

RateState::RateState(RateSchedule schedule, const ProblemDims& dims, double gamma,
                     GVariant variant, double constant_eta)
    : schedule_(schedule),
      dims_(dims),
      gamma_(gamma),
      variant_(variant),
      constant_eta_(constant_eta) {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (schedule == RateSchedule::constant && !(constant_eta >= 0.0))
    throw ConfigError("constant step size must be non-negative");
}

double RateState::peek_eta() const {
  // An infinite gamma disables truncation; the schedule keeps its default
  // scale so the step size stays finite.
  const double g = std::isinf(gamma_) ? default_gamma(dims_) : gamma_;
  switch (schedule_) {
    case RateSchedule::second_order: return second_order_eta(V_hat_, dims_, g, variant_);
    case RateSchedule::first_order: return first_order_eta(L_hat_, dims_, g);
    case RateSchedule::resampling: return resampling_eta(L_hat_, dims_, variant_);
    case RateSchedule::constant: return constant_eta_;
  }
  return 0.0;
}

double RateState::next_eta() {
  const double eta = peek_eta();
  if (!eta_history_.empty() && eta > eta_history_.back())
    throw InvariantError(fmt::format("round {}: step size increased from {} to {}",
                                     eta_history_.size() + 1, eta_history_.back(), eta));
  eta_history_.push_back(eta);
  return eta;
}

void RateState::observe(double loss, double prediction) {
  const double r = loss - prediction;
  V_hat_ += r * r;
  L_hat_ += loss;
}

}  // namespace cew
