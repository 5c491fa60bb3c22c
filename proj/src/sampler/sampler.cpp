#include "cew/sampler.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cew/covariance.hpp"
#include "cew/errors.hpp"
#include "cew/zcalc.hpp"

namespace cew {

namespace {

constexpr int kUnboundedProposals = 10000000;

}  // namespace

SamplerMethod parse_sampler_method(const std::string& name) {
  if (name == "exact") return SamplerMethod::exact;
  if (name == "rejection") return SamplerMethod::rejection;
  if (name == "hit-and-run") return SamplerMethod::hit_and_run;
  throw ConfigError(fmt::format("unknown sampler method '{}'", name));
}

const char* to_string(SamplerMethod m) {
  switch (m) {
    case SamplerMethod::exact: return "exact";
    case SamplerMethod::rejection: return "rejection";
    case SamplerMethod::hit_and_run: return "hit-and-run";
  }
  return "?";
}

void SamplerConfig::validate(int K) const {
  if (!(hr_steps > hr_burnin && hr_burnin >= 0))
    throw ConfigError(fmt::format("need hr_steps > hr_burnin >= 0 (got {} and {})", hr_steps,
                                  hr_burnin));
  if (!(clip_floor >= 0.0) || clip_floor * K >= 1.0)
    throw ConfigError(fmt::format("clip floor {} invalid for K = {}", clip_floor, K));
  if (!(inverse_cdf_tol > 0.0)) throw ConfigError("inverse_cdf_tol must be positive");
  if (rejection_proposals < 1) throw ConfigError("rejection_proposals must be >= 1");
}

double density_unnormalized(const SimplexPoint& q, const CostVector& c) {
  return std::exp(-q.values().dot(c));
}

double truncated_exponential(double rate, double length, double u) {
  if (!(length > 0.0)) return 0.0;
  const double x = rate * length;
  double s;
  if (std::abs(x) < 1e-12) {
    s = u * length;
  } else if (rate > 0.0) {
    s = -std::log1p(u * std::expm1(-x)) / rate;
  } else {
    s = length - std::log1p(u * std::expm1(x)) / rate;
  }
  return std::clamp(s, 0.0, length);
}

PolicySampler::PolicySampler(SamplerConfig cfg) : cfg_(cfg) {}

void PolicySampler::draw(const CostVector& c, Rng& rng, Vector& q) {
  const int K = static_cast<int>(c.size());
  const double floor = cfg_.clip_floor;
  const double scale = 1.0 - K * floor;
  if (floor == 0.0) {
    draw_plain(c, rng, q);
    return;
  }
  scaled_ = scale * c;
  draw_plain(scaled_, rng, q);
  q = (scale * q).array() + floor;
}

void PolicySampler::draw_plain(const CostVector& c, Rng& rng, Vector& u) {
  const int K = static_cast<int>(c.size());
  u.resize(K);
  switch (cfg_.method) {
    case SamplerMethod::hit_and_run:
      draw_hit_and_run(c, rng, u);
      return;
    case SamplerMethod::exact:
      if (K <= cfg_.exact_max_arms && draw_sequential(c, rng, u)) return;
      ++ill_conditioned_;
      break;
    case SamplerMethod::rejection:
      if (draw_rejection(c, rng, u, cfg_.rejection_proposals)) return;
      ++sequential_fallbacks_;
      if (K <= cfg_.exact_max_arms && draw_sequential(c, rng, u)) return;
      ++ill_conditioned_;
      break;
  }
  if (!draw_rejection(c, rng, u, kUnboundedProposals))
    throw NumericalError("simplex sampler: no exact method succeeded");
}

bool PolicySampler::draw_rejection(const CostVector& c, Rng& rng, Vector& u,
                                   int max_proposals) {
  const int K = static_cast<int>(c.size());
  Eigen::Index ref = 0;
  const double cmin = c.minCoeff(&ref);
  rates_.resize(K);
  norm_.resize(K);
  for (int a = 0; a < K; ++a) {
    rates_[a] = c[a] - cmin;
    norm_[a] = std::expm1(-rates_[a]);  // -(1 - e^{-r})
  }
  for (int attempt = 0; attempt < max_proposals; ++attempt) {
    double s = 0.0;
    bool fits = true;
    for (int a = 0; a < K && fits; ++a) {
      if (a == ref) continue;
      const double v = rng.uniform();
      const double y = rates_[a] < 1e-12 ? v : -std::log1p(v * norm_[a]) / rates_[a];
      u[a] = y;
      s += y;
      fits = s <= 1.0;
    }
    if (fits) {
      u[ref] = 1.0 - s;
      return true;
    }
  }
  return false;
}

bool PolicySampler::draw_sequential(const CostVector& c, Rng& rng, Vector& u) {
  const int K = static_cast<int>(c.size());
  const ReducedCosts rc = reduce_costs(c);
  const Vector p = rc.permuted();
  double budget = 1.0;
  for (int i = 0; i + 1 < K; ++i) {
    const PartialFractionTable table = partial_fraction_table(
        std::span<const double>(p.data() + i, static_cast<std::size_t>(K - i)));
    if (!(table.conditioning() <= kConditioningLimit)) return false;
    const double total = table.evaluate(budget);
    if (!(total > 0.0) || !std::isfinite(total)) return false;
    const double target = rng.uniform();
    double lo = 0.0;
    double hi = budget;
    while (hi - lo > cfg_.inverse_cdf_tol) {
      const double mid = 0.5 * (lo + hi);
      const double surv = std::exp(-p[i] * mid) * table.evaluate(budget - mid) / total;
      if (!std::isfinite(surv)) return false;
      if (surv > target) lo = mid;
      else hi = mid;
    }
    const double v = 0.5 * (lo + hi);
    u[rc.order[i]] = v;
    budget = std::max(0.0, budget - v);
  }
  u[rc.order[K - 1]] = budget;
  return true;
}

void PolicySampler::draw_hit_and_run(const CostVector& c, Rng& rng, Vector& u) {
  const int K = static_cast<int>(c.size());
  u.setConstant(1.0 / K);
  dir_.resize(K);
  const int total = cfg_.hr_burnin + cfg_.hr_steps;
  for (int step = 0; step < total; ++step) {
    for (int a = 0; a < K; ++a) dir_[a] = rng.normal();
    dir_.array() -= dir_.mean();
    const double n = dir_.norm();
    if (!(n > 1e-300)) continue;
    dir_ /= n;
    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    for (int a = 0; a < K; ++a) {
      if (dir_[a] > 0.0) tmin = std::max(tmin, -u[a] / dir_[a]);
      else if (dir_[a] < 0.0) tmax = std::min(tmax, -u[a] / dir_[a]);
    }
    const double rate = c.dot(dir_);
    const double t = tmin + truncated_exponential(rate, tmax - tmin, rng.uniform());
    u += t * dir_;
    u = u.cwiseMax(0.0);
    u /= u.sum();
  }
}

SimplexPoint sample_exact(const CostVector& c, Rng& rng, const SamplerConfig& cfg) {
  SamplerConfig local = cfg;
  local.method = SamplerMethod::exact;
  local.validate(static_cast<int>(c.size()));
  if (static_cast<int>(c.size()) > local.exact_max_arms)
    throw ConfigError(fmt::format("exact sampler capped at K = {}", local.exact_max_arms));
  PolicySampler s(local);
  Vector q;
  s.draw(c, rng, q);
  return SimplexPoint(std::move(q), local.clip_floor);
}

SimplexPoint sample_rejection(const CostVector& c, Rng& rng, const SamplerConfig& cfg) {
  SamplerConfig local = cfg;
  local.method = SamplerMethod::rejection;
  local.validate(static_cast<int>(c.size()));
  PolicySampler s(local);
  Vector q;
  s.draw(c, rng, q);
  return SimplexPoint(std::move(q), local.clip_floor);
}

SimplexPoint sample_hit_and_run(const CostVector& c, const SamplerConfig& cfg, Rng& rng) {
  SamplerConfig local = cfg;
  local.method = SamplerMethod::hit_and_run;
  local.validate(static_cast<int>(c.size()));
  PolicySampler s(local);
  Vector q;
  s.draw(c, rng, q);
  return SimplexPoint(std::move(q), local.clip_floor);
}

double truncation_statistic(const Vector& q, const ContextVector& x,
                            const BlockCovariance& sigma_inverse) {
  double s = 0.0;
  for (int a = 0; a < sigma_inverse.arms(); ++a)
    s += q[a] * q[a] * x.dot(sigma_inverse.blocks[a] * x);
  return s;
}

TruncatedDraw sample_truncated(const CostVector& c, const BlockCovariance& sigma_inverse,
                               const ContextVector& x, double gamma, int max_rejects,
                               PolicySampler& sampler, Rng& rng) {
  if (!(gamma > 0.0)) throw ConfigError("truncation level gamma must be positive");
  const double threshold =
      static_cast<double>(sigma_inverse.arms()) * sigma_inverse.dim() * gamma * gamma;
  Vector q;
  TruncatedDraw out;
  for (;;) {
    sampler.draw(c, rng, q);
    const double stat = truncation_statistic(q, x, sigma_inverse);
    if (stat <= threshold || std::isinf(gamma)) {
      out.q = SimplexPoint(std::move(q), sampler.config().clip_floor);
      out.statistic = stat;
      return out;
    }
    ++out.rejections;
    if (out.rejections >= max_rejects) {
      out.q = SimplexPoint(std::move(q), sampler.config().clip_floor);
      out.statistic = stat;
      out.forced_accept = true;
      return out;
    }
  }
}

TruncatedDraw sample_truncated(const CostVector& c, const BlockCovariance& sigma,
                               const ContextVector& x, double gamma, int max_rejects,
                               Rng& rng, const SamplerConfig& cfg) {
  PolicySampler sampler(cfg);
  return sample_truncated(c, invert(sigma), x, gamma, max_rejects, sampler, rng);
}

}  // namespace cew
