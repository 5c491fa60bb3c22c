#include "cew/environment.hpp"

#include <cmath>

#include <fmt/format.h>

#include "cew/errors.hpp"

namespace cew {

namespace {

constexpr double kNormSlack = 1e-12;

template <typename F>
void for_each_corner(const Vector& lo, const Vector& hi, F&& f) {
  const int d = static_cast<int>(lo.size());
  if (d > 20) throw ConfigError("box corner enumeration limited to d <= 20");
  Vector x(d);
  for (std::uint64_t mask = 0; mask < (1ull << d); ++mask) {
    for (int i = 0; i < d; ++i) x[i] = (mask >> i) & 1u ? hi[i] : lo[i];
    f(x);
  }
}

Vector unit_or_first_axis(const Vector& v) {
  const double n = v.norm();
  if (n > 1e-12) return v / n;
  Vector e = Vector::Zero(v.size());
  e[0] = 1.0;
  return e;
}

}  // namespace

ContextDistribution ContextDistribution::truncated_gaussian(Vector mean,
                                                            Matrix covariance,
                                                            double radius) {
  ContextDistribution out;
  out.kind_ = ContextKind::truncated_gaussian;
  out.dim_ = static_cast<int>(mean.size());
  if (out.dim_ < 1) throw ConfigError("empty gaussian mean");
  if (covariance.rows() != out.dim_ || covariance.cols() != out.dim_)
    throw ConfigError("gaussian covariance shape does not match mean");
  if (!(radius > 0.0)) throw ConfigError("gaussian truncation radius must be positive");
  Eigen::LLT<Matrix> llt(0.5 * (covariance + covariance.transpose()));
  if (llt.info() != Eigen::Success)
    throw ConfigError("gaussian covariance is not positive definite");
  out.mean_ = std::move(mean);
  out.cov_ = std::move(covariance);
  out.chol_ = llt.matrixL();
  out.radius_ = radius;
  return out;
}

ContextDistribution ContextDistribution::uniform_ball(int d, double radius) {
  if (d < 1) throw ConfigError("ball dimension must be >= 1");
  if (!(radius > 0.0)) throw ConfigError("ball radius must be positive");
  ContextDistribution out;
  out.kind_ = ContextKind::uniform_ball;
  out.dim_ = d;
  out.radius_ = radius;
  out.mean_ = Vector::Zero(d);
  return out;
}

ContextDistribution ContextDistribution::uniform_box(Vector lo, Vector hi) {
  if (lo.size() < 1 || lo.size() != hi.size())
    throw ConfigError("box bounds must be non-empty and of equal length");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i]))
      throw ConfigError(fmt::format("box lower bound exceeds upper bound at {}", i));
  }
  ContextDistribution out;
  out.kind_ = ContextKind::uniform_box;
  out.dim_ = static_cast<int>(lo.size());
  out.lo_ = std::move(lo);
  out.hi_ = std::move(hi);
  out.mean_ = 0.5 * (out.lo_ + out.hi_);
  return out;
}

double ContextDistribution::max_norm() const {
  if (kind_ != ContextKind::uniform_box) return radius_;
  return lo_.cwiseAbs().cwiseMax(hi_.cwiseAbs()).norm();
}

bool ContextDistribution::in_positive_orthant() const {
  return kind_ == ContextKind::uniform_box && (lo_.array() >= 0.0).all();
}

Vector ContextDistribution::center() const { return mean_; }

void ContextDistribution::draw_into(Rng& rng, ContextVector& x) const {
  x.resize(dim_);
  switch (kind_) {
    case ContextKind::truncated_gaussian: {
      Vector z(dim_);
      for (int attempt = 0; attempt < 1000000; ++attempt) {
        for (int i = 0; i < dim_; ++i) z[i] = rng.normal();
        x.noalias() = mean_ + chol_ * z;
        if (x.norm() <= radius_) return;
      }
      throw NumericalError("truncated gaussian: acceptance region has negligible mass");
    }
    case ContextKind::uniform_ball: {
      double n2 = 0.0;
      do {
        for (int i = 0; i < dim_; ++i) x[i] = rng.normal();
        n2 = x.squaredNorm();
      } while (n2 == 0.0);
      x *= radius_ * std::pow(rng.uniform(), 1.0 / dim_) / std::sqrt(n2);
      return;
    }
    case ContextKind::uniform_box:
      for (int i = 0; i < dim_; ++i) x[i] = lo_[i] + (hi_[i] - lo_[i]) * rng.uniform();
      return;
  }
}

ContextVector ContextDistribution::draw(Rng& rng) const {
  ContextVector x;
  draw_into(rng, x);
  return x;
}

const char* to_string(ContextKind kind) {
  switch (kind) {
    case ContextKind::truncated_gaussian: return "truncated-gaussian";
    case ContextKind::uniform_ball: return "uniform-ball";
    case ContextKind::uniform_box: return "uniform-box";
  }
  return "?";
}

const char* to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::fixed: return "fixed";
    case AdversaryKind::drifting: return "drifting";
    case AdversaryKind::punish_most_played: return "punish-most-played";
    case AdversaryKind::punish_last_played: return "punish-last-played";
  }
  return "?";
}

Vector nonnegative_offset(const ContextDistribution& contexts,
                          const std::vector<ThetaMatrix>& candidates) {
  if (!contexts.in_positive_orthant())
    throw ConfigError(
        "nonnegative losses need a uniform-box context support in the positive orthant");
  const Vector u = unit_or_first_axis(contexts.center());
  double shift = 0.0;
  for_each_corner(contexts.lo(), contexts.hi(), [&](const Vector& x) {
    const double along = x.dot(u);
    if (along <= 0.0) return;
    for (const auto& th : candidates)
      for (int a = 0; a < th.arms(); ++a)
        shift = std::max(shift, -x.dot(th.row(a).transpose()) / along);
  });
  return shift * u;
}

void EnvironmentSpec::validate() const {
  const int d = dims.d;
  const int K = dims.K;
  if (contexts.dim() != d)
    throw ConfigError(fmt::format("context dimension {} does not match d = {}",
                                  contexts.dim(), d));
  if (contexts.max_norm() > dims.sigma * (1.0 + kNormSlack))
    throw ConfigError(fmt::format("context support reaches norm {} > sigma = {}",
                                  contexts.max_norm(), dims.sigma));
  auto check_rows = [&](const ThetaMatrix& th, const char* what) {
    if (th.arms() != K || th.dim() != d)
      throw ConfigError(fmt::format("{} must be {} x {}, got {} x {}", what, K, d,
                                    th.arms(), th.dim()));
    if (th.max_row_norm() > dims.R * (1.0 + kNormSlack))
      throw ConfigError(fmt::format("{} has a row of norm {} > R = {}", what,
                                    th.max_row_norm(), dims.R));
  };
  check_rows(adversary.theta, "theta");
  if (adversary.kind == AdversaryKind::drifting) check_rows(adversary.theta_end, "theta_end");

  if (!nonnegative) return;
  std::vector<ThetaMatrix> candidates{adversary.theta};
  if (adversary.kind == AdversaryKind::drifting) candidates.push_back(adversary.theta_end);
  const Vector v = nonnegative_offset(contexts, candidates);
  if (v.norm() > dims.R)
    throw ConfigError("nonnegative offset alone exceeds the parameter bound R");
  for (const auto& th : candidates) {
    for (int a = 0; a < K; ++a) {
      const Vector row = th.row(a).transpose() + v;
      if (row.norm() > dims.R * (1.0 + kNormSlack))
        throw ConfigError(fmt::format(
            "shifted theta row {} has norm {} > R = {}; shrink theta or the support", a,
            row.norm(), dims.R));
      for_each_corner(contexts.lo(), contexts.hi(), [&](const Vector& x) {
        const double l = x.dot(row);
        if (l < -1e-12 || l > 1.0 + 1e-12)
          throw ConfigError(fmt::format("shifted loss {} of arm {} leaves [0, 1]", l, a));
      });
    }
  }
}

Adversary::Adversary(const EnvironmentSpec& env)
    : spec_(env.adversary), R_(env.dims.R), counts_(env.dims.K, 0) {
  env.validate();
  const Vector u = unit_or_first_axis(env.contexts.center());
  if (env.nonnegative) {
    std::vector<ThetaMatrix> candidates{spec_.theta};
    if (spec_.kind == AdversaryKind::drifting) candidates.push_back(spec_.theta_end);
    offset_ = nonnegative_offset(env.contexts, candidates);
    punish_ = offset_ + (R_ - offset_.norm()) * u;
  } else {
    offset_ = Vector::Zero(env.dims.d);
    punish_ = R_ * u;
  }
  current_ = spec_.theta;
}

const ThetaMatrix& Adversary::theta_for_round(long t) {
  Matrix& rows = current_.matrix();
  switch (spec_.kind) {
    case AdversaryKind::fixed:
      rows = spec_.theta.matrix();
      break;
    case AdversaryKind::drifting: {
      const double w = 0.5 * (1.0 - std::cos(spec_.rate * static_cast<double>(t)));
      rows = (1.0 - w) * spec_.theta.matrix() + w * spec_.theta_end.matrix();
      break;
    }
    case AdversaryKind::punish_most_played:
    case AdversaryKind::punish_last_played:
      rows = spec_.theta.matrix();
      break;
  }
  rows.rowwise() += offset_.transpose();

  int punished = -1;
  if (spec_.kind == AdversaryKind::punish_last_played) {
    punished = last_action_;
  } else if (spec_.kind == AdversaryKind::punish_most_played && last_action_ >= 0) {
    punished = 0;
    for (int a = 1; a < static_cast<int>(counts_.size()); ++a)
      if (counts_[a] > counts_[punished]) punished = a;
  }
  if (punished >= 0) rows.row(punished) = punish_.transpose();

  if (current_.max_row_norm() > R_ * (1.0 + 1e-9))
    throw InvariantError(fmt::format("round {}: adversary emitted a row of norm {} > R",
                                     t, current_.max_row_norm()));
  return current_;
}

void Adversary::observe(int action) {
  if (action < 0 || action >= static_cast<int>(counts_.size()))
    throw std::out_of_range(fmt::format("arm {} out of range", action));
  ++counts_[action];
  last_action_ = action;
}

Matrix second_moment(const ContextDistribution& contexts, Rng& rng, long n) {
  const int d = contexts.dim();
  Matrix acc = Matrix::Zero(d, d);
  ContextVector x(d);
  for (long i = 0; i < n; ++i) {
    contexts.draw_into(rng, x);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(x);
  }
  Matrix full = acc.selfadjointView<Eigen::Lower>();
  return full / static_cast<double>(n);
}

double second_moment_min_eigenvalue(const ContextDistribution& contexts, Rng& rng,
                                    long n) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(second_moment(contexts, rng, n));
  return es.eigenvalues()(0);
}

}  // namespace cew
