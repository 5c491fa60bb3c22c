#include "cew/covariance.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cew/errors.hpp"

namespace cew {

namespace {

void accumulate(BlockCovariance& acc, const Vector& q, const ContextVector& x) {
  for (int a = 0; a < acc.arms(); ++a)
    acc.blocks[a].selfadjointView<Eigen::Lower>().rankUpdate(x, q[a] * q[a]);
}

void finish(BlockCovariance& acc, long S) {
  for (auto& b : acc.blocks) {
    Matrix full = b.selfadjointView<Eigen::Lower>();
    b = full / static_cast<double>(S);
  }
  acc.sample_count = S;
}

}  // namespace

BlockCovariance estimate_sigma(const ContextDistribution& contexts, const CostModel& costs,
                               PolicySampler& sampler, long S, bool truncated, double gamma,
                               Rng& rng, const BlockCovariance* untruncated,
                               int max_rejects) {
  const int K = static_cast<int>(costs.cumulative.rows());
  const int d = contexts.dim();
  if (S < static_cast<long>(d) * K)
    throw ConfigError(fmt::format("covariance sample count {} below d*K = {}", S, d * K));

  BlockCovariance acc(K, d, truncated ? CovarianceKind::truncated : CovarianceKind::untruncated);
  ContextVector x(d);
  CostVector c(K);
  Vector q(K);

  if (!truncated) {
    for (long i = 0; i < S; ++i) {
      contexts.draw_into(rng, x);
      costs.costs(x, c);
      sampler.draw(c, rng, q);
      accumulate(acc, q, x);
    }
    finish(acc, S);
    return acc;
  }

  BlockCovariance inverse;
  if (untruncated != nullptr) {
    inverse = invert(*untruncated);
  } else {
    Rng pre = rng.split(1);
    inverse = invert(estimate_sigma(contexts, costs, sampler, S, false, gamma, pre));
  }
  for (long i = 0; i < S; ++i) {
    contexts.draw_into(rng, x);
    costs.costs(x, c);
    const TruncatedDraw draw = sample_truncated(c, inverse, x, gamma, max_rejects, sampler, rng);
    accumulate(acc, draw.q.values(), x);
  }
  finish(acc, S);
  return acc;
}

SigmaPair estimate_sigma_pair(const ContextDistribution& contexts, const CostModel& costs,
                              PolicySampler& sampler, long S, double gamma, int max_rejects,
                              Rng& rng) {
  const int K = static_cast<int>(costs.cumulative.rows());
  const int d = contexts.dim();
  if (S < static_cast<long>(d) * K)
    throw ConfigError(fmt::format("covariance sample count {} below d*K = {}", S, d * K));

  SigmaPair out;
  out.sigma = BlockCovariance(K, d, CovarianceKind::untruncated);
  out.sigma_tilde = BlockCovariance(K, d, CovarianceKind::truncated);
  Matrix xs(d, S);
  Matrix qs(K, S);
  ContextVector x(d);
  CostVector c(K);
  Vector q(K);
  for (long i = 0; i < S; ++i) {
    contexts.draw_into(rng, x);
    costs.costs(x, c);
    sampler.draw(c, rng, q);
    xs.col(i) = x;
    qs.col(i) = q;
    accumulate(out.sigma, q, x);
  }
  finish(out.sigma, S);

  const BlockCovariance inverse = invert(out.sigma);
  const double threshold = static_cast<double>(K) * d * gamma * gamma;
  for (long i = 0; i < S; ++i) {
    x = xs.col(i);
    q = qs.col(i);
    if (!std::isinf(gamma) && truncation_statistic(q, x, inverse) > threshold) {
      ++out.rejections;
      costs.costs(x, c);
      const TruncatedDraw draw =
          sample_truncated(c, inverse, x, gamma, max_rejects, sampler, rng);
      out.rejections += draw.rejections;
      if (draw.forced_accept) ++out.forced;
      q = draw.q.values();
    }
    accumulate(out.sigma_tilde, q, x);
  }
  finish(out.sigma_tilde, S);
  return out;
}

Matrix invert_block(const Matrix& B) {
  const Eigen::Index d = B.rows();
  if (B.cols() != d) throw ConfigError("invert_block needs a square matrix");
  const Matrix sym = 0.5 * (B + B.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) throw NumericalError("eigen-decomposition failed");
  const Vector& lambda = es.eigenvalues();
  const double top = lambda.cwiseAbs().maxCoeff();
  if (!(top > 0.0)) throw NumericalError("cannot invert a zero block");
  if (lambda[0] < -1e-12 * top)
    throw NumericalError(
        fmt::format("block is not positive semi-definite (eigenvalue {:.3e})", lambda[0]));
  const double cond = lambda[0] > 0.0 ? top / lambda[0] : std::numeric_limits<double>::infinity();
  const double jitter = cond > kJitterCondition ? 1e-10 * sym.trace() / static_cast<double>(d) : 0.0;
  const Vector inv = (lambda.array() + jitter).inverse().matrix();
  const Matrix& V = es.eigenvectors();
  Matrix out = V * inv.asDiagonal() * V.transpose();
  return 0.5 * (out + out.transpose());
}

BlockCovariance invert(const BlockCovariance& sigma) {
  BlockCovariance out;
  out.kind = CovarianceKind::inverse;
  out.sample_count = sigma.sample_count;
  out.blocks.reserve(sigma.blocks.size());
  for (int a = 0; a < sigma.arms(); ++a) {
    try {
      out.blocks.push_back(invert_block(sigma.blocks[a]));
    } catch (const NumericalError& e) {
      throw NumericalError(fmt::format("covariance block {}: {}", a, e.what()));
    }
  }
  return out;
}

double mahalanobis_stat(const SimplexPoint& q, const ContextVector& x,
                        const BlockCovariance& sigma) {
  return truncation_statistic(q.values(), x, invert(sigma));
}

SandwichMargins sandwich_check(const BlockCovariance& sigma,
                               const BlockCovariance& sigma_tilde) {
  if (sigma.arms() != sigma_tilde.arms() || sigma.dim() != sigma_tilde.dim())
    throw ConfigError("sandwich_check: block layouts differ");
  SandwichMargins m{std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity()};
  for (int a = 0; a < sigma.arms(); ++a) {
    const Matrix s = 0.5 * (sigma.blocks[a] + sigma.blocks[a].transpose());
    const Matrix st = 0.5 * (sigma_tilde.blocks[a] + sigma_tilde.blocks[a].transpose());
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success)
      throw NumericalError(fmt::format("sandwich_check: block {} of sigma is singular", a));
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(st, s);
    m.lower = std::min(m.lower, ges.eigenvalues().minCoeff());
    m.upper = std::max(m.upper, ges.eigenvalues().maxCoeff());
  }
  return m;
}

double min_eigenvalue(const BlockCovariance& sigma) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : sigma.blocks) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (b + b.transpose()), Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues()[0]);
  }
  return m;
}

}  // namespace cew
