#include "cew/mgr.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cew/errors.hpp"

namespace cew {

void MgrParams::validate() const {
  if (M < 1 || N < 1) throw ConfigError(fmt::format("MGR needs M, N >= 1 (got {}, {})", M, N));
  if (c != 0.5) throw ConfigError("MGR step constant is fixed at 1/2");
  if (!(epsilon > 0.0)) throw ConfigError("MGR epsilon must be positive");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("MGR lambda must lie in (0, 1]");
}

MgrParams mgr_params(double L_hat_prev, const ProblemDims& dims, double epsilon, double H,
                     long m_cap) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ConfigError(fmt::format("MGR epsilon {} outside (0, 1)", epsilon));
  if (!(H >= 1.0)) throw ConfigError("MGR horizon constant H must be >= 1");
  if (!(L_hat_prev >= 0.0))
    throw ConfigError(fmt::format("MGR schedule needs L_hat >= 0, got {}", L_hat_prev));
  if (m_cap < 1) throw ConfigError("MGR repeat cap must be >= 1");
  MgrParams p;
  p.epsilon = epsilon;
  p.lambda = 1.0 / std::sqrt(L_hat_prev + 1.0);
  const double log_term = std::log(1.0 / (epsilon * p.lambda));
  if (!(log_term > 0.0)) throw ConfigError("MGR parameters: epsilon * lambda >= 1");
  p.N = static_cast<long>(std::ceil(2.0 / p.lambda * log_term));
  const double m = 24.0 * std::log(dims.d * H * static_cast<double>(dims.T)) /
                   (epsilon * epsilon) * 4.0 / (p.lambda * p.lambda * log_term * log_term);
  const double m_ceil = std::ceil(std::max(m, 1.0));
  p.M_schedule = m_ceil > 1e18 ? static_cast<long>(1e18) : static_cast<long>(m_ceil);
  p.M = std::min(p.M_schedule, m_cap);
  p.capped = p.M < p.M_schedule;
  p.validate();
  return p;
}

BlockCovariance mgr_inverse(const MgrPairSource& next, const MgrParams& params, int K, int d) {
  params.validate();
  const double c = params.c;
  const Matrix I = Matrix::Identity(d, d);
  std::vector<Matrix> total(K, Matrix::Zero(d, d));
  std::vector<Matrix> Z(K), S(K);
  ContextVector x(d);
  Vector q(K);
  Vector zx(d);
  for (long m = 0; m < params.M; ++m) {
    for (int a = 0; a < K; ++a) {
      Z[a] = I;
      S[a].setZero(d, d);
    }
    for (long n = 0; n < params.N; ++n) {
      next(x, q);
      if (x.size() != d || q.size() != K) throw ConfigError("MGR pair has the wrong shape");
      const double xx = x.squaredNorm();
      for (int a = 0; a < K; ++a) {
        const double w = q[a] * q[a];
        if (w * xx > 1.0 / c + 1e-12)
          throw InvariantError(fmt::format(
              "MGR sample has ||q_a^2 x x^T|| = {} > 1/c; the product is not a contraction",
              w * xx));
        // Z <- Z (I - c w x x^T)
        zx.noalias() = Z[a] * x;
        Z[a].noalias() -= (c * w) * zx * x.transpose();
        S[a] += Z[a];
      }
    }
    for (int a = 0; a < K; ++a) total[a] += c * I + c * S[a];
  }
  BlockCovariance out;
  out.kind = CovarianceKind::mgr_inverse;
  out.sample_count = params.M * params.N;
  for (int a = 0; a < K; ++a) {
    Matrix avg = total[a] / static_cast<double>(params.M);
    out.blocks.push_back(0.5 * (avg + avg.transpose()));
  }
  return out;
}

BlockCovariance mgr_inverse(const std::vector<MgrPair>& pairs, const MgrParams& params) {
  if (pairs.empty()) throw ConfigError("MGR needs at least one pair");
  const long need = params.M * params.N;
  if (static_cast<long>(pairs.size()) != need)
    throw ConfigError(fmt::format("MGR expects M*N = {} pairs, got {}", need, pairs.size()));
  const int d = static_cast<int>(pairs[0].first.size());
  const int K = static_cast<int>(pairs[0].second.size());
  std::size_t i = 0;
  return mgr_inverse(
      [&](ContextVector& x, Vector& q) {
        x = pairs[i].first;
        q = pairs[i].second;
        ++i;
      },
      params, K, d);
}

BlockCovariance mgr_expected_value(const BlockCovariance& sigma, double c, long N) {
  if (N < 0) throw ConfigError("MGR depth must be non-negative");
  BlockCovariance out;
  out.kind = CovarianceKind::mgr_inverse;
  for (int a = 0; a < sigma.arms(); ++a) {
    const Matrix& B = sigma.blocks[a];
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (B + B.transpose()));
    const Vector& lam = es.eigenvalues();
    if (!(lam[0] > 0.0))
      throw ConfigError(fmt::format("block {} is not positive definite", a));
    if (c * lam[lam.size() - 1] >= 1.0)
      throw ConfigError(fmt::format("block {}: c * lambda_max = {} >= 1", a,
                                    c * lam[lam.size() - 1]));
    Vector f(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i)
      f[i] = (1.0 - std::pow(1.0 - c * lam[i], static_cast<double>(N + 1))) / lam[i];
    const Matrix& V = es.eigenvectors();
    out.blocks.push_back(V * f.asDiagonal() * V.transpose());
  }
  return out;
}

double mgr_norm_bound(const MgrParams& params) {
  return 2.0 / params.lambda * std::log(1.0 / (params.epsilon * params.lambda));
}

namespace {

double block_op_norm(const std::vector<Matrix>& blocks) {
  BlockCovariance tmp;
  tmp.blocks = blocks;
  return tmp.op_norm();
}

}  // namespace

MgrDrawCheck mgr_check_draw(const BlockCovariance& sigma_hat_plus,
                            const BlockCovariance& sigma, const MgrParams& params) {
  MgrDrawCheck r;
  std::vector<Matrix> err, prod;
  for (int a = 0; a < sigma.arms(); ++a) {
    err.push_back(sigma_hat_plus.blocks[a] - sigma.blocks[a].inverse());
    prod.push_back(sigma_hat_plus.blocks[a] * sigma.blocks[a]);
  }
  r.norm = sigma_hat_plus.op_norm();
  r.error_norm = block_op_norm(err);
  r.product_norm = block_op_norm(prod);
  r.bounded = r.norm <= mgr_norm_bound(params) * (1.0 + 1e-12);
  r.accurate = r.error_norm <= params.epsilon;
  r.product_ok = r.product_norm <= 1.0 + 2.0 * params.epsilon;
  return r;
}

MgrPropertyReport mgr_property_check(const std::vector<BlockCovariance>& draws,
                                     const BlockCovariance& sigma, const MgrParams& params,
                                     long T) {
  if (draws.size() < 2) throw ConfigError("MGR property check needs at least two draws");
  const int K = sigma.arms();
  const int d = sigma.dim();
  MgrPropertyReport r;
  r.draws = static_cast<long>(draws.size());
  std::vector<Matrix> sum(K, Matrix::Zero(d, d)), sumsq(K, Matrix::Zero(d, d));
  long accurate = 0, product = 0;
  for (const auto& draw : draws) {
    const MgrDrawCheck chk = mgr_check_draw(draw, sigma, params);
    if (!chk.bounded) ++r.bound_violations;
    if (chk.accurate) ++accurate;
    if (chk.product_ok) ++product;
    for (int a = 0; a < K; ++a) {
      sum[a] += draw.blocks[a];
      sumsq[a] += draw.blocks[a].cwiseProduct(draw.blocks[a]);
    }
  }
  const double n = static_cast<double>(r.draws);
  std::vector<Matrix> err;
  double se2 = 0.0;
  for (int a = 0; a < K; ++a) {
    const Matrix mean = sum[a] / n;
    err.push_back(mean - sigma.blocks[a].inverse());
    const Matrix var = ((sumsq[a] - n * mean.cwiseProduct(mean)) / (n - 1.0)).cwiseMax(0.0);
    se2 = std::max(se2, (var / n).sum());
  }
  r.mean_error_norm = block_op_norm(err);
  r.mean_error_se = std::sqrt(se2);
  r.accuracy_rate = accurate / n;
  r.product_rate = product / n;
  r.required_rate = 1.0 - 2.0 / std::pow(static_cast<double>(T), 3.0);
  r.bound_ok = r.bound_violations == 0;
  r.mean_ok = r.mean_error_norm <= params.epsilon + 4.0 * r.mean_error_se;
  r.accuracy_ok = r.accuracy_rate >= r.required_rate;
  r.product_ok = r.product_rate >= r.required_rate;
  return r;
}

}  // namespace cew
