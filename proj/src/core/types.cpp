#include "cew/types.hpp"

#include <cmath>

#include <fmt/format.h>

#include "cew/errors.hpp"

namespace cew {

ProblemDims::ProblemDims(int d_, int K_, long T_, double sigma_, double R_)
    : d(d_), K(K_), T(T_), sigma(sigma_), R(R_) {
  if (d < 1) throw ConfigError(fmt::format("d must be >= 1, got {}", d));
  if (K < 2) throw ConfigError(fmt::format("K must be >= 2, got {}", K));
  if (T < 1) throw ConfigError(fmt::format("T must be >= 1, got {}", T));
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw ConfigError(fmt::format("sigma must be positive, got {}", sigma));
  if (!(R > 0.0) || !std::isfinite(R))
    throw ConfigError(fmt::format("R must be positive, got {}", R));
  if (sigma * R > 1.0 + 1e-12)
    throw ConfigError(fmt::format("sigma * R = {} exceeds 1", sigma * R));
}

double ThetaMatrix::max_row_norm() const {
  if (rows_.size() == 0) return 0.0;
  return rows_.rowwise().norm().maxCoeff();
}

ThetaMatrix& ThetaMatrix::operator+=(const ThetaMatrix& other) {
  if (other.arms() != arms() || other.dim() != dim())
    throw ConfigError("theta matrix shape mismatch");
  rows_ += other.rows_;
  return *this;
}

SimplexPoint::SimplexPoint(Vector q, double floor) : q_(std::move(q)) {
  if (q_.size() < 1) throw ConfigError("empty simplex point");
  for (Eigen::Index a = 0; a < q_.size(); ++a) {
    if (!std::isfinite(q_[a]) || q_[a] < floor - 1e-15)
      throw ConfigError(fmt::format("simplex coordinate {} = {} below floor {}", a,
                                    q_[a], floor));
  }
  const double s = q_.sum();
  if (std::abs(s - 1.0) > 1e-12)
    throw ConfigError(fmt::format("simplex point sums to {}", s));
}

SimplexPoint SimplexPoint::uniform(int K) {
  return SimplexPoint(Vector::Constant(K, 1.0 / K));
}

SimplexPoint SimplexPoint::vertex(int K, int a) {
  Vector q = Vector::Zero(K);
  q[a] = 1.0;
  return SimplexPoint(std::move(q));
}

BlockCovariance::BlockCovariance(int K, int d, CovarianceKind k)
    : blocks(K, Matrix::Zero(d, d)), kind(k) {}

double BlockCovariance::op_norm() const {
  double best = 0.0;
  for (const auto& b : blocks) {
    Eigen::JacobiSVD<Matrix> svd(b);
    best = std::max(best, svd.singularValues()(0));
  }
  return best;
}

void BlockCovariance::symmetrize() {
  for (auto& b : blocks) b = 0.5 * (b + b.transpose()).eval();
}

const char* to_string(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::untruncated: return "untruncated";
    case CovarianceKind::truncated: return "truncated";
    case CovarianceKind::mgr_inverse: return "mgr-inverse";
    case CovarianceKind::inverse: return "inverse";
  }
  return "?";
}

}  // namespace cew
