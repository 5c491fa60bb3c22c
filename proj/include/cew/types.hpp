#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace cew {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Context x in R^d. Arms are 0-based everywhere in the library; the CSV
// trace writes them 1-based.
using ContextVector = Eigen::VectorXd;
// Per-arm linear costs c_a of the simplex density exp(-<q, c>).
using CostVector = Eigen::VectorXd;

struct ProblemDims {
  int d = 0;
  int K = 0;
  long T = 0;
  double sigma = 1.0;
  double R = 1.0;

  ProblemDims() = default;
  // Throws ConfigError unless d >= 1, K >= 2, T >= 1, sigma, R > 0 and
  // sigma * R <= 1 (so every loss lies in [-1, 1]).
  ProblemDims(int d, int K, long T, double sigma, double R);
};

// K rows of d-dimensional loss parameters, one per arm.
class ThetaMatrix {
 public:
  ThetaMatrix() = default;
  ThetaMatrix(int K, int d) : rows_(Matrix::Zero(K, d)) {}
  explicit ThetaMatrix(Matrix rows) : rows_(std::move(rows)) {}

  int arms() const { return static_cast<int>(rows_.rows()); }
  int dim() const { return static_cast<int>(rows_.cols()); }

  auto row(int a) const { return rows_.row(a); }
  auto row(int a) { return rows_.row(a); }
  const Matrix& matrix() const { return rows_; }
  Matrix& matrix() { return rows_; }

  double max_row_norm() const;
  ThetaMatrix& operator+=(const ThetaMatrix& other);

 private:
  Matrix rows_;
};

// A probability vector over K arms. Construction validates non-negativity
// and the sum (tolerance 1e-12); an optional floor checks the clipped set.
class SimplexPoint {
 public:
  SimplexPoint() = default;
  explicit SimplexPoint(Vector q, double floor = 0.0);

  static SimplexPoint uniform(int K);
  static SimplexPoint vertex(int K, int a);

  int arms() const { return static_cast<int>(q_.size()); }
  double operator[](int a) const { return q_[a]; }
  const Vector& values() const { return q_; }

 private:
  Vector q_;
};

enum class CovarianceKind { untruncated, truncated, mgr_inverse, inverse };

// K symmetric d x d blocks of a block-diagonal dK x dK matrix.
struct BlockCovariance {
  std::vector<Matrix> blocks;
  CovarianceKind kind = CovarianceKind::untruncated;
  long sample_count = 0;

  BlockCovariance() = default;
  BlockCovariance(int K, int d, CovarianceKind kind);

  int arms() const { return static_cast<int>(blocks.size()); }
  int dim() const { return blocks.empty() ? 0 : static_cast<int>(blocks[0].rows()); }
  // Operator norm of the block-diagonal matrix.
  double op_norm() const;
  void symmetrize();
};

const char* to_string(CovarianceKind kind);

}  // namespace cew
