#pragma once

#include <string>
#include <vector>

#include "cew/rng.hpp"
#include "cew/types.hpp"

namespace cew {

enum class ContextKind { truncated_gaussian, uniform_ball, uniform_box };

// The i.i.d. context law D. Learners get sampling access to it; that is
// how they estimate covariances.
class ContextDistribution {
 public:
  static ContextDistribution truncated_gaussian(Vector mean, Matrix covariance,
                                                double radius);
  static ContextDistribution uniform_ball(int d, double radius);
  static ContextDistribution uniform_box(Vector lo, Vector hi);

  ContextKind kind() const { return kind_; }
  int dim() const { return dim_; }
  // Largest norm any draw can have.
  double max_norm() const;
  // True when every draw has non-negative coordinates.
  bool in_positive_orthant() const;
  // Mean of the untruncated law or the box / ball centre.
  Vector center() const;
  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }
  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return cov_; }
  double radius() const { return radius_; }

  ContextVector draw(Rng& rng) const;
  void draw_into(Rng& rng, ContextVector& out) const;

 private:
  ContextKind kind_ = ContextKind::uniform_ball;
  int dim_ = 0;
  Vector mean_;
  Matrix cov_;
  Matrix chol_;
  double radius_ = 0.0;
  Vector lo_, hi_;
};

const char* to_string(ContextKind kind);

enum class AdversaryKind { fixed, drifting, punish_most_played, punish_last_played };

struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::fixed;
  ThetaMatrix theta;      // fixed rows, drift start, or base rows for adaptive rules
  ThetaMatrix theta_end;  // drifting only
  double rate = 0.0;      // drifting only: weight (1 - cos(rate t)) / 2 on theta_end
};

const char* to_string(AdversaryKind kind);

struct EnvironmentSpec {
  ProblemDims dims;
  ContextDistribution contexts;
  AdversarySpec adversary;
  // Shift every emitted row by a common offset so all losses lie in [0, 1].
  // Requires a box support inside the positive orthant.
  bool nonnegative = false;

  // Structural checks: shapes, norm bounds, support vs sigma, and (when
  // nonnegative) that the offset keeps every loss inside [0, 1].
  void validate() const;
};

// Runtime adversary for one replication. theta_for_round(t) must be called
// before the context of round t is drawn; observe() receives A_t afterwards.
class Adversary {
 public:
  explicit Adversary(const EnvironmentSpec& env);

  const ThetaMatrix& theta_for_round(long t);
  void observe(int action);

  // The common shift applied in nonnegative mode (zero otherwise).
  const Vector& offset() const { return offset_; }

 private:
  AdversarySpec spec_;
  double R_;
  Vector offset_;
  Vector punish_;
  ThetaMatrix current_;
  std::vector<long> counts_;
  int last_action_ = -1;
};

// Offset that makes <x, theta + offset> >= 0 over the box support for all
// candidate rows; zero vector if already non-negative.
Vector nonnegative_offset(const ContextDistribution& contexts,
                          const std::vector<ThetaMatrix>& candidates);

// Smallest eigenvalue of an n-sample estimate of E[X X^T].
double second_moment_min_eigenvalue(const ContextDistribution& contexts, Rng& rng,
                                    long n);
Matrix second_moment(const ContextDistribution& contexts, Rng& rng, long n);

}  // namespace cew
