#pragma once

#include "cew/learner.hpp"

namespace cew::detail {

// Draws an arm from a probability vector with one uniform.
int draw_arm(const Vector& p, Rng& rng);

class ContextEwLearner final : public ContinuousWeightsLearner {
 public:
  ContextEwLearner(const ProblemDims& dims, const LearnerConfig& cfg,
                   const ContextDistribution& contexts, std::uint64_t seed,
                   std::uint64_t replication);

  int act(const ContextVector& x) override;
  void feed(double loss) override;
  LearnerSnapshot snapshot() const override;
  const RateState& rates() const override { return rates_; }

 private:
  ProblemDims dims_;
  LearnerConfig cfg_;
  ContextDistribution contexts_;
  std::uint64_t seed_, replication_;
  double gamma_;
  EstimatorState est_;
  RateState rates_;
  PolicySampler sampler_;

  long t_ = 0;
  bool awaiting_loss_ = false;
  ContextVector x_;
  SimplexPoint q_;
  int action_ = -1;
  BlockCovariance sigma_tilde_inv_;
};

class ResamplingLearner final : public ContinuousWeightsLearner {
 public:
  ResamplingLearner(const ProblemDims& dims, const LearnerConfig& cfg,
                    const ContextDistribution& contexts, std::uint64_t seed,
                    std::uint64_t replication);

  int act(const ContextVector& x) override;
  void feed(double loss) override;
  LearnerSnapshot snapshot() const override;
  const RateState& rates() const override { return rates_; }

 private:
  ProblemDims dims_;
  LearnerConfig cfg_;
  ContextDistribution contexts_;
  std::uint64_t seed_, replication_;
  EstimatorState est_;
  RateState rates_;
  PolicySampler sampler_;

  long t_ = 0;
  bool awaiting_loss_ = false;
  double eta_ = 0.0;
  ContextVector x_;
  SimplexPoint q_;
  int action_ = -1;
};

class LinExp3Learner final : public Learner {
 public:
  LinExp3Learner(const ProblemDims& dims, const LearnerConfig& cfg,
                 const ContextDistribution& contexts, std::uint64_t seed,
                 std::uint64_t replication);

  int act(const ContextVector& x) override;
  void feed(double loss) override;

  // (1 - explore) softmax(-eta <x, Theta_a>) + explore / K.
  Vector policy(const ContextVector& x) const;

 private:
  ProblemDims dims_;
  LearnerConfig cfg_;
  ContextDistribution contexts_;
  std::uint64_t seed_, replication_;
  double eta_;
  ThetaMatrix cumulative_;

  long t_ = 0;
  bool awaiting_loss_ = false;
  ContextVector x_;
  int action_ = -1;
  BlockCovariance s_inv_;
};

class UniformLearner final : public Learner {
 public:
  UniformLearner(const ProblemDims& dims, std::uint64_t seed, std::uint64_t replication);

  int act(const ContextVector& x) override;
  void feed(double loss) override;

 private:
  ProblemDims dims_;
  std::uint64_t seed_, replication_;
  long t_ = 0;
  bool awaiting_loss_ = false;
};

}  // namespace cew::detail
