#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "cew/covariance.hpp"
#include "cew/environment.hpp"
#include "cew/estimators.hpp"
#include "cew/rates.hpp"
#include "cew/regret.hpp"
#include "cew/sampler.hpp"

namespace cew {

enum class LearnerMode { contextew_second, contextew_first, resampling, linexp3, uniform };

LearnerMode parse_learner_mode(const std::string& name);
const char* to_string(LearnerMode mode);

struct LearnerConfig {
  LearnerMode mode = LearnerMode::contextew_second;
  SamplerConfig sampler;
  long covariance_samples = 2000;
  std::optional<double> gamma;  // default 4 ln(10 d K T); +inf disables truncation
  int max_rejects = 100;
  GVariant g_variant = GVariant::main;
  std::optional<ThetaMatrix> optimistic;  // m; second-order mode only

  // Resampling variant.
  double mgr_epsilon = 0.1;
  long mgr_m_cap = 100000;
  std::optional<double> mgr_H;  // default T

  // LinExp3 baseline.
  double linexp3_exploration = 0.01;
  std::optional<double> linexp3_eta;  // default sqrt(ln K / (3 d K T sigma^2))
};

// Bandit learner: sees x_t, returns an arm, then sees only that arm's loss.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual int act(const ContextVector& x) = 0;
  virtual void feed(double loss) = 0;

  // Learner-side fields (action, loss, eta, flags, diagnostics). Comparator
  // columns are filled by the harness, which knows the parameters.
  const RegretTrace& trace() const { return trace_; }
  RegretTrace& trace() { return trace_; }

 protected:
  RegretTrace trace_;
};

// Snapshot of a continuous-exponential-weights learner between rounds.
struct LearnerSnapshot {
  ThetaMatrix cumulative;
  ThetaMatrix optimistic;
  double eta = 0.0;  // step size the next round would use
  double gamma = 0.0;
  long round = 0;
};

class ContinuousWeightsLearner : public Learner {
 public:
  virtual LearnerSnapshot snapshot() const = 0;
  virtual const RateState& rates() const = 0;
};

std::unique_ptr<Learner> make_learner(const ProblemDims& dims, const LearnerConfig& cfg,
                                      const ContextDistribution& contexts, std::uint64_t seed,
                                      std::uint64_t replication);

double default_linexp3_eta(const ProblemDims& dims);

}  // namespace cew
