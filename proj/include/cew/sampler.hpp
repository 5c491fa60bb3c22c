#pragma once

#include <string>

#include "cew/rng.hpp"
#include "cew/types.hpp"

namespace cew {

// exact:       sequential inverse-CDF over the coordinates.
// rejection:   independent truncated exponentials accepted when they fit
//              in the simplex; falls back to `exact` after a proposal cap.
//              Also exact in law, and much cheaper for small K.
// hit_and_run: Markov chain with exact sampling along each chord.
enum class SamplerMethod { exact, rejection, hit_and_run };

SamplerMethod parse_sampler_method(const std::string& name);
const char* to_string(SamplerMethod m);

struct SamplerConfig {
  SamplerMethod method = SamplerMethod::rejection;
  int hr_steps = 2000;
  int hr_burnin = 500;
  double inverse_cdf_tol = 1e-10;
  double clip_floor = 0.0;
  int exact_max_arms = 16;
  int rejection_proposals = 64;

  void validate(int K) const;
};

// exp(-<q, c>).
double density_unnormalized(const SimplexPoint& q, const CostVector& c);

// Draws from p(q) proportional to exp(-<q, c>) on the simplex (or the clipped
// simplex when cfg.clip_floor > 0). Allocation-free after warm-up; one
// instance per thread.
class PolicySampler {
 public:
  explicit PolicySampler(SamplerConfig cfg = {});

  const SamplerConfig& config() const { return cfg_; }
  void draw(const CostVector& c, Rng& rng, Vector& q);

  // Counters for diagnostics.
  long sequential_fallbacks() const { return sequential_fallbacks_; }
  long ill_conditioned() const { return ill_conditioned_; }

 private:
  void draw_plain(const CostVector& c, Rng& rng, Vector& u);
  bool draw_sequential(const CostVector& c, Rng& rng, Vector& u);
  bool draw_rejection(const CostVector& c, Rng& rng, Vector& u, int max_proposals);
  void draw_hit_and_run(const CostVector& c, Rng& rng, Vector& u);

  SamplerConfig cfg_;
  Vector scaled_, rates_, norm_, dir_, y_;
  long sequential_fallbacks_ = 0;
  long ill_conditioned_ = 0;
};

SimplexPoint sample_exact(const CostVector& c, Rng& rng, const SamplerConfig& cfg = {});
SimplexPoint sample_hit_and_run(const CostVector& c, const SamplerConfig& cfg, Rng& rng);
SimplexPoint sample_rejection(const CostVector& c, Rng& rng, const SamplerConfig& cfg = {});

// Offset in [0, length] with density proportional to exp(-rate * s).
double truncated_exponential(double rate, double length, double u);

struct TruncatedDraw {
  SimplexPoint q;
  int rejections = 0;
  bool forced_accept = false;
  double statistic = 0.0;
};

// Rejection loop: redraw until sum_a q_a^2 x^T S_a^{-1} x <= d K gamma^2 where
// S = sigma_inverse^{-1} is the untruncated covariance. gamma = +inf accepts
// everything. After max_rejects rejections the last draw is returned with
// forced_accept set.
TruncatedDraw sample_truncated(const CostVector& c, const BlockCovariance& sigma_inverse,
                               const ContextVector& x, double gamma, int max_rejects,
                               PolicySampler& sampler, Rng& rng);

// Convenience overload taking the covariance itself.
TruncatedDraw sample_truncated(const CostVector& c, const BlockCovariance& sigma,
                               const ContextVector& x, double gamma, int max_rejects,
                               Rng& rng, const SamplerConfig& cfg);

// sum_a q_a^2 x^T B_a x for precomputed inverse blocks B_a.
double truncation_statistic(const Vector& q, const ContextVector& x,
                            const BlockCovariance& sigma_inverse);

}  // namespace cew
