#include "cew/regret.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "cew/errors.hpp"

namespace cew {

double evaluate_loss(const ContextVector& x, const ThetaMatrix& theta, int a) {
  if (a < 0 || a >= theta.arms())
    throw std::out_of_range(fmt::format("arm {} out of range [0, {})", a, theta.arms()));
  if (x.size() != theta.dim()) throw ConfigError("context / theta dimension mismatch");
  return theta.row(a).dot(x);
}

int comparator_policy(const ThetaMatrix& theta_sum, const ContextVector& x) {
  int best = 0;
  double best_val = theta_sum.row(0).dot(x);
  for (int a = 1; a < theta_sum.arms(); ++a) {
    const double v = theta_sum.row(a).dot(x);
    if (v < best_val) {
      best_val = v;
      best = a;
    }
  }
  return best;
}

double empirical_regret(RegretTrace& trace, const std::vector<ThetaMatrix>& theta_history,
                        long T) {
  if (static_cast<long>(trace.size()) != T || static_cast<long>(theta_history.size()) != T)
    throw ConfigError(fmt::format("incomplete trace: {} rounds, {} parameter sets, T = {}",
                                  trace.size(), theta_history.size(), T));
  if (T == 0) return 0.0;
  ThetaMatrix sum(theta_history[0].arms(), theta_history[0].dim());
  for (const auto& th : theta_history) sum += th;

  double cum_loss = 0.0;
  double cum_regret = 0.0;
  for (long t = 0; t < T; ++t) {
    auto& r = trace.rounds[t];
    const int best = comparator_policy(sum, r.context);
    r.comparator_loss = evaluate_loss(r.context, theta_history[t], best);
    cum_loss += r.loss;
    cum_regret += r.loss - r.comparator_loss;
    r.cum_loss = cum_loss;
    r.cum_regret = cum_regret;
  }
  return cum_regret;
}

}  // namespace cew
