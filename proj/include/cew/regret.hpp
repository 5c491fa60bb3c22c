#pragma once

#include <map>
#include <string>
#include <vector>

#include "cew/types.hpp"

namespace cew {

struct RoundRecord {
  long t = 0;  // 1-based round
  int action = -1;
  double loss = 0.0;
  double comparator_loss = 0.0;
  double cum_loss = 0.0;
  double cum_regret = 0.0;
  double eta = 0.0;
  int rejections = 0;
  bool forced_accept = false;
  bool mgr_capped = false;
  ContextVector context;
  std::map<std::string, double> diagnostics;
};

struct RegretTrace {
  std::vector<RoundRecord> rounds;

  std::size_t size() const { return rounds.size(); }
  double final_regret() const { return rounds.empty() ? 0.0 : rounds.back().cum_regret; }
};

// <x, theta_a>; throws std::out_of_range for a bad arm.
double evaluate_loss(const ContextVector& x, const ThetaMatrix& theta, int a);

// argmin_a <x, theta_sum_a>, ties to the lowest index.
int comparator_policy(const ThetaMatrix& theta_sum, const ContextVector& x);

// Fills comparator_loss / cum_regret from the realised parameters and
// returns sum_t [l_t(X_t, A_t) - l_t(X_t, pi*(X_t))]. theta_history[t-1] is
// the matrix in force at round t. Throws if the trace is not length T.
double empirical_regret(RegretTrace& trace, const std::vector<ThetaMatrix>& theta_history,
                        long T);

}  // namespace cew
