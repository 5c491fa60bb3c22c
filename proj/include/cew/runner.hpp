#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cew/config.hpp"
#include "cew/learner.hpp"
#include "cew/regret.hpp"

namespace cew {

inline constexpr const char* kTraceHeader =
    "t,action,loss,comparator_loss,cum_loss,cum_regret,eta,rejections,flag_forced_accept,"
    "flag_mgr_capped";
inline constexpr int kTraceSchemaVersion = 1;

// Called after feed() of every round; the learner may be inspected.
using RoundObserver = std::function<void(long t, const Learner& learner, const ThetaMatrix& theta)>;

struct ReplicationResult {
  int replication = 0;
  RegretTrace trace;  // comparator columns filled
  std::vector<ThetaMatrix> theta_history;
  double final_regret = 0.0;
};

// One seeded replication, in memory. Errors are rethrown with the
// replication and round prefixed. stop_after > 0 ends the run early; the
// comparator columns are then left empty.
ReplicationResult run_replication(const RunConfig& cfg, int replication,
                                  const RoundObserver& observer = {}, long stop_after = 0);

// Learner state after `round` rounds of replication `replication`, with the
// parameters that were in force at that round.
struct CapturedState {
  LearnerSnapshot snapshot;
  ThetaMatrix theta;
  long round = 0;
};
CapturedState capture_state(const RunConfig& cfg, int replication, long round);

// Rebuilds everything the estimator uses at the round after `state`:
// untruncated and truncated covariances are re-estimated from S fresh
// samples each (independent batches).
FrozenRoundState freeze_round(const RunConfig& cfg, const CapturedState& state, long S,
                              Rng& rng);

// Checkpoints T/4, T/2, T (each at least 1).
std::vector<long> checkpoints(long T);

struct CheckpointSummary {
  std::string name;  // quarter, half, final
  long t = 0;
  double mean_regret = 0.0;
  double sd_regret = 0.0;  // sample sd; 0 for one replication
  int replications = 0;
};

std::vector<CheckpointSummary> summarize(const std::vector<ReplicationResult>& results, long T);

void write_trace_csv(std::ostream& out, const RegretTrace& trace);
void write_summary_csv(std::ostream& out, const std::vector<CheckpointSummary>& rows);
// t followed by the union of diagnostic keys, sorted; missing entries empty.
void write_diagnostics_csv(std::ostream& out, const RegretTrace& trace);

// CEW_WORKERS if set to a positive integer, else 1.
int default_workers();

struct RunOutput {
  std::vector<ReplicationResult> results;
  std::vector<CheckpointSummary> summary;
  std::vector<std::string> files;
};

// Runs all replications on up to `workers` threads and writes
// <output>/rep_<i>.csv, <output>/summary.csv and optionally
// <output>/diagnostics_rep_<i>.csv. Environment preconditions (second
// moment of the contexts positive definite) are checked first.
RunOutput run(const RunConfig& cfg);

// Smallest eigenvalue of the context second moment; throws ConfigError
// when it is not positive.
double check_context_second_moment(const RunConfig& cfg);

}  // namespace cew
