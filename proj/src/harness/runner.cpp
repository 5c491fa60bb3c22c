#include "cew/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cew/errors.hpp"

namespace cew {

namespace {

template <class E>
[[noreturn]] void rethrow_with(const E& e, int rep, long t) {
  throw E(fmt::format("replication {}, round {}: {}", rep, t, e.what()));
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

double check_context_second_moment(const RunConfig& cfg) {
  Rng rng(cfg.seed, 0, 0, Purpose::environment_check);
  const double lmin =
      second_moment_min_eigenvalue(cfg.env.contexts, rng, cfg.environment_check_samples);
  if (!(lmin > 0.0))
    throw ConfigError(fmt::format(
        "context second moment is singular (smallest eigenvalue {}); covariances cannot be "
        "inverted",
        lmin));
  return lmin;
}

ReplicationResult run_replication(const RunConfig& cfg, int replication,
                                  const RoundObserver& observer, long stop_after) {
  const ProblemDims& dims = cfg.env.dims;
  auto learner = make_learner(dims, cfg.learner, cfg.env.contexts, cfg.seed,
                              static_cast<std::uint64_t>(replication));
  Adversary adversary(cfg.env);
  ReplicationResult out;
  out.replication = replication;
  out.theta_history.reserve(static_cast<std::size_t>(dims.T));

  const long last = stop_after > 0 ? std::min(stop_after, dims.T) : dims.T;
  ContextVector x(dims.d);
  for (long t = 1; t <= last; ++t) {
    try {
      const ThetaMatrix& theta = adversary.theta_for_round(t);
      Rng ctx_rng(cfg.seed, static_cast<std::uint64_t>(replication), static_cast<std::uint64_t>(t),
                  Purpose::context);
      cfg.env.contexts.draw_into(ctx_rng, x);
      if (x.norm() > dims.sigma * (1.0 + 1e-12))
        throw InvariantError(fmt::format("context norm {} > sigma", x.norm()));
      const int a = learner->act(x);
      const double loss = evaluate_loss(x, theta, a);
      learner->feed(loss);
      adversary.observe(a);
      out.theta_history.push_back(theta);
      if (observer) observer(t, *learner, theta);
    } catch (const ConfigError& e) {
      rethrow_with(e, replication, t);
    } catch (const NumericalError& e) {
      rethrow_with(e, replication, t);
    } catch (const InvariantError& e) {
      rethrow_with(e, replication, t);
    }
  }
  out.trace = learner->trace();
  if (last == dims.T) out.final_regret = empirical_regret(out.trace, out.theta_history, dims.T);
  return out;
}

CapturedState capture_state(const RunConfig& cfg, int replication, long round) {
  if (cfg.learner.mode == LearnerMode::linexp3 || cfg.learner.mode == LearnerMode::uniform)
    throw ConfigError("state capture needs a continuous exponential-weights learner");
  if (round < 0 || round >= cfg.env.dims.T)
    throw ConfigError(fmt::format("capture round {} outside [0, T)", round));
  CapturedState out;
  out.round = round;
  if (round == 0) {
    auto learner = make_learner(cfg.env.dims, cfg.learner, cfg.env.contexts, cfg.seed,
                                static_cast<std::uint64_t>(replication));
    out.snapshot = dynamic_cast<const ContinuousWeightsLearner&>(*learner).snapshot();
    Adversary adversary(cfg.env);
    out.theta = adversary.theta_for_round(1);
    return out;
  }
  auto observer = [&](long t, const Learner& learner, const ThetaMatrix& theta) {
    if (t != round) return;
    out.snapshot = dynamic_cast<const ContinuousWeightsLearner&>(learner).snapshot();
    out.theta = theta;
  };
  run_replication(cfg, replication, observer, round);
  return out;
}

FrozenRoundState freeze_round(const RunConfig& cfg, const CapturedState& state, long S,
                              Rng& rng) {
  FrozenRoundState fs;
  fs.costs = CostModel{state.snapshot.cumulative.matrix(), state.snapshot.eta};
  fs.gamma = state.snapshot.gamma;
  fs.max_rejects = cfg.learner.max_rejects;
  fs.sampler = cfg.learner.sampler;
  fs.theta = state.theta;
  fs.optimistic = state.snapshot.optimistic;
  PolicySampler sampler(fs.sampler);
  fs.sigma = estimate_sigma(cfg.env.contexts, fs.costs, sampler, S, false, fs.gamma, rng);
  const BlockCovariance tilde = estimate_sigma(cfg.env.contexts, fs.costs, sampler, S, true,
                                               fs.gamma, rng, &fs.sigma, fs.max_rejects);
  fs.sigma_tilde_inv = invert(tilde);
  return fs;
}

std::vector<long> checkpoints(long T) {
  return {std::max(1L, T / 4), std::max(1L, T / 2), T};
}

std::vector<CheckpointSummary> summarize(const std::vector<ReplicationResult>& results, long T) {
  static const char* names[] = {"quarter", "half", "final"};
  const auto cps = checkpoints(T);
  std::vector<CheckpointSummary> rows;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    CheckpointSummary s;
    s.name = names[i];
    s.t = cps[i];
    s.replications = static_cast<int>(results.size());
    double sum = 0.0;
    for (const auto& r : results) sum += r.trace.rounds.at(cps[i] - 1).cum_regret;
    s.mean_regret = sum / static_cast<double>(results.size());
    if (results.size() > 1) {
      double ss = 0.0;
      for (const auto& r : results) {
        const double dv = r.trace.rounds.at(cps[i] - 1).cum_regret - s.mean_regret;
        ss += dv * dv;
      }
      s.sd_regret = std::sqrt(ss / static_cast<double>(results.size() - 1));
    }
    rows.push_back(s);
  }
  return rows;
}

void write_trace_csv(std::ostream& out, const RegretTrace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.rounds) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{}\n", r.t, r.action + 1, num(r.loss),
               num(r.comparator_loss), num(r.cum_loss), num(r.cum_regret), num(r.eta),
               r.rejections, r.forced_accept ? 1 : 0, r.mgr_capped ? 1 : 0);
  }
}

void write_summary_csv(std::ostream& out, const std::vector<CheckpointSummary>& rows) {
  out << "checkpoint,t,mean_regret,sd_regret,replications\n";
  for (const auto& s : rows)
    fmt::print(out, "{},{},{},{},{}\n", s.name, s.t, num(s.mean_regret), num(s.sd_regret),
               s.replications);
}

void write_diagnostics_csv(std::ostream& out, const RegretTrace& trace) {
  std::set<std::string> keys;
  for (const auto& r : trace.rounds)
    for (const auto& [k, v] : r.diagnostics) keys.insert(k);
  out << 't';
  for (const auto& k : keys) out << ',' << k;
  out << '\n';
  for (const auto& r : trace.rounds) {
    out << r.t;
    for (const auto& k : keys) {
      out << ',';
      if (auto it = r.diagnostics.find(k); it != r.diagnostics.end()) out << num(it->second);
    }
    out << '\n';
  }
}

int default_workers() {
  if (const char* env = std::getenv("CEW_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return 1;
}

RunOutput run(const RunConfig& cfg) {
  cfg.validate();
  check_context_second_moment(cfg);

  namespace fs = std::filesystem;
  fs::create_directories(cfg.output);
  const int n = cfg.replications;
  const int workers = std::max(1, std::min(n, cfg.workers > 0 ? cfg.workers : default_workers()));

  RunOutput out;
  out.results.resize(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};

  auto write_file = [](const fs::path& path, auto&& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::ios_base::failure(fmt::format("cannot write '{}'", path.string()));
    body(f);
    if (!f) throw std::ios_base::failure(fmt::format("write failed for '{}'", path.string()));
  };

  auto worker = [&] {
    for (int rep = next++; rep < n; rep = next++) {
      try {
        ReplicationResult res = run_replication(cfg, rep);
        write_file(fs::path(cfg.output) / fmt::format("rep_{}.csv", rep),
                   [&](std::ostream& f) { write_trace_csv(f, res.trace); });
        if (cfg.write_diagnostics)
          write_file(fs::path(cfg.output) / fmt::format("diagnostics_rep_{}.csv", rep),
                     [&](std::ostream& f) { write_diagnostics_csv(f, res.trace); });
        out.results[static_cast<std::size_t>(rep)] = std::move(res);
      } catch (...) {
        errors[static_cast<std::size_t>(rep)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  out.summary = summarize(out.results, cfg.env.dims.T);
  write_file(fs::path(cfg.output) / "summary.csv",
             [&](std::ostream& f) { write_summary_csv(f, out.summary); });
  for (int rep = 0; rep < n; ++rep) {
    out.files.push_back((fs::path(cfg.output) / fmt::format("rep_{}.csv", rep)).string());
    if (cfg.write_diagnostics)
      out.files.push_back(
          (fs::path(cfg.output) / fmt::format("diagnostics_rep_{}.csv", rep)).string());
  }
  out.files.push_back((fs::path(cfg.output) / "summary.csv").string());
  return out;
}

}  // namespace cew
