#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "cew/config.hpp"
#include "cew/errors.hpp"
#include "cew/runner.hpp"

using namespace cew;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(
; tiny run
[run]
seed = 11
replications = 3
workers = 2
environment_check_samples = 2000

[dims]
d = 2
K = 3
T = 10

[context]
kind = truncated_gaussian
mean = 0.5, 0.3
variance = 0.04
radius = 1

[adversary]
kind = fixed
theta1 = 0.6, -0.3
theta2 = -0.4, 0.5
theta3 = 0.1, 0.1

[learner]
mode = contextew-second
covariance_samples = 100
)";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cew_harness_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig small(const fs::path& out) {
  RunConfig cfg = parse_config_string(kSmall);
  cfg.output = out.string();
  return cfg;
}

}  // namespace

TEST_CASE("config parsing fills every section") {
  const RunConfig cfg = parse_config_string(kSmall);
  CHECK(cfg.seed == 11);
  CHECK(cfg.replications == 3);
  CHECK(cfg.env.dims.T == 10);
  CHECK(cfg.env.contexts.kind() == ContextKind::truncated_gaussian);
  CHECK(cfg.env.contexts.covariance()(1, 1) == doctest::Approx(0.04));
  CHECK(cfg.env.adversary.theta.matrix()(1, 1) == 0.5);
  CHECK(cfg.learner.covariance_samples == 100);
  CHECK(cfg.learner.mode == LearnerMode::contextew_second);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config errors name the problem") {
  auto fails = [](const std::string& text) {
    CHECK_THROWS_AS(parse_config_string(text), ConfigError);
  };
  fails(std::string(kSmall) + "\n[extra]\nx = 1\n");
  fails(std::string(kSmall) + "\n[run]\nsede = 4\n");
  fails("[dims]\nd = two\n");
  fails("[dims]\nd = 2\nK = 3\nT = 10\n[context]\nkind = cube\n");
  fails("[learner]\nmode = exp4\n");
  fails("[learner]\ngamma = -1\n");
  CHECK(parse_vector("1, -2.5,3e-1")[2] == doctest::Approx(0.3));
  CHECK_THROWS_AS(parse_vector("1,,2"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/cew.ini"), std::ios_base::failure);
}

TEST_CASE("first-order and resampling modes need non-negative losses") {
  for (const char* mode : {"contextew-first", "resampling"}) {
    std::string text = kSmall;
    text.replace(text.find("contextew-second"), 16, mode);
    CHECK_THROWS_AS(parse_config_string(text).validate(), ConfigError);
  }
}

TEST_CASE("default environment is valid") {
  const EnvironmentSpec env = default_environment(100);
  CHECK_NOTHROW(env.validate());
  CHECK(env.dims.d == 2);
  CHECK(env.dims.K == 3);
}

TEST_CASE("checkpoints and summary") {
  CHECK(checkpoints(10) == std::vector<long>{2, 5, 10});
  CHECK(checkpoints(1) == std::vector<long>{1, 1, 1});
}

TEST_CASE("a T = 10 run writes one row per round and a consistent summary") {
  const fs::path dir = scratch("run");
  RunConfig cfg = small(dir);
  cfg.write_diagnostics = true;
  const RunOutput out = run(cfg);
  REQUIRE(out.results.size() == 3);
  for (int r = 0; r < 3; ++r) {
    const auto rows = lines(read_file(dir / fmt::format("rep_{}.csv", r)));
    REQUIRE(rows.size() == 11);
    CHECK(rows[0] == kTraceHeader);
    CHECK(rows[1].rfind("1,", 0) == 0);
    CHECK(fs::exists(dir / fmt::format("diagnostics_rep_{}.csv", r)));
  }
  double mean = 0.0;
  for (const auto& r : out.results) mean += r.final_regret / 3.0;
  const auto& fin = out.summary.back();
  CHECK(fin.name == "final");
  CHECK(fin.t == 10);
  CHECK(fin.replications == 3);
  CHECK(fin.mean_regret == doctest::Approx(mean).epsilon(1e-12));
  const auto summary = lines(read_file(dir / "summary.csv"));
  REQUIRE(summary.size() == 4);
  CHECK(summary[0] == "checkpoint,t,mean_regret,sd_regret,replications");
  fs::remove_all(dir);
}

TEST_CASE("reruns are byte-identical regardless of worker count") {
  const fs::path a = scratch("a"), b = scratch("b");
  RunConfig ca = small(a), cb = small(b);
  cb.workers = 1;
  run(ca);
  run(cb);
  for (int r = 0; r < 3; ++r) {
    const std::string name = fmt::format("rep_{}.csv", r);
    CHECK(read_file(a / name) == read_file(b / name));
  }
  CHECK(read_file(a / "summary.csv") == read_file(b / "summary.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("trace regret columns agree with the recorded losses") {
  const RunConfig cfg = small(scratch("mem"));
  const ReplicationResult res = run_replication(cfg, 1);
  double cum_loss = 0.0, cum_regret = 0.0;
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    const RoundRecord& r = res.trace.rounds[i];
    const ThetaMatrix& th = res.theta_history[i];
    REQUIRE(r.loss == doctest::Approx(th.row(r.action).dot(r.context)));
    REQUIRE(r.comparator_loss ==
            doctest::Approx(th.row(comparator_policy(th, r.context)).dot(r.context)));
    cum_loss += r.loss;
    cum_regret += r.loss - r.comparator_loss;
    REQUIRE(r.cum_loss == doctest::Approx(cum_loss));
    REQUIRE(r.cum_regret == doctest::Approx(cum_regret));
  }
  CHECK(res.final_regret == doctest::Approx(cum_regret));
}

TEST_CASE("captured state matches an early stop") {
  const RunConfig cfg = small(scratch("cap"));
  const CapturedState s = capture_state(cfg, 0, 4);
  CHECK(s.round == 4);
  CHECK(s.snapshot.round == 4);
  const ReplicationResult full = run_replication(cfg, 0);
  CHECK(s.snapshot.eta == doctest::Approx(full.trace.rounds[4].eta));
  Rng rng(5);
  const FrozenRoundState f = freeze_round(cfg, s, 200, rng);
  CHECK(f.sigma.sample_count == 200);
  CHECK(f.gamma == s.snapshot.gamma);
}

TEST_CASE("worker count from the environment") {
  setenv("CEW_WORKERS", "3", 1);
  CHECK(default_workers() == 3);
  setenv("CEW_WORKERS", "zero", 1);
  CHECK(default_workers() == 1);
  unsetenv("CEW_WORKERS");
  CHECK(default_workers() == 1);
}
