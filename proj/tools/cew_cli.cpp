#include <cmath>
#include <cstdint>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cew/config.hpp"
#include "cew/errors.hpp"
#include "cew/runner.hpp"
#include "cew/selftest.hpp"

namespace {

using namespace cew;

// Exit codes: 0 ok, 1 a check failed or the run errored, 2 usage / input.
constexpr int kFailed = 1;
constexpr int kUsage = 2;

std::vector<int> parse_arms(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_vector(text)) {
    if (v != static_cast<int>(v)) throw ConfigError(fmt::format("'{}' is not an integer", v));
    out.push_back(static_cast<int>(v));
  }
  return out;
}

int cmd_run(const std::string& path, const std::string& output, int workers, int replications) {
  RunConfig cfg = load_config(path);
  if (!output.empty()) cfg.output = output;
  if (workers > 0) cfg.workers = workers;
  if (replications > 0) cfg.replications = replications;
  const RunOutput out = run(cfg);
  for (const auto& s : out.summary)
    fmt::print("{:<8} t={:<8} mean_regret={:.6g} sd={:.6g} (n={})\n", s.name, s.t, s.mean_regret,
               s.sd_regret, s.replications);
  fmt::print("wrote {} files to {}\n", out.files.size(), cfg.output);
  return 0;
}

int cmd_sample_test(const SamplerTestOptions& opt) {
  const SamplerTestReport rep = sampler_self_test(opt);
  for (const auto& c : rep.marginals)
    fmt::print("marginal K={} coord={} bins={} chi2_p={:.4g}\n", c.K, c.coordinate + 1,
               c.bins_used, c.chi_square_p);
  for (const auto& c : rep.cross)
    fmt::print("exact-vs-hit-and-run K={} coord={} ks_p={:.4g}\n", c.K, c.coordinate + 1, c.ks_p);
  fmt::print("min marginal p = {:.4g}, min cross p = {:.4g} (alpha {})\n", rep.min_marginal_p,
             rep.min_cross_p, opt.alpha);
  fmt::print("{}\n", rep.pass ? "PASS" : "FAIL");
  return rep.pass ? 0 : kFailed;
}

int cmd_mgr_test(const MgrTestOptions& opt) {
  const MgrTestReport rep = mgr_self_test(opt);
  fmt::print("d={} K={} N={} M={} c={} draws={} lambda={:.6g}\n", opt.d, opt.K, opt.N, opt.M,
             opt.c, opt.draws, rep.params.lambda);
  fmt::print("expectation: max |mean - target| / SE = {:.3f} ({})\n", rep.max_abs_z,
             rep.expectation_ok ? "ok" : "FAIL");
  fmt::print("norm bound {:.6g}: {} violations in {} draws\n", mgr_norm_bound(rep.params),
             rep.bound_violations, rep.property.draws);
  fmt::print("||mean - Sigma^-1|| = {:.6g} (eps {} + 4 SE {:.3g}): {}\n",
             rep.property.mean_error_norm, opt.epsilon, 4.0 * rep.property.mean_error_se,
             rep.property.mean_ok ? "ok" : "exceeds");
  const bool pass = rep.expectation_ok && rep.bound_violations == 0;
  fmt::print("{}\n", pass ? "PASS" : "FAIL");
  return pass ? 0 : kFailed;
}

int cmd_z_eval(const std::string& costs, double tol) {
  const CostVector c = parse_vector(costs);
  const ZEvalReport rep = z_eval(c, 1e-12);
  fmt::print("Z = {:.12g}\n", rep.Z);
  fmt::print("shift = {:.12g}, reduced Z = {:.12g}, conditioning = {:.3g}{}\n", rep.shift,
             rep.pf.Z, rep.pf.conditioning, rep.pf.used_quadrature ? " (quadrature fallback)" : "");
  for (const auto& g : rep.pf.table.groups) {
    fmt::print("  pole {:.12g} x{}:", g.cost, g.multiplicity);
    for (double b : g.coeffs) fmt::print(" {:.12g}", b);
    fmt::print("\n");
  }
  if (std::isnan(rep.quadrature)) {
    fmt::print("quadrature cross-check skipped (K > 6)\n");
    return 0;
  }
  const bool ok = rep.rel_diff <= tol;
  fmt::print("quadrature Z = {:.12g}, relative difference = {:.3g} ({})\n", rep.quadrature,
             rep.rel_diff, ok ? "ok" : "FAIL");
  return ok ? 0 : kFailed;
}

int cmd_diagnose(const std::string& path, const DiagnoseOptions& opt) {
  const RunConfig cfg = load_config(path);
  const DiagnoseReport rep = diagnose(cfg, opt);
  fmt::print("frozen state after round {}\n", rep.round);
  fmt::print("ghost identity: lhs {:.6g} +- {:.3g}, rhs {:.6g} +- {:.3g} (n={}): {}\n",
             rep.ghost.lhs_mean, rep.ghost.lhs_se, rep.ghost.rhs_mean, rep.ghost.rhs_se,
             rep.ghost.n, rep.ghost.pass ? "ok" : "FAIL");
  fmt::print("sandwich margins: [{:.4f}, {:.4f}] within [{}, {}]: {}\n", rep.sandwich.lower,
             rep.sandwich.upper, opt.sandwich_lo, opt.sandwich_hi,
             rep.sandwich_ok ? "ok" : "FAIL");
  fmt::print("{}\n", rep.pass ? "PASS" : "FAIL");
  return rep.pass ? 0 : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual exponential-weights bandit simulator"};
  app.require_subcommand(1);

  std::string config, output;
  int workers = 0, replications = 0;
  auto* run = app.add_subcommand("run", "run a configured experiment");
  run->add_option("--config,-c", config, "config file")->required();
  run->add_option("--output,-o", output, "output directory (overrides run.output)");
  run->add_option("--workers,-j", workers, "parallel replications (default CEW_WORKERS or 1)");
  run->add_option("--replications,-n", replications, "override run.replications");

  SamplerTestOptions sopt;
  std::string arms = "2,3,4", method = "exact";
  auto* st = app.add_subcommand("sample-test", "statistical checks of the policy samplers");
  st->add_option("--arms", arms, "comma separated K values")->capture_default_str();
  st->add_option("--vectors", sopt.vectors_per_arm, "cost vectors per K")->capture_default_str();
  st->add_option("--draws", sopt.draws, "draws per cost vector")->capture_default_str();
  st->add_option("--hr-draws", sopt.hit_and_run_draws, "hit-and-run draws per K")
      ->capture_default_str();
  st->add_option("--method", method, "sampler under test: exact, rejection, hit-and-run")
      ->capture_default_str();
  st->add_option("--seed", sopt.seed)->capture_default_str();
  st->add_option("--alpha", sopt.alpha)->capture_default_str();

  MgrTestOptions mopt;
  auto* mt = app.add_subcommand("mgr-test", "resampled inverse covariance checks");
  mt->add_option("--dim", mopt.d)->capture_default_str();
  mt->add_option("--arms", mopt.K)->capture_default_str();
  mt->add_option("--N", mopt.N, "terms per repeat")->capture_default_str();
  mt->add_option("--M", mopt.M, "repeats per estimate")->capture_default_str();
  mt->add_option("--draws", mopt.draws)->capture_default_str();
  mt->add_option("--epsilon", mopt.epsilon)->capture_default_str();
  mt->add_option("--seed", mopt.seed)->capture_default_str();

  std::string costs;
  double ztol = 1e-6;
  auto* ze = app.add_subcommand("z-eval", "normaliser by partial fractions and by quadrature");
  ze->add_option("--costs", costs, "comma separated costs, e.g. 2,1,0")->required();
  ze->add_option("--tol", ztol, "allowed relative difference")->capture_default_str();

  DiagnoseOptions dopt;
  std::string dconfig;
  auto* dg = app.add_subcommand("diagnose", "ghost identity and sandwich checks on a frozen state");
  dg->add_option("--config,-c", dconfig, "config file")->required();
  dg->add_option("--round", dopt.round, "freeze after this round (default T/2)");
  dg->add_option("--samples", dopt.S, "covariance samples")->capture_default_str();
  dg->add_option("--mc", dopt.n, "Monte Carlo size")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (e.get_exit_code() != 0) std::cerr << '\n' << app.help();
    return kUsage;
  }

  try {
    if (*run) return cmd_run(config, output, workers, replications);
    if (*st) {
      sopt.arms = parse_arms(arms);
      sopt.method = parse_sampler_method(method);
      return cmd_sample_test(sopt);
    }
    if (*mt) return cmd_mgr_test(mopt);
    if (*ze) return cmd_z_eval(costs, ztol);
    if (*dg) return cmd_diagnose(dconfig, dopt);
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}
