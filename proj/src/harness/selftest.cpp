#include "cew/selftest.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cew/errors.hpp"
#include "cew/oracles.hpp"
#include "cew/runner.hpp"

namespace cew {

namespace {

constexpr double kBinTol = 1e-10;

CostVector random_costs(int K, double scale, Rng& rng) {
  CostVector c(K);
  for (int a = 0; a < K; ++a) c[a] = scale * (2.0 * rng.uniform() - 1.0);
  return c;
}

// Adjacent bins merged left to right until each expects at least 5.
void merge_small_bins(std::vector<double>& obs, std::vector<double>& expct) {
  std::vector<double> o, e;
  double so = 0.0, se = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    so += obs[i];
    se += expct[i];
    if (se >= 5.0) {
      o.push_back(so);
      e.push_back(se);
      so = se = 0.0;
    }
  }
  if (se > 0.0 || so > 0.0) {
    if (e.empty()) {
      o.push_back(so);
      e.push_back(se);
    } else {
      o.back() += so;
      e.back() += se;
    }
  }
  obs = std::move(o);
  expct = std::move(e);
}

}  // namespace

SamplerTestReport sampler_self_test(const SamplerTestOptions& opt) {
  if (opt.draws < 2 || opt.bins < 2) throw ConfigError("sampler test needs draws, bins >= 2");
  SamplerTestReport rep;
  SamplerConfig cfg;
  cfg.method = opt.method;

  for (int K : opt.arms) {
    if (K < 2 || K > 6) throw ConfigError(fmt::format("sampler test supports 2 <= K <= 6, got {}", K));
    for (int v = 0; v < opt.vectors_per_arm; ++v) {
      Rng rng(opt.seed, static_cast<std::uint64_t>(K), static_cast<std::uint64_t>(v), Purpose::test);
      SamplerCase sc;
      sc.K = K;
      sc.costs = random_costs(K, opt.cost_scale, rng);
      sc.coordinate = v % K;

      std::vector<double> obs(static_cast<std::size_t>(opt.bins), 0.0);
      PolicySampler sampler(cfg);
      Vector q;
      for (long i = 0; i < opt.draws; ++i) {
        sampler.draw(sc.costs, rng, q);
        const int b = std::min(opt.bins - 1, static_cast<int>(q[sc.coordinate] * opt.bins));
        obs[static_cast<std::size_t>(b)] += 1.0;
      }
      std::vector<double> expct(static_cast<std::size_t>(opt.bins));
      double total = 0.0;
      for (int b = 0; b < opt.bins; ++b) {
        const double p = marginal_interval_probability(
            sc.costs, sc.coordinate, static_cast<double>(b) / opt.bins,
            static_cast<double>(b + 1) / opt.bins, kBinTol);
        expct[static_cast<std::size_t>(b)] = p;
        total += p;
      }
      for (auto& e : expct) e *= static_cast<double>(opt.draws) / total;
      merge_small_bins(obs, expct);
      sc.bins_used = static_cast<int>(obs.size());
      sc.chi_square_p = sc.bins_used >= 2 ? chi_square_pvalue(obs, expct) : 1.0;
      rep.min_marginal_p = std::min(rep.min_marginal_p, sc.chi_square_p);
      rep.marginals.push_back(std::move(sc));
    }

    if (opt.hit_and_run_draws > 0) {
      Rng rng(opt.seed, static_cast<std::uint64_t>(K), 0, Purpose::test, 1);
      SamplerCrossCase cc;
      cc.K = K;
      cc.costs = random_costs(K, opt.cost_scale, rng);
      cc.coordinate = 0;
      SamplerConfig exact_cfg;
      exact_cfg.method = SamplerMethod::exact;
      SamplerConfig hr_cfg;
      hr_cfg.method = SamplerMethod::hit_and_run;
      PolicySampler exact(exact_cfg), hr(hr_cfg);
      std::vector<double> a, b;
      Vector q;
      for (long i = 0; i < opt.draws; ++i) {
        exact.draw(cc.costs, rng, q);
        a.push_back(q[0]);
      }
      for (long i = 0; i < opt.hit_and_run_draws; ++i) {
        hr.draw(cc.costs, rng, q);
        b.push_back(q[0]);
      }
      cc.ks_p = two_sample_ks(std::move(a), std::move(b));
      rep.min_cross_p = std::min(rep.min_cross_p, cc.ks_p);
      rep.cross.push_back(std::move(cc));
    }
  }
  rep.pass = rep.min_marginal_p > opt.alpha && rep.min_cross_p > opt.alpha;
  return rep;
}

BlockCovariance flat_policy_ball_covariance(int K, int d) {
  BlockCovariance s(K, d, CovarianceKind::untruncated);
  // Flat Dirichlet: E[q_a^2] = 2 / (K (K + 1)); unit ball: E[x x^T] = I / (d + 2).
  const double v = 2.0 / (K * (K + 1.0)) / (d + 2.0);
  for (auto& b : s.blocks) b = Matrix::Identity(d, d) * v;
  return s;
}

MgrTestReport mgr_self_test(const MgrTestOptions& opt) {
  if (opt.draws < 2) throw ConfigError("mgr test needs draws >= 2");
  const int K = opt.K, d = opt.d;
  MgrTestReport rep;
  rep.sigma = flat_policy_ball_covariance(K, d);
  rep.params.M = opt.M;
  rep.params.N = opt.N;
  rep.params.M_schedule = opt.M;
  rep.params.c = opt.c;
  rep.params.epsilon = opt.epsilon;
  rep.params.lambda = min_eigenvalue(rep.sigma);
  rep.params.validate();
  rep.expected = mgr_expected_value(rep.sigma, opt.c, opt.N);

  const ContextDistribution contexts = ContextDistribution::uniform_ball(d, 1.0);
  PolicySampler sampler;
  const CostVector zero = CostVector::Zero(K);
  MomentAccumulator acc(K * d * d);
  std::vector<BlockCovariance> draws;
  draws.reserve(static_cast<std::size_t>(opt.draws));
  Vector flat(K * d * d);
  for (long i = 0; i < opt.draws; ++i) {
    Rng rng(opt.seed, 0, static_cast<std::uint64_t>(i), Purpose::mgr);
    auto source = [&](ContextVector& x, Vector& q) {
      contexts.draw_into(rng, x);
      sampler.draw(zero, rng, q);
    };
    BlockCovariance s = mgr_inverse(source, rep.params, K, d);
    for (int a = 0; a < K; ++a)
      flat.segment(a * d * d, d * d) = Eigen::Map<const Vector>(s.blocks[a].data(), d * d);
    acc.add(flat);
    draws.push_back(std::move(s));
  }
  const MonteCarloEstimate est = acc.finish();
  rep.mean_first_block = Eigen::Map<const Matrix>(est.mean.data(), d, d);
  rep.expectation_ok = true;
  for (int a = 0; a < K; ++a) {
    for (int j = 0; j < d * d; ++j) {
      const double m = est.mean[a * d * d + j];
      const double se = est.se[a * d * d + j];
      const double e = rep.expected.blocks[a].data()[j];
      const double z = se > 0.0 ? std::abs(m - e) / se
                                : (std::abs(m - e) <= 1e-12 ? 0.0
                                                            : std::numeric_limits<double>::infinity());
      rep.max_abs_z = std::max(rep.max_abs_z, z);
    }
  }
  rep.expectation_ok = rep.max_abs_z <= 4.0;
  rep.property = mgr_property_check(draws, rep.sigma, rep.params, opt.T);
  rep.bound_violations = rep.property.bound_violations;
  return rep;
}

ZEvalReport z_eval(const CostVector& c, double quad_tol) {
  if (c.size() < 2) throw ConfigError("z-eval needs at least two costs");
  ZEvalReport rep;
  const ReducedCosts red = reduce_costs(c);
  rep.shift = red.shift;
  rep.pf = z_partial_fraction(red.shifted);
  rep.Z = std::exp(-red.shift) * rep.pf.Z;
  if (c.size() <= 6) {
    rep.quadrature = simplex_quadrature(c, 1.0, quad_tol);
    rep.rel_diff = std::abs(rep.Z - rep.quadrature) / rep.quadrature;
  } else {
    rep.quadrature = std::numeric_limits<double>::quiet_NaN();
    rep.rel_diff = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

DiagnoseReport diagnose(const RunConfig& cfg, const DiagnoseOptions& opt) {
  DiagnoseReport rep;
  rep.round = opt.round > 0 ? opt.round : cfg.env.dims.T / 2;
  const CapturedState state = capture_state(cfg, 0, rep.round);
  Rng rng(cfg.seed, 0, static_cast<std::uint64_t>(rep.round), Purpose::diagnostics);
  const FrozenRoundState fs = freeze_round(cfg, state, opt.S, rng);
  Rng ghost_rng = rng.split(7);
  rep.ghost = ghost_identity_check(fs, cfg.env.contexts, argmin_comparator(fs.theta), opt.n,
                                   ghost_rng);
  rep.sandwich = sandwich_check(fs.sigma, invert(fs.sigma_tilde_inv));
  rep.sandwich_ok = rep.sandwich.lower >= opt.sandwich_lo && rep.sandwich.upper <= opt.sandwich_hi;
  rep.pass = rep.ghost.pass && rep.sandwich_ok;
  return rep;
}

}  // namespace cew
