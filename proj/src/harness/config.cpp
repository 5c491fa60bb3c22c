#include "cew/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "cew/errors.hpp"

namespace cew {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"run",
       {"seed", "replications", "workers", "output", "diagnostics", "environment_check_samples",
        "preset"}},
      {"dims", {"d", "K", "T", "sigma", "R"}},
      {"context", {"kind", "mean", "covariance", "variance", "radius", "lo", "hi"}},
      {"adversary", {"kind", "rate", "nonnegative"}},  // plus theta<a>, theta_end<a>
      {"sampler",
       {"method", "hr_steps", "hr_burnin", "inverse_cdf_tol", "exact_max_arms",
        "rejection_proposals"}},
      {"learner",
       {"mode", "covariance_samples", "gamma", "max_rejects", "g_variant", "mgr_epsilon",
        "mgr_m_cap", "mgr_H", "linexp3_exploration", "linexp3_eta"}},  // plus optimistic<a>
  };
  return keys;
}

bool is_row_key(const std::string& key, const std::string& prefix) {
  if (key.size() <= prefix.size() || key.compare(0, prefix.size(), prefix) != 0) return false;
  for (std::size_t i = prefix.size(); i < key.size(); ++i)
    if (key[i] < '0' || key[i] > '9') return false;
  return true;
}

void check_keys(const pt::ptree& tree) {
  const auto& known = known_keys();
  for (const auto& [section, body] : tree) {
    auto it = known.find(section);
    if (it == known.end()) throw ConfigError(fmt::format("unknown section [{}]", section));
    for (const auto& [key, value] : body) {
      if (it->second.count(key)) continue;
      if (section == "adversary" && (is_row_key(key, "theta") || is_row_key(key, "theta_end")))
        continue;
      if (section == "learner" && is_row_key(key, "optimistic")) continue;
      throw ConfigError(fmt::format("unknown key '{}' in [{}]", key, section));
    }
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& text, const std::string& key) {
  const std::string s = trim(text);
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, text));
  }
  if (pos != s.size()) throw ConfigError(fmt::format("{}: '{}' is not a number", key, text));
  return v;
}

long to_long(const std::string& text, const std::string& key) {
  const double v = to_double(text, key);
  if (!std::isfinite(v) || v != std::floor(v) || std::fabs(v) > 9.0e15)
    throw ConfigError(fmt::format("{}: '{}' is not an integer", key, text));
  return static_cast<long>(v);
}

bool to_bool(const std::string& text, const std::string& key) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, text));
}

class Section {
 public:
  Section(const pt::ptree& tree, std::string name) : name_(std::move(name)) {
    if (auto child = tree.get_child_optional(name_)) body_ = *child;
  }
  std::optional<std::string> text(const std::string& key) const {
    if (auto v = body_.get_optional<std::string>(key)) return trim(*v);
    return std::nullopt;
  }
  std::string label(const std::string& key) const { return name_ + "." + key; }
  std::optional<double> real(const std::string& key) const {
    if (auto t = text(key)) return to_double(*t, label(key));
    return std::nullopt;
  }
  std::optional<long> integer(const std::string& key) const {
    if (auto t = text(key)) return to_long(*t, label(key));
    return std::nullopt;
  }
  std::optional<bool> flag(const std::string& key) const {
    if (auto t = text(key)) return to_bool(*t, label(key));
    return std::nullopt;
  }
  std::optional<Vector> vec(const std::string& key) const {
    if (auto t = text(key)) {
      try {
        return parse_vector(*t);
      } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", label(key), e.what()));
      }
    }
    return std::nullopt;
  }
  // Rows prefix1 .. prefixK; nullopt when none are present.
  std::optional<ThetaMatrix> rows(const std::string& prefix, int K, int d) const {
    bool any = false;
    for (const auto& [key, value] : body_) any = any || is_row_key(key, prefix);
    if (!any) return std::nullopt;
    Matrix m(K, d);
    for (int a = 0; a < K; ++a) {
      const std::string key = prefix + std::to_string(a + 1);
      auto v = vec(key);
      if (!v) throw ConfigError(fmt::format("missing {}", label(key)));
      if (v->size() != d)
        throw ConfigError(fmt::format("{} has {} entries, expected d = {}", label(key),
                                      v->size(), d));
      m.row(a) = v->transpose();
    }
    for (const auto& [key, value] : body_) {
      if (!is_row_key(key, prefix)) continue;
      const long idx = std::stol(key.substr(prefix.size()));
      if (idx < 1 || idx > K)
        throw ConfigError(fmt::format("{} is outside arms 1..{}", label(key), K));
    }
    return ThetaMatrix(std::move(m));
  }

 private:
  std::string name_;
  pt::ptree body_;
};

template <class T>
T required(const std::optional<T>& v, const Section& s, const std::string& key) {
  if (!v) throw ConfigError(fmt::format("missing {}", s.label(key)));
  return *v;
}

AdversaryKind parse_adversary_kind(const std::string& s) {
  if (s == "fixed") return AdversaryKind::fixed;
  if (s == "drifting") return AdversaryKind::drifting;
  if (s == "punish_most_played") return AdversaryKind::punish_most_played;
  if (s == "punish_last_played") return AdversaryKind::punish_last_played;
  throw ConfigError(fmt::format("unknown adversary kind '{}'", s));
}

GVariant parse_g_variant(const std::string& s) {
  if (s == "main") return GVariant::main;
  if (s == "alternate") return GVariant::alternate;
  throw ConfigError(fmt::format("unknown g_variant '{}'", s));
}

ContextDistribution parse_contexts(const Section& s, const ProblemDims& dims,
                                   const std::optional<ContextDistribution>& preset) {
  const auto kind = s.text("kind");
  if (!kind) {
    if (preset) return *preset;
    throw ConfigError("missing context.kind");
  }
  const int d = dims.d;
  if (*kind == "truncated_gaussian") {
    const Vector mean = s.vec("mean").value_or(Vector::Zero(d));
    Matrix cov;
    if (auto c = s.vec("covariance")) {
      if (c->size() != d * d)
        throw ConfigError(fmt::format("context.covariance needs d*d = {} entries", d * d));
      cov = Eigen::Map<const Matrix>(c->data(), d, d).transpose();
    } else if (auto v = s.vec("variance")) {
      if (v->size() == 1) cov = Matrix::Identity(d, d) * (*v)[0];
      else if (v->size() == d) cov = v->asDiagonal();
      else throw ConfigError("context.variance needs 1 or d entries");
    } else {
      throw ConfigError("truncated_gaussian needs context.covariance or context.variance");
    }
    if (mean.size() != d) throw ConfigError("context.mean must have d entries");
    return ContextDistribution::truncated_gaussian(mean, cov,
                                                   s.real("radius").value_or(dims.sigma));
  }
  if (*kind == "uniform_ball")
    return ContextDistribution::uniform_ball(d, s.real("radius").value_or(dims.sigma));
  if (*kind == "uniform_box") {
    const Vector lo = required(s.vec("lo"), s, "lo");
    const Vector hi = required(s.vec("hi"), s, "hi");
    if (lo.size() != d || hi.size() != d) throw ConfigError("context.lo/hi must have d entries");
    return ContextDistribution::uniform_box(lo, hi);
  }
  throw ConfigError(fmt::format("unknown context kind '{}'", *kind));
}

}  // namespace

Vector parse_vector(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(to_double(item, "vector entry"));
  if (vals.empty()) throw ConfigError("empty vector");
  return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

EnvironmentSpec default_environment(long T) {
  EnvironmentSpec env;
  env.dims = ProblemDims(2, 3, T, 1.0, 1.0);
  Vector mean(2);
  mean << 0.5, 0.3;
  env.contexts = ContextDistribution::truncated_gaussian(mean, Matrix::Identity(2, 2) * 0.04, 1.0);
  Matrix theta(3, 2);
  theta << 0.6, -0.3,
          -0.4, 0.5,
           0.1, 0.1;
  env.adversary.kind = AdversaryKind::fixed;
  env.adversary.theta = ThetaMatrix(theta);
  return env;
}

RunConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config syntax: {} (line {})", e.message(), e.line()));
  }
  check_keys(tree);

  RunConfig cfg;
  const Section run(tree, "run"), dims_s(tree, "dims"), ctx(tree, "context"),
      adv(tree, "adversary"), smp(tree, "sampler"), lrn(tree, "learner");

  std::optional<EnvironmentSpec> preset;
  if (auto p = run.text("preset")) {
    if (*p != "default") throw ConfigError(fmt::format("unknown preset '{}'", *p));
    preset = default_environment(dims_s.integer("T").value_or(10000));
  }

  cfg.seed = static_cast<std::uint64_t>(run.integer("seed").value_or(1));
  cfg.replications = static_cast<int>(run.integer("replications").value_or(1));
  cfg.workers = static_cast<int>(run.integer("workers").value_or(0));
  cfg.output = run.text("output").value_or("out");
  cfg.write_diagnostics = run.flag("diagnostics").value_or(false);
  cfg.environment_check_samples = run.integer("environment_check_samples").value_or(100000);

  auto dim_or = [&](const std::string& key, auto fallback) {
    if (auto v = dims_s.real(key)) return *v;
    if (preset) return static_cast<double>(fallback);
    throw ConfigError(fmt::format("missing dims.{}", key));
  };
  const ProblemDims base = preset ? preset->dims : ProblemDims{};
  const double dd = dim_or("d", base.d), KK = dim_or("K", base.K), TT = dim_or("T", base.T);
  for (auto [name, v] : {std::pair{"d", dd}, {"K", KK}, {"T", TT}})
    if (v != std::floor(v)) throw ConfigError(fmt::format("dims.{} must be an integer", name));
  cfg.env.dims = ProblemDims(static_cast<int>(dd), static_cast<int>(KK), static_cast<long>(TT),
                             dims_s.real("sigma").value_or(preset ? base.sigma : 1.0),
                             dims_s.real("R").value_or(preset ? base.R : 1.0));
  const int d = cfg.env.dims.d, K = cfg.env.dims.K;

  cfg.env.contexts = parse_contexts(
      ctx, cfg.env.dims,
      preset ? std::optional<ContextDistribution>(preset->contexts) : std::nullopt);

  cfg.env.adversary.kind = parse_adversary_kind(adv.text("kind").value_or("fixed"));
  if (auto th = adv.rows("theta", K, d)) cfg.env.adversary.theta = *th;
  else if (preset && preset->adversary.theta.arms() == K && preset->adversary.theta.dim() == d)
    cfg.env.adversary.theta = preset->adversary.theta;
  else throw ConfigError("missing adversary.theta1 .. thetaK");
  if (auto th = adv.rows("theta_end", K, d)) cfg.env.adversary.theta_end = *th;
  if (cfg.env.adversary.kind == AdversaryKind::drifting && cfg.env.adversary.theta_end.arms() == 0)
    throw ConfigError("drifting adversary needs adversary.theta_end1 .. theta_endK");
  cfg.env.adversary.rate = adv.real("rate").value_or(0.0);
  cfg.env.nonnegative = adv.flag("nonnegative").value_or(false);

  SamplerConfig& sc = cfg.learner.sampler;
  if (auto m = smp.text("method")) sc.method = parse_sampler_method(*m);
  sc.hr_steps = static_cast<int>(smp.integer("hr_steps").value_or(sc.hr_steps));
  sc.hr_burnin = static_cast<int>(smp.integer("hr_burnin").value_or(sc.hr_burnin));
  sc.inverse_cdf_tol = smp.real("inverse_cdf_tol").value_or(sc.inverse_cdf_tol);
  sc.exact_max_arms = static_cast<int>(smp.integer("exact_max_arms").value_or(sc.exact_max_arms));
  sc.rejection_proposals =
      static_cast<int>(smp.integer("rejection_proposals").value_or(sc.rejection_proposals));

  LearnerConfig& lc = cfg.learner;
  if (auto m = lrn.text("mode")) lc.mode = parse_learner_mode(*m);
  lc.covariance_samples = lrn.integer("covariance_samples").value_or(lc.covariance_samples);
  lc.gamma = lrn.real("gamma");
  lc.max_rejects = static_cast<int>(lrn.integer("max_rejects").value_or(lc.max_rejects));
  if (auto g = lrn.text("g_variant")) lc.g_variant = parse_g_variant(*g);
  lc.optimistic = lrn.rows("optimistic", K, d);
  lc.mgr_epsilon = lrn.real("mgr_epsilon").value_or(lc.mgr_epsilon);
  lc.mgr_m_cap = lrn.integer("mgr_m_cap").value_or(lc.mgr_m_cap);
  lc.mgr_H = lrn.real("mgr_H");
  lc.linexp3_exploration = lrn.real("linexp3_exploration").value_or(lc.linexp3_exploration);
  lc.linexp3_eta = lrn.real("linexp3_eta");

  cfg.validate();
  return cfg;
}

RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure(fmt::format("cannot open config file '{}'", path));
  return parse_config(in);
}

void RunConfig::validate() const {
  if (replications < 1) throw ConfigError("run.replications must be >= 1");
  if (workers < 0) throw ConfigError("run.workers must be >= 0");
  if (environment_check_samples < 2)
    throw ConfigError("run.environment_check_samples must be >= 2");
  if (output.empty()) throw ConfigError("run.output must not be empty");
  env.validate();
  learner.sampler.validate(env.dims.K);
  if (learner.covariance_samples < 2) throw ConfigError("learner.covariance_samples must be >= 2");
  if (learner.max_rejects < 0) throw ConfigError("learner.max_rejects must be >= 0");
  if (learner.gamma && !(*learner.gamma > 0.0)) throw ConfigError("learner.gamma must be > 0");
  if (!(learner.mgr_epsilon > 0.0 && learner.mgr_epsilon < 1.0))
    throw ConfigError("learner.mgr_epsilon must lie in (0, 1)");
  if (learner.mgr_m_cap < 1) throw ConfigError("learner.mgr_m_cap must be >= 1");
  if (learner.mgr_H && !(*learner.mgr_H >= 1.0)) throw ConfigError("learner.mgr_H must be >= 1");
  if (learner.optimistic && learner.mode != LearnerMode::contextew_second)
    throw ConfigError("learner.optimistic is only used by contextew-second");
  const bool needs_nonnegative = learner.mode == LearnerMode::contextew_first ||
                                 learner.mode == LearnerMode::resampling;
  if (needs_nonnegative && !env.nonnegative)
    throw ConfigError(fmt::format("mode {} needs non-negative losses (adversary.nonnegative = true)",
                                  to_string(learner.mode)));
  if (learner.mode == LearnerMode::linexp3 &&
      !(learner.linexp3_exploration > 0.0 && learner.linexp3_exploration < 1.0))
    throw ConfigError("learner.linexp3_exploration must lie in (0, 1)");
}

}  // namespace cew
