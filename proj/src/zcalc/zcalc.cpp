#include "cew/zcalc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "cew/errors.hpp"
#include "cew/oracles.hpp"

namespace cew {

namespace {

constexpr int kMaxFactorial = 171;

const std::array<double, kMaxFactorial>& factorials() {
  static const std::array<double, kMaxFactorial> table = [] {
    std::array<double, kMaxFactorial> f{};
    f[0] = 1.0;
    for (int i = 1; i < kMaxFactorial; ++i) f[i] = f[i - 1] * i;
    return f;
  }();
  return table;
}

// Coefficients (ascending powers) of p(v) * (v + r).
void multiply_linear(std::vector<double>& p, double r) {
  p.push_back(0.0);
  for (std::size_t k = p.size() - 1; k > 0; --k) p[k] = p[k - 1] + r * p[k];
  p[0] *= r;
}

}  // namespace

double gamma_int(int n) {
  if (n < 1 || n > kMaxFactorial)
    throw std::out_of_range(fmt::format("gamma_int: n = {} outside the table", n));
  return factorials()[n - 1];
}

Vector ReducedCosts::permuted() const {
  Vector p(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) p[static_cast<Eigen::Index>(i)] = shifted[order[i]];
  return p;
}

Vector ReducedCosts::unreduced() const { return shifted.array() + shift; }

ReducedCosts reduce_costs(const CostVector& c) {
  if (c.size() < 1) throw ConfigError("empty cost vector");
  if (!c.allFinite()) throw ConfigError("cost vector has non-finite entries");
  Eigen::Index argmin = 0;
  const double m = c.minCoeff(&argmin);
  ReducedCosts out;
  out.shift = m;
  out.shifted = c.array() - m;
  out.shifted[argmin] = 0.0;
  for (int a = 0; a < c.size(); ++a)
    if (a != argmin) out.order.push_back(a);
  out.order.push_back(static_cast<int>(argmin));
  return out;
}

int PartialFractionTable::arms() const {
  int k = 0;
  for (const auto& g : groups) k += g.multiplicity;
  return k;
}

double PartialFractionTable::evaluate(double zeta) const {
  double total = 0.0;
  for (const auto& g : groups) {
    const double e = std::exp(-g.cost * zeta);
    double power = 1.0;
    double inner = 0.0;
    for (int j = 1; j <= g.multiplicity; ++j) {
      inner += g.coeffs[j - 1] * power / gamma_int(j);
      power *= zeta;
    }
    total += inner * e;
  }
  return total;
}

double PartialFractionTable::conditioning() const {
  const double z = evaluate(1.0);
  double worst = 0.0;
  for (const auto& g : groups)
    for (double b : g.coeffs) worst = std::max(worst, std::abs(b) * std::exp(-g.cost));
  return z > 0.0 ? worst / z : std::numeric_limits<double>::infinity();
}

PartialFractionTable partial_fraction_table(std::span<const double> costs, double group_tol) {
  const int K = static_cast<int>(costs.size());
  if (K < 1) throw ConfigError("partial fractions need at least one cost");
  std::vector<double> sorted(costs.begin(), costs.end());
  for (double c : sorted)
    if (!std::isfinite(c)) throw ConfigError("non-finite cost");
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  // Merge runs that sit within group_tol of the run's first member.
  PartialFractionTable table;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < sorted.size() && sorted[i] - sorted[j] <= group_tol) sum += sorted[j++];
    PartialFractionGroup g;
    g.cost = sum / static_cast<double>(j - i);
    g.multiplicity = static_cast<int>(j - i);
    table.groups.push_back(std::move(g));
    i = j;
  }

  const int G = static_cast<int>(table.groups.size());
  if (G == 1) {
    auto& g = table.groups[0];
    g.coeffs.assign(g.multiplicity, 0.0);
    g.coeffs.back() = 1.0;
    return table;
  }

  // Work in v = (s + mid) / rho so every pole sits in [-1, 1].
  const double hi = table.groups.front().cost;
  const double lo = table.groups.back().cost;
  const double mid = 0.5 * (hi + lo);
  const double rho = 0.5 * (hi - lo);
  std::vector<double> delta(G);
  for (int g = 0; g < G; ++g) delta[g] = (table.groups[g].cost - mid) / rho;

  Matrix A = Matrix::Zero(K, K);
  int col = 0;
  for (int g = 0; g < G; ++g) {
    const int dg = table.groups[g].multiplicity;
    for (int j = 1; j <= dg; ++j, ++col) {
      std::vector<double> p{1.0};
      for (int r = 0; r < dg - j; ++r) multiply_linear(p, delta[g]);
      for (int h = 0; h < G; ++h) {
        if (h == g) continue;
        for (int r = 0; r < table.groups[h].multiplicity; ++r) multiply_linear(p, delta[h]);
      }
      for (std::size_t k = 0; k < p.size(); ++k) A(static_cast<Eigen::Index>(k), col) = p[k];
    }
  }
  Vector rhs = Vector::Zero(K);
  rhs[0] = 1.0;
  const Vector sol = A.fullPivLu().solve(rhs);

  col = 0;
  for (auto& g : table.groups) {
    g.coeffs.resize(g.multiplicity);
    for (int j = 1; j <= g.multiplicity; ++j, ++col)
      g.coeffs[j - 1] = sol[col] * std::pow(rho, j - K);
  }
  return table;
}

ZResult z_partial_fraction(const CostVector& reduced, double group_tol) {
  if (reduced.size() < 2) throw ConfigError("Z needs K >= 2");
  if (!reduced.allFinite()) throw ConfigError("non-finite cost");
  if (reduced.minCoeff() < 0.0 || reduced.minCoeff() > group_tol)
    throw ConfigError("z_partial_fraction expects reduced costs (min 0, all >= 0)");
  ZResult out;
  out.table = partial_fraction_table(std::span<const double>(reduced.data(), reduced.size()),
                                     group_tol);
  out.Z = out.table.evaluate(1.0);
  out.conditioning = out.table.conditioning();
  if (!(out.conditioning <= kConditioningLimit) || !(out.Z > 0.0)) {
    if (reduced.size() > 6)
      throw NumericalError(fmt::format(
          "partial fractions ill-conditioned (ratio {:.3g}) and K = {} is too large for "
          "quadrature",
          out.conditioning, reduced.size()));
    out.Z = z_quadrature(reduced, 1e-10);
    out.used_quadrature = true;
  }
  return out;
}

double subsimplex_z(const PartialFractionTable& table, double zeta) {
  if (!(zeta >= 0.0 && zeta <= 1.0))
    throw std::out_of_range(fmt::format("budget {} outside [0, 1]", zeta));
  if (zeta == 0.0 && table.arms() >= 2) return 0.0;
  return table.evaluate(zeta);
}

double z_quadrature(const CostVector& c, double tol) {
  return simplex_quadrature(c, 1.0, tol);
}

}  // namespace cew
