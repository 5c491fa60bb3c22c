#pragma once

#include <span>
#include <vector>

#include "cew/types.hpp"

namespace cew {

// Costs shifted so the minimum is zero. `order` lists arms with the
// minimising arm last (others keep their original order).
struct ReducedCosts {
  Vector shifted;          // original arm order, min entry == 0
  std::vector<int> order;  // order.back() == argmin
  double shift = 0.0;

  Vector permuted() const;   // shifted[order[i]]
  Vector unreduced() const;  // shifted + shift
};

ReducedCosts reduce_costs(const CostVector& c);

struct PartialFractionGroup {
  double cost = 0.0;
  int multiplicity = 0;
  std::vector<double> coeffs;  // b_1 .. b_multiplicity
};

// 1 / prod_a (s + c_a) = sum_g sum_j b_gj / (s + c_g)^j, groups sorted by
// strictly decreasing cost.
struct PartialFractionTable {
  std::vector<PartialFractionGroup> groups;

  int arms() const;
  // Convolution of exp(-c_a q) over all arms evaluated at zeta.
  double evaluate(double zeta) const;
  // max |b_gj| exp(-c_g) / value at 1; large means cancellation.
  double conditioning() const;
};

inline constexpr double kGroupTolerance = 1e-9;
inline constexpr double kConditioningLimit = 1e12;

// Partial-fraction table for arbitrary finite costs. Costs closer than
// group_tol are merged into one repeated pole.
PartialFractionTable partial_fraction_table(std::span<const double> costs,
                                            double group_tol = kGroupTolerance);

struct ZResult {
  double Z = 0.0;
  PartialFractionTable table;
  double conditioning = 0.0;
  bool used_quadrature = false;
};

// Z for reduced costs (all >= 0, min == 0). Falls back to quadrature when the
// table is ill-conditioned and K <= 6; throws NumericalError beyond that.
ZResult z_partial_fraction(const CostVector& reduced, double group_tol = kGroupTolerance);

// Normaliser of the scaled sub-simplex with total budget zeta in [0, 1].
double subsimplex_z(const PartialFractionTable& table, double zeta);

// Nested Gauss-Legendre panels over the simplex, checked 20 vs 30 points; K <= 6.
double z_quadrature(const CostVector& c, double tol);

// (n-1)! for n >= 1 from a lookup table.
double gamma_int(int n);

}  // namespace cew
