#pragma once

#include <functional>
#include <vector>

#include "cew/rng.hpp"
#include "cew/types.hpp"

// Brute-force reference computations for tests and self-checks. Nothing in
// here calls into the code paths it is used to verify.
namespace cew {

struct MonteCarloEstimate {
  Vector mean;
  Vector se;  // sample sd / sqrt(n), elementwise
  long n = 0;
};

// Streaming mean / standard error of a vector statistic.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(int dim) : sum_(Vector::Zero(dim)), sumsq_(Vector::Zero(dim)) {}
  void add(const Vector& v);
  MonteCarloEstimate finish() const;

 private:
  Vector sum_, sumsq_;
  Vector shift_;
  long n_ = 0;
};

// Mean and SE of statistic(draw(rng)) over n independent draws.
MonteCarloEstimate mc_moment(const std::function<Vector(Rng&)>& draw, long n, Rng& rng);

// Integral of exp(-<q, c>) over {q >= 0, sum q = zeta} (Lebesgue measure on
// the first K-1 coordinates) by nested Gauss-Legendre panels; 20- and
// 30-point rules must agree to tol, else panels are halved. K <= 6.
double simplex_quadrature(const CostVector& c, double zeta, double tol);

// P(q_i in [u0, u1]) under the density proportional to exp(-<q, c>) on the
// unit simplex, by quadrature.
double marginal_interval_probability(const CostVector& c, int i, double u0, double u1,
                                     double tol);

// Two-dimensional integral of exp(-<q, c>) over the K = 3 simplex restricted
// to q_0 in [a0, b0], q_1 in [a1, b1].
double simplex_cell_quadrature(const CostVector& c, double a0, double b0, double a1,
                               double b1, double tol);

// Two-sample Kolmogorov-Smirnov p-value (asymptotic distribution).
double two_sample_ks(std::vector<double> a, std::vector<double> b);
double ks_statistic(std::vector<double> a, std::vector<double> b);
// Asymptotic Kolmogorov survival function Q(lambda).
double kolmogorov_survival(double lambda);

// Pearson chi-square p-value for observed counts against expected counts
// (same total); dof = bins - 1 - fitted.
double chi_square_pvalue(const std::vector<double>& observed,
                         const std::vector<double>& expected, int fitted = 0);

// Gauss-Jordan inverse with partial pivoting.
Matrix dense_inverse(const Matrix& A);

// Symmetric matrix function by Jacobi rotations: returns V diag(f(l)) V^T.
Matrix symmetric_apply(const Matrix& A, const std::function<double(double)>& f);

}  // namespace cew
