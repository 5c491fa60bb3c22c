#include "cew/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <type_traits>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "cew/errors.hpp"

namespace cew {

namespace {

using Coarse = boost::math::quadrature::gauss<double, 20>;
using Fine = boost::math::quadrature::gauss<double, 30>;
constexpr int kMaxRefinements = 6;

// Nested fixed-order Gauss-Legendre over {s_k + ... + s_{K-1} = zeta}. Each
// level splits its range into equal panels sized by the cost spread, so the
// result is a smooth function of zeta and the outer levels converge.
template <class Rule>
double panel_integral(const std::function<double(double)>& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int j = 0; j < panels; ++j) total += Rule::integrate(f, a + j * h, a + (j + 1) * h);
  return total;
}

int panels_for(double spread, double width, int refine) {
  return std::max(1, static_cast<int>(std::ceil(spread * width / 4.0))) << refine;
}

template <class Rule>
double nested(const CostVector& c, int k, double zeta, double spread, int refine) {
  const int K = static_cast<int>(c.size());
  if (k == K - 1) return std::exp(-c[k] * zeta);
  if (zeta <= 0.0) return 0.0;
  const std::function<double(double)> f = [&](double s) {
    return std::exp(-c[k] * s) * nested<Rule>(c, k + 1, zeta - s, spread, refine);
  };
  return panel_integral<Rule>(f, 0.0, zeta, panels_for(spread, zeta, refine));
}

double spread_of(const CostVector& c) { return c.maxCoeff() - c.minCoeff(); }

// Runs the coarse and fine rules, refining until they agree to tol.
template <class Body>
double checked(Body body, double tol, const char* what) {
  double diff = 0.0;
  for (int r = 0; r <= kMaxRefinements; ++r) {
    const double fine = body(std::true_type{}, r);
    const double coarse = body(std::false_type{}, r);
    if (!std::isfinite(fine)) break;
    diff = std::abs(fine - coarse);
    if (diff <= tol * std::abs(fine) || diff == 0.0) return fine;
  }
  throw NumericalError(fmt::format("{} did not reach tolerance {} (difference {})", what, tol, diff));
}

}  // namespace

void MomentAccumulator::add(const Vector& v) {
  if (!v.allFinite()) throw NumericalError("non-finite Monte-Carlo statistic");
  if (n_ == 0) shift_ = v;
  const Vector dv = v - shift_;
  sum_ += dv;
  sumsq_ += dv.cwiseProduct(dv);
  ++n_;
}

MonteCarloEstimate MomentAccumulator::finish() const {
  if (n_ < 2) throw ConfigError("Monte-Carlo estimate needs n >= 2");
  MonteCarloEstimate out;
  out.n = n_;
  const double n = static_cast<double>(n_);
  const Vector m = sum_ / n;
  out.mean = shift_ + m;
  const Vector var = ((sumsq_ - n * m.cwiseProduct(m)) / (n - 1.0)).cwiseMax(0.0);
  out.se = (var / n).cwiseSqrt();
  return out;
}

MonteCarloEstimate mc_moment(const std::function<Vector(Rng&)>& draw, long n, Rng& rng) {
  if (n < 2) throw ConfigError("mc_moment needs n >= 2");
  Vector first = draw(rng);
  MomentAccumulator acc(static_cast<int>(first.size()));
  acc.add(first);
  for (long i = 1; i < n; ++i) acc.add(draw(rng));
  return acc.finish();
}

double simplex_quadrature(const CostVector& c, double zeta, double tol) {
  const int K = static_cast<int>(c.size());
  if (K < 2) throw ConfigError("simplex quadrature needs K >= 2");
  if (K > 6) throw ConfigError(fmt::format("simplex quadrature limited to K <= 6, got {}", K));
  if (!(zeta >= 0.0 && zeta <= 1.0)) throw std::out_of_range("budget outside [0, 1]");
  if (zeta == 0.0) return 0.0;
  const double spread = spread_of(c);
  auto body = [&](auto fine, int r) {
    using Rule = std::conditional_t<decltype(fine)::value, Fine, Coarse>;
    return nested<Rule>(c, 0, zeta, spread, r);
  };
  return checked(body, tol, "simplex quadrature");
}

double marginal_interval_probability(const CostVector& c, int i, double u0, double u1,
                                     double tol) {
  const int K = static_cast<int>(c.size());
  if (i < 0 || i >= K) throw std::out_of_range("coordinate outside the arms");
  if (!(0.0 <= u0 && u0 <= u1 && u1 <= 1.0)) throw std::out_of_range("interval outside [0, 1]");
  CostVector p(K);
  p[0] = c[i];
  for (int a = 0, k = 1; a < K; ++a)
    if (a != i) p[k++] = c[a];
  const double total = simplex_quadrature(p, 1.0, tol);
  if (u1 == u0) return 0.0;
  const double spread = spread_of(p);
  auto body = [&](auto fine, int r) {
    using Rule = std::conditional_t<decltype(fine)::value, Fine, Coarse>;
    const std::function<double(double)> f = [&](double u) {
      return std::exp(-p[0] * u) * nested<Rule>(p, 1, 1.0 - u, spread, r);
    };
    return panel_integral<Rule>(f, u0, u1, panels_for(spread, u1 - u0, r));
  };
  return checked(body, tol, "marginal quadrature") / total;
}

double simplex_cell_quadrature(const CostVector& c, double a0, double b0, double a1,
                               double b1, double tol) {
  if (c.size() != 3) throw ConfigError("cell quadrature is for K = 3");
  const double spread = spread_of(c);
  // Split the outer range where the inner upper limit changes form.
  std::vector<double> cuts{a0, b0};
  for (double k : {1.0 - b1, 1.0 - a1})
    if (k > a0 && k < b0) cuts.push_back(k);
  std::sort(cuts.begin(), cuts.end());
  auto body = [&](auto fine, int r) {
    using Rule = std::conditional_t<decltype(fine)::value, Fine, Coarse>;
    const std::function<double(double)> inner = [&](double q0) {
      const double top = std::min(b1, 1.0 - q0);
      if (top <= a1) return 0.0;
      const std::function<double(double)> g = [&](double q1) {
        return std::exp(-c[0] * q0 - c[1] * q1 - c[2] * (1.0 - q0 - q1));
      };
      return panel_integral<Rule>(g, a1, top, panels_for(spread, top - a1, r));
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      total += panel_integral<Rule>(inner, cuts[i], cuts[i + 1],
                                    panels_for(spread, cuts[i + 1] - cuts[i], r));
    return total;
  };
  return checked(body, tol, "cell quadrature");
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    const double pi = std::numbers::pi;
    double s = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double m = 2.0 * k - 1.0;
      s += std::exp(-m * m * pi * pi / (8.0 * lambda * lambda));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ConfigError("KS test needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double d = ks_statistic(std::move(a), std::move(b));
  const double en = std::sqrt(na * nb / (na + nb));
  return kolmogorov_survival((en + 0.12 + 0.11 / en) * d);
}

double chi_square_pvalue(const std::vector<double>& observed,
                         const std::vector<double>& expected, int fitted) {
  if (observed.size() != expected.size() || observed.size() < 2)
    throw ConfigError("chi-square needs matching bins (at least two)");
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0)) throw ConfigError("chi-square expected count must be positive");
    const double r = observed[i] - expected[i];
    stat += r * r / expected[i];
  }
  const int dof = static_cast<int>(observed.size()) - 1 - fitted;
  if (dof < 1) throw ConfigError("chi-square has no degrees of freedom");
  return boost::math::gamma_q(0.5 * dof, 0.5 * stat);
}

Matrix dense_inverse(const Matrix& A) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n) throw ConfigError("dense_inverse needs a square matrix");
  Matrix work(n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      work(i, j) = A(i, j);
      work(i, n + j) = (i == j) ? 1.0 : 0.0;
    }
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index piv = col;
    for (Eigen::Index r = col + 1; r < n; ++r)
      if (std::abs(work(r, col)) > std::abs(work(piv, col))) piv = r;
    if (work(piv, col) == 0.0) throw NumericalError("dense_inverse: singular matrix");
    if (piv != col)
      for (Eigen::Index j = 0; j < 2 * n; ++j) std::swap(work(col, j), work(piv, j));
    const double p = work(col, col);
    for (Eigen::Index j = 0; j < 2 * n; ++j) work(col, j) /= p;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = work(r, col);
      if (f == 0.0) continue;
      for (Eigen::Index j = 0; j < 2 * n; ++j) work(r, j) -= f * work(col, j);
    }
  }
  Matrix inv(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) inv(i, j) = work(i, n + j);
  return inv;
}

Matrix symmetric_apply(const Matrix& A, const std::function<double(double)>& f) {
  const Eigen::Index n = A.rows();
  Matrix a = 0.5 * (A + A.transpose());
  Matrix v = Matrix::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = cs * akp - sn * akq;
          a(k, q) = sn * akp + cs * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = cs * apk - sn * aqk;
          a(q, k) = sn * apk + cs * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = cs * vkp - sn * vkq;
          v(k, q) = sn * vkp + cs * vkq;
        }
      }
    }
  }
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) out += f(a(i, i)) * v.col(i) * v.col(i).transpose();
  return out;
}

}  // namespace cew
