#pragma once

#include <vector>

#include "cew/types.hpp"

namespace cew {

// Main: G = 8 sqrt(V ln(2T^2) + 144 ln^2 T) + 176 ln T.
// Alternate: G = 8 sqrt(2 V ln T + 144 ln^2 T) + 176 ln T.
enum class GVariant { main, alternate };

double default_gamma(const ProblemDims& dims);  // 4 ln(10 d K T)
double g_term(double v_hat, long T, GVariant variant = GVariant::main);
double h_term(double l_hat, long T);  // 8 sqrt(2 L ln T + 40 ln^2 T) + 72 ln T

// (100 d K gamma^2 + d (V + 1 + G(V)))^{-1/2}
double second_order_eta(double V_hat_prev, const ProblemDims& dims, double gamma,
                        GVariant variant = GVariant::main);
// (100 d gamma^2 + d K (L + 1 + H(L)))^{-1/2}; throws for L < 0.
double first_order_eta(double L_hat_prev, const ProblemDims& dims, double gamma);
// 0.1 (2 d K (L + 1 + G(L)))^{-1/2}; throws for L < 0.
double resampling_eta(double L_hat_prev, const ProblemDims& dims,
                      GVariant variant = GVariant::main);

enum class BoundKind { variance, loss };

// variance: V + 8 sqrt(V l + 72 l^2) + 88 l
// loss:     L + 8 sqrt(L l + 20 l^2) + 36 l
double freedman_bound(double hat_sum, double ln_inv_delta, BoundKind kind);

// eta^2 d sigma^2 (4 / lambda^2) ln^2(1 / (eps lambda)) <= 1/100.
double resampling_variance_term(double eta, const ProblemDims& dims, double lambda,
                                double epsilon);

enum class RateSchedule { second_order, first_order, resampling, constant };

// Running V_hat / L_hat with the step-size history. next_eta() refuses to
// return a value larger than the previous one.
class RateState {
 public:
  RateState(RateSchedule schedule, const ProblemDims& dims, double gamma,
            GVariant variant = GVariant::main, double constant_eta = 0.0);

  double next_eta();
  // Adds (loss - prediction)^2 to V_hat and loss to L_hat.
  void observe(double loss, double prediction);

  double V_hat() const { return V_hat_; }
  double L_hat() const { return L_hat_; }
  double gamma() const { return gamma_; }
  const std::vector<double>& eta_history() const { return eta_history_; }
  // eta the next round would use, without recording it.
  double peek_eta() const;

 private:
  RateSchedule schedule_;
  ProblemDims dims_;
  double gamma_;
  GVariant variant_;
  double constant_eta_;
  double V_hat_ = 0.0;
  double L_hat_ = 0.0;
  std::vector<double> eta_history_;
};

}  // namespace cew
