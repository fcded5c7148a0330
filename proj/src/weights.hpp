#pragma once

#include <vector>

#include "coefficients.hpp"

namespace ideg {

/// Exponent of the time blow-up factor Theta(t) = [t(T - t)]^{-4}.
inline constexpr int kThetaExponent = 4;

struct WeightParams {
  double T = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double s = 1.0;
};

/// Lower admissibility bound for c2:
/// max{(1-x0)^2 / (a(1)(2-K)), x0^2 / (a(0)(2-K))}.
/// Throws InvalidModelError if a vanishes at an endpoint.
double c2_min(const CoefficientModel& model);

/// Theta(t) = [t(T-t)]^{-4} for 0 < t < T. Throws DomainError at or beyond the endpoints,
/// where the weight is infinite.
double theta(const WeightParams& params, double t);
double theta_dot(const WeightParams& params, double t);
double theta_ddot(const WeightParams& params, double t);

/// The Carleman weight phi(t,x) = Theta(t) psi(x) with
/// psi(x) = c1 [ int_{x0}^x (y-x0)/a(y) dy - c2 ].
///
/// Construction checks T > 0, c1 > 0, s >= 0 and c2 > c2_min(model). The antiderivative
/// b(x) is closed form for power laws and uniform coefficients. Tables use a composite
/// trapezoid rule on each table cell, with the two cells touching x0 integrated through the
/// local model a ~ A |x-x0|^K (A fitted from the nearest sample on each side).
class CarlemanWeight {
 public:
  CarlemanWeight(const CoefficientModel& model, const WeightParams& params);

  const WeightParams& params() const noexcept { return params_; }
  const CoefficientModel& model() const noexcept { return model_; }

  /// Same model and c1, c2, T with a different Carleman parameter.
  CarlemanWeight with_s(double s) const;

  double theta(double t) const { return ideg::theta(params_, t); }
  double theta_dot(double t) const { return ideg::theta_dot(params_, t); }
  double theta_ddot(double t) const { return ideg::theta_ddot(params_, t); }

  /// b(x) = int_{x0}^x (y-x0)/a(y) dy >= 0.
  double b(double x) const;
  double psi(double x) const;
  /// a psi' = c1 (x - x0); bounded everywhere.
  double a_psi_prime(double x) const { return params_.c1 * (x - model_.x0()); }
  /// a (psi')^2 = c1^2 (x-x0)^2 / a, limit 0 at x0.
  double a_psi_prime_sq(double x) const;

  double phi(double t, double x) const;
  /// exp(2 s phi) in (0,1); exactly 0 at t in {0, T} and when 2 s phi underflows.
  double exp2s_phi(double t, double x) const;
  /// 2 s phi(t,x); -infinity at t in {0, T}.
  double log_weight(double t, double x) const;

 private:
  void build_table_integral();

  CoefficientModel model_;
  WeightParams params_;
  // tabulated: cumulative b at table nodes
  std::vector<double> b_nodes_;
};

/// Free-function forms.
double psi(const WeightParams& params, const CoefficientModel& model, double x);
double phi(const WeightParams& params, const CoefficientModel& model, double t, double x);
double exp2s_phi(const WeightParams& params, const CoefficientModel& model, double t, double x);

/// exp(log_value) with flush to exactly 0 below the smallest positive normal double.
double flushed_exp(double log_value) noexcept;

}  // namespace ideg
