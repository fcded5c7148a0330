#include "weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace ideg {

namespace {

constexpr int kTableSubdivisions = 16;

double tau(const WeightParams& p, double t) {
  if (!(t > 0.0 && t < p.T)) throw DomainError("Theta is infinite outside (0, T)");
  return t * (p.T - t);
}

// Trapezoid of (y - x0)/a(y) over [lo, hi] with kTableSubdivisions panels.
double trapezoid_b(const CoefficientModel& m, double lo, double hi) {
  const double x0 = m.x0();
  auto f = [&](double y) { return (y - x0) / m.a(y); };
  const double step = (hi - lo) / kTableSubdivisions;
  double sum = 0.5 * (f(lo) + f(hi));
  for (int k = 1; k < kTableSubdivisions; ++k) sum += f(lo + k * step);
  return sum * step;
}

}  // namespace

double c2_min(const CoefficientModel& model) {
  const double a0 = model.a(0.0);
  const double a1 = model.a(1.0);
  if (!(a0 > 0.0) || !(a1 > 0.0))
    throw InvalidModelError("a must not vanish at the endpoints");
  const double x0 = model.x0();
  const double k = 2.0 - model.K();
  return std::max((1.0 - x0) * (1.0 - x0) / (a1 * k), x0 * x0 / (a0 * k));
}

double theta(const WeightParams& params, double t) {
  return std::pow(tau(params, t), -kThetaExponent);
}

double theta_dot(const WeightParams& params, double t) {
  const double tt = tau(params, t);
  return -kThetaExponent * std::pow(tt, -kThetaExponent - 1) * (params.T - 2.0 * t);
}

double theta_ddot(const WeightParams& params, double t) {
  const double tt = tau(params, t);
  const double d = params.T - 2.0 * t;
  const int k = kThetaExponent;
  return k * (k + 1) * std::pow(tt, -k - 2) * d * d + 2.0 * k * std::pow(tt, -k - 1);
}

CarlemanWeight::CarlemanWeight(const CoefficientModel& model, const WeightParams& params)
    : model_(model), params_(params) {
  if (!(params.T > 0.0)) throw InvalidModelError("weight.T must be positive");
  if (!(params.c1 > 0.0)) throw InvalidModelError("weight.c1 must be positive");
  if (!(params.s >= 0.0)) throw InvalidModelError("s must be nonnegative");
  const double bound = c2_min(model);
  if (!(params.c2 > bound))
    throw InvalidModelError("weight.c2 must exceed c2_min = " + std::to_string(bound));
  if (std::holds_alternative<Tabulated>(model_.kind())) build_table_integral();
}

CarlemanWeight CarlemanWeight::with_s(double s) const {
  CarlemanWeight w = *this;
  if (!(s >= 0.0)) throw InvalidModelError("s must be nonnegative");
  w.params_.s = s;
  return w;
}

void CarlemanWeight::build_table_integral() {
  const auto& t = std::get<Tabulated>(model_.kind());
  const std::size_t n = t.nodes.size();
  const double x0 = model_.x0();
  b_nodes_.assign(n, 0.0);
  const auto k0 = static_cast<std::size_t>(
      std::find(t.nodes.begin(), t.nodes.end(), x0) - t.nodes.begin());
  const double K = model_.K();
  // Cells adjacent to x0: local model a = A |x-x0|^K with A from the neighbouring sample.
  auto local = [&](std::size_t k) {
    const double d = std::abs(t.nodes[k] - x0);
    return d * d / (t.a_values[k] * (2.0 - K));
  };
  if (k0 + 1 < n) {
    b_nodes_[k0 + 1] = local(k0 + 1);
    for (std::size_t k = k0 + 2; k < n; ++k)
      b_nodes_[k] = b_nodes_[k - 1] + trapezoid_b(model_, t.nodes[k - 1], t.nodes[k]);
  }
  if (k0 >= 1) {
    b_nodes_[k0 - 1] = local(k0 - 1);
    for (std::size_t k = k0 - 1; k-- > 0;)
      b_nodes_[k] = b_nodes_[k + 1] - trapezoid_b(model_, t.nodes[k], t.nodes[k + 1]);
  }
}

double CarlemanWeight::b(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("b: x outside [0,1]");
  const double x0 = model_.x0();
  const double d = std::abs(x - x0);
  if (const auto* p = std::get_if<PowerLaw>(&model_.kind()))
    return std::pow(d, 2.0 - p->alpha) / (2.0 - p->alpha);
  if (const auto* u = std::get_if<Uniform>(&model_.kind())) return d * d / (2.0 * u->value);

  const auto& t = std::get<Tabulated>(model_.kind());
  if (x == x0) return 0.0;
  auto hi = std::upper_bound(t.nodes.begin(), t.nodes.end(), x);
  auto k = static_cast<std::size_t>(hi - t.nodes.begin());
  if (k == t.nodes.size()) return b_nodes_.back();
  const std::size_t left = k - 1;
  const bool right_of_x0 = x > x0;
  // Inside a cell touching x0: local power model.
  if ((right_of_x0 && t.nodes[left] == x0) || (!right_of_x0 && t.nodes[k] == x0)) {
    const std::size_t far = right_of_x0 ? k : left;
    const double A = t.a_values[far] / std::pow(std::abs(t.nodes[far] - x0), model_.K());
    return std::pow(d, 2.0 - model_.K()) / (A * (2.0 - model_.K()));
  }
  // Accumulate from the cell end nearer to x0.
  if (right_of_x0) return b_nodes_[left] + trapezoid_b(model_, t.nodes[left], x);
  return b_nodes_[k] - trapezoid_b(model_, x, t.nodes[k]);
}

double CarlemanWeight::psi(double x) const { return params_.c1 * (b(x) - params_.c2); }

double CarlemanWeight::a_psi_prime_sq(double x) const {
  return params_.c1 * params_.c1 * model_.distance_sq_over_a(x);
}

double CarlemanWeight::phi(double t, double x) const { return theta(t) * psi(x); }

double CarlemanWeight::log_weight(double t, double x) const {
  if (t == 0.0 || t == params_.T) return -std::numeric_limits<double>::infinity();
  return 2.0 * params_.s * phi(t, x);
}

double CarlemanWeight::exp2s_phi(double t, double x) const {
  if (t == 0.0 || t == params_.T) return 0.0;
  return flushed_exp(log_weight(t, x));
}

double psi(const WeightParams& params, const CoefficientModel& model, double x) {
  return CarlemanWeight(model, params).psi(x);
}

double phi(const WeightParams& params, const CoefficientModel& model, double t, double x) {
  return CarlemanWeight(model, params).phi(t, x);
}

double exp2s_phi(const WeightParams& params, const CoefficientModel& model, double t, double x) {
  return CarlemanWeight(model, params).exp2s_phi(t, x);
}

double flushed_exp(double log_value) noexcept {
  static const double kLogMin = std::log(std::numeric_limits<double>::min());
  if (!(log_value >= kLogMin)) return 0.0;
  return std::exp(log_value);
}

}  // namespace ideg
