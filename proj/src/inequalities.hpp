#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "grid.hpp"
#include "solvers.hpp"
#include "weights.hpp"

namespace ideg {

// ---------------------------------------------------------------------------------------
// Hardy-Poincare

/// Degenerate weight p for the Hardy-Poincare inequality
///   int p/(x-x0)^2 w^2 <= C int p (w')^2,  w(0) = w(1) = 0.
class HardyWeight {
 public:
  /// p(x) = |x - x0|^q.
  static HardyWeight distance_power(double x0, double q);
  /// p(x) = (a(x) |x - x0|^4)^{1/3} with q = (4 + theta)/3, the weight the Carleman
  /// estimate feeds into the inequality.
  static HardyWeight carleman_preset(const CoefficientModel& model);

  double operator()(double x) const;
  double q() const noexcept { return q_; }
  double x0() const noexcept { return x0_; }
  const std::string& name() const noexcept { return name_; }

 private:
  HardyWeight() = default;

  double x0_ = 0.5;
  double q_ = 1.5;
  std::string name_;
  std::vector<CoefficientModel> model_;  // empty for distance_power
};

/// 1/((beta - 1)(q - beta)) for beta in (1, q).
double hp_bound_at(double q, double beta);
/// min over beta of the above: attained at beta = (1+q)/2, value 4/(q-1)^2.
double hp_analytic_bound(double q);

struct HPReport {
  std::string weight;
  double q = 0.0;
  double analytic_bound = 0.0;
  double rayleigh_estimate = 0.0;  ///< 1 / smallest generalized eigenvalue
  double battery_max_ratio = 0.0;
  std::vector<double> battery_ratios;  ///< 0 for members that vanish identically
  int grid_N = 0;
  int inverse_iterations = 0;
};

/// Discrete quotient int p/(x-x0)^2 w^2 / int p (w')^2 for a sampled w (length N+1,
/// vanishing at both ends). Mass uses nodal lumping; the node at x0 receives the exact
/// dual-cell integral of the local power model. Stiffness uses p at cell midpoints.
/// Returns 0 for w = 0.
double hp_quotient(const HardyWeight& p, const SpaceTimeGrid& grid, std::span<const double> w);

/// Smallest generalized eigenvalue of the discrete pair by inverse iteration, the
/// random piecewise-cubic battery, and the analytic bound.
/// Throws DomainError if q is outside (1,2); PreconditionError if p/|x-x0|^q fails the
/// sided monotonicity test.
HPReport hp_verify(const HardyWeight& p, const SpaceTimeGrid& grid, int battery_size,
                   std::uint64_t seed);

// ---------------------------------------------------------------------------------------
// Decomposition identity <L+ w, L- w> = distributed terms + boundary terms

struct IdentityTerms {
  // distributed
  double theta_tt = 0.0;     ///< s/2 int phi_tt w^2
  double cubic = 0.0;        ///< s^3 int (2a phi_xx + a' phi_x) a phi_x^2 w^2
  double mixed = 0.0;        ///< -2 s^2 int a phi_x phi_tx w^2
  double gradient = 0.0;     ///< s int (2a^2 phi_xx + a a' phi_x) w_x^2
  // boundary
  double flux_time = 0.0;    ///< int [a w_x w_t]_{x=0}^{1}
  double time_phi_t = 0.0;   ///< -s/2 int [w^2 phi_t]_{t=0}^{T}
  double time_phi_x = 0.0;   ///< s^2/2 int [a phi_x^2 w^2]_{t=0}^{T}
  double space_mixed = 0.0;  ///< int [-s phi_x (a w_x)^2 + s^2 a phi_t phi_x w^2 - s^3 a^2 phi_x^3 w^2]
  double space_flux = 0.0;   ///< int [-s a (a phi_x)_x w w_x]_{x=0}^{1}
  double time_energy = 0.0;  ///< -1/2 int [a w_x^2]_{t=0}^{T}

  double distributed() const noexcept { return theta_tt + cubic + mixed + gradient; }
  double boundary() const noexcept {
    return flux_time + time_phi_t + time_phi_x + space_mixed + space_flux + time_energy;
  }
  double abs_sum() const noexcept;
};

struct IdentityReport {
  double s = 0.0;
  int N = 0;
  int M = 0;
  double left = 0.0;   ///< <L+ w, L- w> from discrete operator applications
  double right = 0.0;  ///< distributed + boundary terms
  IdentityTerms terms;
  /// |left - right| / (|left| + eps)
  double relative_residual = 0.0;
  /// |left - right| / (||L+ w|| ||L- w||); meaningful also when both sides vanish in the
  /// continuum (s = 0).
  double scaled_residual = 0.0;
};

/// Both sides of the decomposition for a sampled w on a grid with horizon T = params.T.
/// L+ w = (a w_x)_x - s phi_t w + s^2 a phi_x^2 w and L- w = w_t - 2 s a phi_x w_x
/// - s (a phi_x)_x w, with (a phi_x)_x = c1 Theta. Requires w = 0 on x in {0,1} and
/// t in {0,T}; throws PreconditionError otherwise.
IdentityReport carleman_identity_check(const CoefficientModel& model,
                                       const WeightParams& params, const Field& w);

/// Manufactured space profiles, all with a double zero at x0 and zero at x = 0, 1.
enum class SpaceProfile {
  Polynomial,  ///< (x-x0)^2 x (1-x)
  Sine,        ///< (x-x0)^2 sin(pi x)
  Skewed       ///< (x-x0)^2 x (1-x) (1+x)
};

const char* to_string(SpaceProfile p) noexcept;
double space_profile(SpaceProfile p, double x0, double x);

/// [t(T-t)]^k (1 + t/T)^{skew} * profile(x).
Field manufactured_field(const SpaceTimeGrid& grid, SpaceProfile profile, int time_exponent,
                         bool time_skew = false);

// ---------------------------------------------------------------------------------------
// Carleman estimate scan over s

struct CarlemanReport {
  std::vector<double> s_values;
  // All integrals are stored divided by exp(log_scale[k]) so that large s never flushes.
  std::vector<double> log_scale;
  std::vector<double> lhs;
  std::vector<double> rhs_source;
  std::vector<double> rhs_boundary;
  std::vector<double> ratio;  ///< lhs / (rhs_source + rhs_boundary); NaN if rhs <= 0
  double fitted_C = 0.0;
  double s0_observed = 0.0;
  bool s0_found = false;
  bool rhs_violation = false;  ///< nonpositive RHS with nonzero LHS somewhere
  double potential_sup_norm = 0.0;

  bool pass() const noexcept { return s0_found && !rhs_violation; }
};

/// Geometric scan grid start, start*ratio, ...
std::vector<double> geometric_s_list(double start, double ratio, int count);

/// Discrete residual h = v_t + (a v_x)_x - c v of a sampled v (central differences in time,
/// one-sided at the ends; conservative stencil in space). Boundary columns are zero.
Field adjoint_residual(const Field& v, const TridiagonalOperator& op,
                       const PotentialModel& potential);

/// Evaluates, for each s,
///   LHS = int int (s Theta a v_x^2 + s^3 Theta^3 (x-x0)^2/a v^2) e^{2 s phi}
///   RHS_source = int int h^2 e^{2 s phi}
///   RHS_boundary = s c1 int [a Theta e^{2 s phi} (x-x0) v_x^2]_{x=0}^{x=1} dt
/// The gradient term uses midpoint differences; boundary v_x is one-sided second order.
/// s0_observed is the smallest scanned s beyond which every step of the ratio is
/// non-increasing within 5% (at least three points); fitted_C is the largest ratio there.
CarlemanReport carleman_scan(const CoefficientModel& model, const WeightParams& params,
                             const PotentialModel& potential, const Field& v, const Field& h,
                             std::span<const double> s_list);

// ---------------------------------------------------------------------------------------
// Caccioppoli

struct CaccioppoliReport {
  std::vector<double> s_values;
  std::vector<double> log_lhs;  ///< log of int int_{omega'} v_x^2 e^{2 s phi}
  double rhs = 0.0;             ///< int int_omega v^2
  std::vector<double> ratio;    ///< lhs / rhs (0 when v = 0)
  std::vector<double> log_ratio;
  double max_ratio = 0.0;
};

/// Geometry: omega' strictly inside omega, x0 outside the closure of omega'.
/// Throws GeometryError otherwise.
CaccioppoliReport caccioppoli_check(const CoefficientModel& model, const WeightParams& params,
                                    const Field& v, const Interval& omega_prime,
                                    const Interval& omega, std::span<const double> s_list);

}  // namespace ideg
