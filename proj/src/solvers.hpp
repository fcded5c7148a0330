#pragma once

#include <span>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "grid.hpp"

namespace ideg {

/// Bounded zero-order coefficient c(t,x).
class PotentialModel {
 public:
  enum class Kind { Zero, Constant, Sampled };

  static PotentialModel zero();
  static PotentialModel constant(double value);
  /// Values on the solver grid; the field's grid must match the grid it is used with.
  static PotentialModel sampled(Field values);

  Kind kind() const noexcept { return kind_; }
  std::string kind_name() const;
  double value(int j, int i) const noexcept;
  double sup_norm() const noexcept { return sup_norm_; }
  double infimum() const noexcept { return infimum_; }
  bool time_independent() const noexcept { return kind_ != Kind::Sampled; }
  const Field* samples() const noexcept { return samples_.empty() ? nullptr : &samples_.front(); }

 private:
  PotentialModel(Kind kind, double value, std::vector<Field> samples);

  Kind kind_;
  double constant_ = 0.0;
  std::vector<Field> samples_;  // zero or one element
  double sup_norm_ = 0.0;
  double infimum_ = 0.0;
};

/// Shift lambda that makes c + lambda >= 0: max(0, -inf c).
double default_lambda(const PotentialModel& potential) noexcept;

/// Returns e^{-lambda t} f(t,x). If v solves v_t + (a v_x)_x - c v = 0 then the shifted field
/// solves the same problem with c replaced by c - lambda.
Field apply_lambda_shift(const Field& f, double lambda);

/// Control interval omega = (omega_lo, omega_hi).
struct ControlConfig {
  double omega_lo = 0.0;
  double omega_hi = 1.0;

  /// Node indicator of omega: 1 strictly inside, 1/2 on a node equal to an endpoint,
  /// 0 outside. Trapezoid-consistent.
  std::vector<double> indicator(const SpaceTimeGrid& grid) const;

  /// Throws GeometryError unless 0 < omega_lo < x0 < omega_hi < 1.
  void require_contains(double x0) const;
};

/// Crank-Nicolson time stepping for u_t = (a u_x)_x - c u + h chi forward in time and for
/// the adjoint v_t + (a v_x)_x - c v = h backward in time.
///
/// With L_j = I - dt/2 (A - C_j) and R_j = I + dt/2 (A - C_j), one step reads
///   forward:  u^{j+1} = L_{j+1}^{-1} R_j (u^j + dt/2 chi h^j) + dt/2 chi h^{j+1}
///   adjoint:  v^j     = R_j L_{j+1}^{-1} (v^{j+1} - dt/2 h^{j+1}) - dt/2 h^j
/// Both are second-order Crank-Nicolson steps (one tridiagonal solve each). The adjoint
/// homogeneous propagator is the exact transpose of the forward one, so
///   <u(T), v_T> = <u_0, v(0)> + trapezoid of chi h v
/// holds to round-off for any bounded c, even time-dependent.
class ParabolicSolver {
 public:
  ParabolicSolver(const CoefficientModel& model, PotentialModel potential,
                  const SpaceTimeGrid& grid);

  const SpaceTimeGrid& grid() const noexcept { return grid_; }
  const TridiagonalOperator& op() const noexcept { return op_; }
  const PotentialModel& potential() const noexcept { return potential_; }

  /// Full trajectory. `h` may be null (no control); `chi` is the node indicator (size N+1)
  /// or empty for chi = 1.
  Field forward(std::span<const double> u0, const Field* h,
                std::span<const double> chi = {}) const;
  /// Terminal state only.
  std::vector<double> forward_terminal(std::span<const double> u0, const Field* h,
                                       std::span<const double> chi = {}) const;

  Field adjoint(std::span<const double> vT, const Field* h = nullptr) const;

 private:
  void check_step_size() const;
  void build_lhs(int j, std::vector<double>& lo, std::vector<double>& di,
                 std::vector<double>& up) const;
  void apply_rhs(int j, std::span<const double> u, std::span<double> out) const;
  template <class Sink>
  void forward_impl(std::span<const double> u0, const Field* h, std::span<const double> chi,
                    Sink&& sink) const;

  SpaceTimeGrid grid_;
  TridiagonalOperator op_;
  PotentialModel potential_;
};

/// Throws PreconditionError unless the vector has length N+1 and vanishes at both ends.
void require_dirichlet(std::span<const double> u, const SpaceTimeGrid& grid, const char* what);

Field solve_forward(const CoefficientModel& model, const PotentialModel& potential,
                    const SpaceTimeGrid& grid, std::span<const double> u0, const Field* h,
                    const ControlConfig& control);

Field solve_adjoint(const CoefficientModel& model, const PotentialModel& potential,
                    const SpaceTimeGrid& grid, std::span<const double> vT, const Field* h);

/// t -> int a v_x^2 dx with midpoint differences and midpoint a (one value per time node).
std::vector<double> energy_trace(const Field& field, const CoefficientModel& model);

/// Discrete well-posedness surrogate:
///   lhs = sup_t ||u(t)||^2 + int_0^T ||sqrt(a) u_x||^2 dt
///   rhs = ||u_0||^2 + ||h||^2_{L2(Q_T)}
struct EnergyBound {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

EnergyBound energy_bound(const Field& u, const TridiagonalOperator& op, const Field* h);

}  // namespace ideg
