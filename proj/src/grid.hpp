#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ideg {

class CoefficientModel;

/// Open interval (lo, hi) of [0,1].
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double x) const noexcept { return lo < x && x < hi; }
};

/// Uniform space grid x_i = i/N (i = 0..N) with x0 on a node, plus uniform time grid
/// t_j = j T / M (j = 0..M).
class SpaceTimeGrid {
 public:
  /// Snaps N upward to the smallest value >= requested_N with x0 * N integral.
  static SpaceTimeGrid create(int requested_N, int M, double T, double x0);

  int N() const noexcept { return N_; }
  int M() const noexcept { return M_; }
  double T() const noexcept { return T_; }
  double x0() const noexcept { return x0_; }
  int x0_index() const noexcept { return x0_index_; }
  int requested_N() const noexcept { return requested_N_; }
  bool adjusted() const noexcept { return N_ != requested_N_; }

  double h() const noexcept { return 1.0 / N_; }
  double dt() const noexcept { return T_ / M_; }
  double x(int i) const noexcept { return static_cast<double>(i) / N_; }
  double t(int j) const noexcept { return T_ * static_cast<double>(j) / M_; }
  /// x_{i+1/2}, i = 0..N-1. Never equal to x0.
  double midpoint(int i) const noexcept { return (static_cast<double>(i) + 0.5) / N_; }

  std::vector<double> space_nodes() const;

  /// Same space grid with a different time resolution / horizon.
  SpaceTimeGrid with_time(int M, double T) const;

 private:
  SpaceTimeGrid(int requested_N, int N, int M, double T, double x0, int x0_index);

  int requested_N_;
  int N_;
  int M_;
  double T_;
  double x0_;
  int x0_index_;
};

/// Real function sampled on the space-time grid, stored time-major: value(j, i).
class Field {
 public:
  explicit Field(const SpaceTimeGrid& grid, double fill = 0.0);

  const SpaceTimeGrid& grid() const noexcept { return grid_; }

  double& operator()(int j, int i) noexcept { return values_[index(j, i)]; }
  double operator()(int j, int i) const noexcept { return values_[index(j, i)]; }

  std::span<double> row(int j) noexcept {
    return {values_.data() + index(j, 0), static_cast<std::size_t>(grid_.N() + 1)};
  }
  std::span<const double> row(int j) const noexcept {
    return {values_.data() + index(j, 0), static_cast<std::size_t>(grid_.N() + 1)};
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  /// values[j][0] == values[j][N] == 0 for all j.
  bool is_dirichlet() const noexcept;

  Field& operator*=(double k) noexcept;

 private:
  std::size_t index(int j, int i) const noexcept {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(grid_.N() + 1) +
           static_cast<std::size_t>(i);
  }

  SpaceTimeGrid grid_;
  std::vector<double> values_;
};

/// Fill a field from a callable f(t, x).
Field sample_field(const SpaceTimeGrid& grid, const std::function<double(double, double)>& f);

/// Conservative discretization of u -> (a u_x)_x with Dirichlet identity rows.
///
/// Row i (0 < i < N): [a_{i+1/2}(u_{i+1}-u_i) - a_{i-1/2}(u_i-u_{i-1})] / h^2 with a at
/// midpoints. Rows 0 and N are identity rows.
struct TridiagonalOperator {
  std::vector<double> lower;  ///< lower[i] couples row i to i-1 (lower[0] unused)
  std::vector<double> diag;
  std::vector<double> upper;  ///< upper[i] couples row i to i+1 (upper[N] unused)
  std::vector<double> midpoint_a;  ///< a_{i+1/2}, i = 0..N-1
  double h = 0.0;

  int size() const noexcept { return static_cast<int>(diag.size()); }

  std::vector<double> apply(std::span<const double> u) const;
  /// Same as apply but writes into `out`; rows 0 and N set to zero (interior action only).
  void apply_interior(std::span<const double> u, std::span<double> out) const;

  /// Discrete energy sum_i a_{i+1/2} (u_{i+1}-u_i)^2 / h = -h u^T A u on Dirichlet vectors.
  double energy(std::span<const double> u) const;
};

TridiagonalOperator assemble_operator(const CoefficientModel& model, const SpaceTimeGrid& grid);

/// Lowest-|lambda| Dirichlet eigenpairs of the interior block of `op` (dense symmetric
/// tridiagonal eigensolve). Eigenvalues are returned in ascending |lambda| order; vectors
/// have length N+1 with zero ends, unit trapezoid L2 norm and a positive first extremum.
struct DiscreteModes {
  std::vector<double> eigenvalues;
  std::vector<std::vector<double>> vectors;
};

DiscreteModes lowest_modes(const TridiagonalOperator& op, int count);

/// Thomas elimination for a tridiagonal system; `lower[0]` and `upper[n-1]` are ignored.
/// Throws StepSizeError if a pivot vanishes.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs_inout,
                       std::vector<double>& scratch);

/// Composite trapezoid value of the integral over [0,1] of f (times weight, if given).
/// Throws PreconditionError on length mismatch.
double integrate_space(std::span<const double> f, const SpaceTimeGrid& grid,
                       std::optional<std::span<const double>> weight = std::nullopt);

/// Whether an integrand carries the e^{2 s phi} factor. Such integrands are defined to be
/// zero at t = 0 and t = T (the weight's limit value).
enum class TimeEndpoints { Include, Vanish };

/// Trapezoid in both variables.
double integrate_spacetime(const Field& f, TimeEndpoints endpoints = TimeEndpoints::Include);

/// Trapezoid in both variables of integrand(j, i), evaluated lazily.
double integrate_spacetime(const SpaceTimeGrid& grid,
                           const std::function<double(int, int)>& integrand,
                           TimeEndpoints endpoints = TimeEndpoints::Include);

/// Trapezoid weights in space (h/2 at the ends) and time (dt/2 at the ends).
std::vector<double> space_weights(const SpaceTimeGrid& grid);
std::vector<double> time_weights(const SpaceTimeGrid& grid);

/// Discrete L2 inner product with trapezoid weights.
double inner(std::span<const double> u, std::span<const double> v, const SpaceTimeGrid& grid);
double norm(std::span<const double> u, const SpaceTimeGrid& grid);

}  // namespace ideg
