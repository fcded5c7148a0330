#include "grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "coefficients.hpp"
#include "error.hpp"

namespace ideg {

SpaceTimeGrid::SpaceTimeGrid(int requested_N, int N, int M, double T, double x0, int x0_index)
    : requested_N_(requested_N), N_(N), M_(M), T_(T), x0_(x0), x0_index_(x0_index) {}

SpaceTimeGrid SpaceTimeGrid::create(int requested_N, int M, double T, double x0) {
  if (requested_N < 2) throw PreconditionError("grid.N must be at least 2");
  if (M < 1) throw PreconditionError("grid.M must be at least 1");
  if (!(T > 0.0)) throw PreconditionError("time horizon must be positive");
  if (!(x0 > 0.0 && x0 < 1.0)) throw PreconditionError("x0 must lie strictly inside (0,1)");
  // Smallest N >= requested_N with x0 * N integral up to round-off.
  constexpr int kSearchLimit = 1 << 20;
  for (int N = requested_N; N < requested_N + kSearchLimit; ++N) {
    const double scaled = x0 * N;
    const double nearest = std::round(scaled);
    if (std::abs(scaled - nearest) <= 1e-9 * std::max(1.0, scaled)) {
      const int idx = static_cast<int>(nearest);
      if (idx <= 0 || idx >= N) continue;
      return SpaceTimeGrid(requested_N, N, M, T, static_cast<double>(idx) / N, idx);
    }
  }
  throw PreconditionError("no grid size near grid.N places x0 on a node");
}

std::vector<double> SpaceTimeGrid::space_nodes() const {
  std::vector<double> xs(static_cast<std::size_t>(N_ + 1));
  for (int i = 0; i <= N_; ++i) xs[static_cast<std::size_t>(i)] = x(i);
  return xs;
}

SpaceTimeGrid SpaceTimeGrid::with_time(int M, double T) const {
  if (M < 1) throw PreconditionError("grid.M must be at least 1");
  if (!(T > 0.0)) throw PreconditionError("time horizon must be positive");
  return SpaceTimeGrid(requested_N_, N_, M, T, x0_, x0_index_);
}

Field::Field(const SpaceTimeGrid& grid, double fill)
    : grid_(grid),
      values_(static_cast<std::size_t>(grid.M() + 1) * static_cast<std::size_t>(grid.N() + 1),
              fill) {}

bool Field::is_dirichlet() const noexcept {
  for (int j = 0; j <= grid_.M(); ++j)
    if ((*this)(j, 0) != 0.0 || (*this)(j, grid_.N()) != 0.0) return false;
  return true;
}

Field& Field::operator*=(double k) noexcept {
  for (double& v : values_) v *= k;
  return *this;
}

Field sample_field(const SpaceTimeGrid& grid, const std::function<double(double, double)>& f) {
  Field out(grid);
  for (int j = 0; j <= grid.M(); ++j)
    for (int i = 0; i <= grid.N(); ++i) out(j, i) = f(grid.t(j), grid.x(i));
  return out;
}

std::vector<double> TridiagonalOperator::apply(std::span<const double> u) const {
  std::vector<double> out(u.size(), 0.0);
  apply_interior(u, out);
  out.front() = u.front();
  out.back() = u.back();
  return out;
}

void TridiagonalOperator::apply_interior(std::span<const double> u, std::span<double> out) const {
  const int n = size();
  if (static_cast<int>(u.size()) != n || static_cast<int>(out.size()) != n)
    throw PreconditionError("operator size mismatch");
  out[0] = 0.0;
  out[static_cast<std::size_t>(n - 1)] = 0.0;
  for (int i = 1; i < n - 1; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = lower[k] * u[k - 1] + diag[k] * u[k] + upper[k] * u[k + 1];
  }
}

double TridiagonalOperator::energy(std::span<const double> u) const {
  double e = 0.0;
  for (std::size_t i = 0; i < midpoint_a.size(); ++i) {
    const double du = u[i + 1] - u[i];
    e += midpoint_a[i] * du * du;
  }
  return e / h;
}

TridiagonalOperator assemble_operator(const CoefficientModel& model, const SpaceTimeGrid& grid) {
  const int N = grid.N();
  TridiagonalOperator op;
  op.h = grid.h();
  const auto n = static_cast<std::size_t>(N + 1);
  op.lower.assign(n, 0.0);
  op.diag.assign(n, 0.0);
  op.upper.assign(n, 0.0);
  op.midpoint_a.resize(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) op.midpoint_a[static_cast<std::size_t>(i)] = model.a(grid.midpoint(i));
  const double inv_h2 = 1.0 / (op.h * op.h);
  op.diag[0] = 1.0;
  op.diag[n - 1] = 1.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double am = op.midpoint_a[i - 1];
    const double ap = op.midpoint_a[i];
    op.lower[i] = am * inv_h2;
    op.upper[i] = ap * inv_h2;
    op.diag[i] = -(am + ap) * inv_h2;
  }
  return op;
}

DiscreteModes lowest_modes(const TridiagonalOperator& op, int count) {
  const int n = op.size() - 2;  // interior unknowns
  if (n < 1) throw PreconditionError("operator has no interior nodes");
  count = std::clamp(count, 0, n);
  Eigen::VectorXd d(n), e(std::max(n - 1, 0));
  for (int k = 0; k < n; ++k) d(k) = op.diag[static_cast<std::size_t>(k + 1)];
  for (int k = 0; k + 1 < n; ++k) e(k) = op.upper[static_cast<std::size_t>(k + 1)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw PreconditionError("tridiagonal eigensolve failed");

  // Eigenvalues are ascending and negative; lowest |lambda| come last.
  DiscreteModes modes;
  const double h = op.h;
  for (int c = 0; c < count; ++c) {
    const int k = n - 1 - c;
    modes.eigenvalues.push_back(solver.eigenvalues()(k));
    std::vector<double> v(static_cast<std::size_t>(n + 2), 0.0);
    double norm2 = 0.0;
    for (int r = 0; r < n; ++r) {
      const double val = solver.eigenvectors()(r, k);
      v[static_cast<std::size_t>(r + 1)] = val;
      norm2 += h * val * val;  // trapezoid, ends are zero
    }
    const double scale = 1.0 / std::sqrt(norm2);
    // The first non-negligible entry carries the sign of the first extremum.
    double first = 0.0;
    for (std::size_t r = 1; r + 1 < v.size(); ++r) {
      if (std::abs(v[r]) > 1e-12 * std::sqrt(1.0 / h)) {
        first = v[r];
        break;
      }
    }
    const double sgn = first < 0.0 ? -1.0 : 1.0;
    for (double& x : v) x *= sgn * scale;
    modes.vectors.push_back(std::move(v));
  }
  return modes;
}

void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs_inout,
                       std::vector<double>& scratch) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs_inout.size() != n)
    throw PreconditionError("tridiagonal system size mismatch");
  scratch.resize(n);
  double pivot = diag[0];
  if (pivot == 0.0) throw StepSizeError("zero pivot in tridiagonal solve");
  scratch[0] = upper[0] / pivot;
  rhs_inout[0] /= pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = diag[i] - lower[i] * scratch[i - 1];
    if (pivot == 0.0 || !std::isfinite(pivot)) throw StepSizeError("zero pivot in tridiagonal solve");
    scratch[i] = i + 1 < n ? upper[i] / pivot : 0.0;
    rhs_inout[i] = (rhs_inout[i] - lower[i] * rhs_inout[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs_inout[i] -= scratch[i] * rhs_inout[i + 1];
}

std::vector<double> space_weights(const SpaceTimeGrid& grid) {
  std::vector<double> w(static_cast<std::size_t>(grid.N() + 1), grid.h());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

std::vector<double> time_weights(const SpaceTimeGrid& grid) {
  std::vector<double> w(static_cast<std::size_t>(grid.M() + 1), grid.dt());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

double integrate_space(std::span<const double> f, const SpaceTimeGrid& grid,
                       std::optional<std::span<const double>> weight) {
  const auto n = static_cast<std::size_t>(grid.N() + 1);
  if (f.size() != n) throw PreconditionError("integrand length must be N+1");
  if (weight && weight->size() != n) throw PreconditionError("weight length must be N+1");
  const double h = grid.h();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = (i == 0 || i + 1 == n) ? 0.5 * h : h;
    sum += wi * f[i] * (weight ? (*weight)[i] : 1.0);
  }
  return sum;
}

double integrate_spacetime(const Field& f, TimeEndpoints endpoints) {
  const SpaceTimeGrid& g = f.grid();
  return integrate_spacetime(g, [&](int j, int i) { return f(j, i); }, endpoints);
}

double integrate_spacetime(const SpaceTimeGrid& grid,
                           const std::function<double(int, int)>& integrand,
                           TimeEndpoints endpoints) {
  const auto sw = space_weights(grid);
  const auto tw = time_weights(grid);
  const int j_lo = endpoints == TimeEndpoints::Vanish ? 1 : 0;
  const int j_hi = endpoints == TimeEndpoints::Vanish ? grid.M() - 1 : grid.M();
  double total = 0.0;
  for (int j = j_lo; j <= j_hi; ++j) {
    double row = 0.0;
    for (int i = 0; i <= grid.N(); ++i) row += sw[static_cast<std::size_t>(i)] * integrand(j, i);
    total += tw[static_cast<std::size_t>(j)] * row;
  }
  return total;
}

double inner(std::span<const double> u, std::span<const double> v, const SpaceTimeGrid& grid) {
  if (u.size() != v.size()) throw PreconditionError("inner product length mismatch");
  return integrate_space(u, grid, v);
}

double norm(std::span<const double> u, const SpaceTimeGrid& grid) {
  return std::sqrt(std::max(0.0, inner(u, u, grid)));
}

}  // namespace ideg
