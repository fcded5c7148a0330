#include "solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace ideg {

PotentialModel::PotentialModel(Kind kind, double value, std::vector<Field> samples)
    : kind_(kind), constant_(value), samples_(std::move(samples)) {
  if (kind_ == Kind::Sampled) {
    double sup = 0.0, inf = std::numeric_limits<double>::infinity();
    for (double c : samples_.front().values()) {
      if (!std::isfinite(c)) throw InvalidModelError("potential samples must be finite");
      sup = std::max(sup, std::abs(c));
      inf = std::min(inf, c);
    }
    sup_norm_ = sup;
    infimum_ = inf;
  } else {
    sup_norm_ = std::abs(constant_);
    infimum_ = constant_;
  }
}

PotentialModel PotentialModel::zero() { return PotentialModel(Kind::Zero, 0.0, {}); }

PotentialModel PotentialModel::constant(double value) {
  if (!std::isfinite(value)) throw InvalidModelError("potential.value must be finite");
  return PotentialModel(Kind::Constant, value, {});
}

PotentialModel PotentialModel::sampled(Field values) {
  std::vector<Field> s;
  s.push_back(std::move(values));
  return PotentialModel(Kind::Sampled, 0.0, std::move(s));
}

std::string PotentialModel::kind_name() const {
  switch (kind_) {
    case Kind::Zero: return "zero";
    case Kind::Constant: return "constant";
    case Kind::Sampled: return "sampled";
  }
  return "unknown";
}

double PotentialModel::value(int j, int i) const noexcept {
  if (kind_ == Kind::Sampled) return samples_.front()(j, i);
  return constant_;
}

double default_lambda(const PotentialModel& potential) noexcept {
  return std::max(0.0, -potential.infimum());
}

Field apply_lambda_shift(const Field& f, double lambda) {
  Field out = f;
  const auto& g = f.grid();
  for (int j = 0; j <= g.M(); ++j) {
    const double k = std::exp(-lambda * g.t(j));
    for (double& v : out.row(j)) v *= k;
  }
  return out;
}

std::vector<double> ControlConfig::indicator(const SpaceTimeGrid& grid) const {
  std::vector<double> chi(static_cast<std::size_t>(grid.N() + 1), 0.0);
  const double tol = 1e-12;
  for (int i = 0; i <= grid.N(); ++i) {
    const double x = grid.x(i);
    double& c = chi[static_cast<std::size_t>(i)];
    if (std::abs(x - omega_lo) <= tol || std::abs(x - omega_hi) <= tol)
      c = 0.5;
    else if (x > omega_lo && x < omega_hi)
      c = 1.0;
  }
  // Dirichlet nodes never carry control.
  chi.front() = 0.0;
  chi.back() = 0.0;
  return chi;
}

void ControlConfig::require_contains(double x0) const {
  if (!(0.0 < omega_lo && omega_lo < x0 && x0 < omega_hi && omega_hi < 1.0))
    throw GeometryError("control interval must satisfy 0 < omega_lo < x0 < omega_hi < 1");
}

ParabolicSolver::ParabolicSolver(const CoefficientModel& model, PotentialModel potential,
                                 const SpaceTimeGrid& grid)
    : grid_(grid), op_(assemble_operator(model, grid)), potential_(std::move(potential)) {
  if (const Field* s = potential_.samples()) {
    if (s->grid().N() != grid.N() || s->grid().M() != grid.M())
      throw PreconditionError("sampled potential lives on a different grid");
  }
  check_step_size();
}

void ParabolicSolver::check_step_size() const {
  // L_j has off-diagonal mass dt/2 |A_ii|; dominance needs 1 + dt/2 c > 0.
  const double half = 0.5 * grid_.dt();
  if (!(1.0 + half * potential_.infimum() > 0.0))
    throw StepSizeError("time step too large for the potential: need 1 + dt/2 c > 0");
}

void ParabolicSolver::build_lhs(int j, std::vector<double>& lo, std::vector<double>& di,
                                std::vector<double>& up) const {
  const std::size_t n = op_.diag.size();
  const double half = 0.5 * grid_.dt();
  lo.assign(n, 0.0);
  di.assign(n, 1.0);
  up.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    lo[i] = -half * op_.lower[i];
    up[i] = -half * op_.upper[i];
    di[i] = 1.0 - half * (op_.diag[i] - potential_.value(j, static_cast<int>(i)));
  }
}

void ParabolicSolver::apply_rhs(int j, std::span<const double> u, std::span<double> out) const {
  const std::size_t n = op_.diag.size();
  const double half = 0.5 * grid_.dt();
  out[0] = 0.0;
  out[n - 1] = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double Au = op_.lower[i] * u[i - 1] + op_.diag[i] * u[i] + op_.upper[i] * u[i + 1];
    out[i] = u[i] + half * (Au - potential_.value(j, static_cast<int>(i)) * u[i]);
  }
}

void require_dirichlet(std::span<const double> u, const SpaceTimeGrid& grid, const char* what) {
  if (u.size() != static_cast<std::size_t>(grid.N() + 1))
    throw PreconditionError(std::string(what) + " must have N+1 entries");
  if (u.front() != 0.0 || u.back() != 0.0)
    throw PreconditionError(std::string(what) + " must vanish at x = 0 and x = 1");
}

namespace {

void require_same_grid(const Field& f, const SpaceTimeGrid& g, const char* what) {
  if (f.grid().N() != g.N() || f.grid().M() != g.M())
    throw PreconditionError(std::string(what) + " lives on a different grid");
}

}  // namespace

template <class Sink>
void ParabolicSolver::forward_impl(std::span<const double> u0, const Field* h,
                                   std::span<const double> chi, Sink&& sink) const {
  require_dirichlet(u0, grid_, "u0");
  if (h) require_same_grid(*h, grid_, "control h");
  const std::size_t n = static_cast<std::size_t>(grid_.N() + 1);
  if (!chi.empty() && chi.size() != n) throw PreconditionError("chi must have N+1 entries");
  const double half = 0.5 * grid_.dt();
  auto chi_at = [&](std::size_t i) {
    if (i == 0 || i + 1 == n) return 0.0;
    return chi.empty() ? 1.0 : chi[i];
  };

  std::vector<double> u(u0.begin(), u0.end()), w(n), lo, di, up, scratch;
  const bool frozen = potential_.time_independent();
  if (frozen) build_lhs(0, lo, di, up);
  sink(0, std::span<const double>(u));
  for (int j = 0; j < grid_.M(); ++j) {
    if (h) {
      auto hj = h->row(j);
      for (std::size_t i = 0; i < n; ++i) u[i] += half * chi_at(i) * hj[i];
    }
    apply_rhs(j, u, w);
    if (!frozen) build_lhs(j + 1, lo, di, up);
    solve_tridiagonal(lo, di, up, w, scratch);
    if (h) {
      auto hj1 = h->row(j + 1);
      for (std::size_t i = 0; i < n; ++i) w[i] += half * chi_at(i) * hj1[i];
    }
    u.swap(w);
    sink(j + 1, std::span<const double>(u));
  }
}

Field ParabolicSolver::forward(std::span<const double> u0, const Field* h,
                               std::span<const double> chi) const {
  Field out(grid_);
  forward_impl(u0, h, chi, [&](int j, std::span<const double> u) {
    std::copy(u.begin(), u.end(), out.row(j).begin());
  });
  return out;
}

std::vector<double> ParabolicSolver::forward_terminal(std::span<const double> u0, const Field* h,
                                                      std::span<const double> chi) const {
  std::vector<double> last;
  forward_impl(u0, h, chi, [&](int j, std::span<const double> u) {
    if (j == grid_.M()) last.assign(u.begin(), u.end());
  });
  return last;
}

Field ParabolicSolver::adjoint(std::span<const double> vT, const Field* h) const {
  require_dirichlet(vT, grid_, "vT");
  if (h) require_same_grid(*h, grid_, "adjoint source h");
  const std::size_t n = static_cast<std::size_t>(grid_.N() + 1);
  const double half = 0.5 * grid_.dt();
  const int M = grid_.M();

  Field out(grid_);
  std::vector<double> v(vT.begin(), vT.end()), w(n), lo, di, up, scratch;
  const bool frozen = potential_.time_independent();
  if (frozen) build_lhs(0, lo, di, up);
  std::copy(v.begin(), v.end(), out.row(M).begin());
  for (int j = M - 1; j >= 0; --j) {
    if (h) {
      auto hj1 = h->row(j + 1);
      for (std::size_t i = 1; i + 1 < n; ++i) v[i] -= half * hj1[i];
    }
    if (!frozen) build_lhs(j + 1, lo, di, up);
    solve_tridiagonal(lo, di, up, v, scratch);
    apply_rhs(j, v, w);
    if (h) {
      auto hj = h->row(j);
      for (std::size_t i = 1; i + 1 < n; ++i) w[i] -= half * hj[i];
    }
    v.swap(w);
    std::copy(v.begin(), v.end(), out.row(j).begin());
  }
  return out;
}

Field solve_forward(const CoefficientModel& model, const PotentialModel& potential,
                    const SpaceTimeGrid& grid, std::span<const double> u0, const Field* h,
                    const ControlConfig& control) {
  ParabolicSolver solver(model, potential, grid);
  const auto chi = control.indicator(grid);
  return solver.forward(u0, h, chi);
}

Field solve_adjoint(const CoefficientModel& model, const PotentialModel& potential,
                    const SpaceTimeGrid& grid, std::span<const double> vT, const Field* h) {
  ParabolicSolver solver(model, potential, grid);
  return solver.adjoint(vT, h);
}

std::vector<double> energy_trace(const Field& field, const CoefficientModel& model) {
  const auto& g = field.grid();
  std::vector<double> mid_a(static_cast<std::size_t>(g.N()));
  for (int i = 0; i < g.N(); ++i) mid_a[static_cast<std::size_t>(i)] = model.a(g.midpoint(i));
  std::vector<double> trace(static_cast<std::size_t>(g.M() + 1), 0.0);
  const double h = g.h();
  for (int j = 0; j <= g.M(); ++j) {
    auto v = field.row(j);
    double e = 0.0;
    for (int i = 0; i < g.N(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double d = v[k + 1] - v[k];
      e += mid_a[k] * d * d;
    }
    trace[static_cast<std::size_t>(j)] = e / h;
  }
  return trace;
}

EnergyBound energy_bound(const Field& u, const TridiagonalOperator& op, const Field* h) {
  const auto& g = u.grid();
  const auto tw = time_weights(g);
  EnergyBound b;
  double sup = 0.0, dissipation = 0.0;
  for (int j = 0; j <= g.M(); ++j) {
    auto row = u.row(j);
    const double n2 = inner(row, row, g);
    sup = std::max(sup, n2);
    dissipation += tw[static_cast<std::size_t>(j)] * op.energy(row);
  }
  b.lhs = sup + dissipation;
  auto r0 = u.row(0);
  b.rhs = inner(r0, r0, g);
  if (h) b.rhs += integrate_spacetime(g, [&](int j, int i) { return (*h)(j, i) * (*h)(j, i); });
  b.ratio = b.rhs > 0.0 ? b.lhs / b.rhs : 0.0;
  return b;
}

}  // namespace ideg
