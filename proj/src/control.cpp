#include "control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "error.hpp"
#include "random.hpp"

namespace ideg {

namespace {

// Sum of sin(k pi x)/k, k = 1..8, with uniform random amplitudes.
std::vector<double> random_profile(const SpaceTimeGrid& g, Rng& rng) {
  constexpr int kTerms = 8;
  double c[kTerms];
  for (double& v : c) v = rng.uniform(-1.0, 1.0);
  std::vector<double> w(static_cast<std::size_t>(g.N() + 1), 0.0);
  for (int i = 1; i < g.N(); ++i) {
    double sum = 0.0;
    for (int k = 0; k < kTerms; ++k) sum += c[k] * std::sin((k + 1) * M_PI * g.x(i)) / (k + 1);
    w[static_cast<std::size_t>(i)] = sum;
  }
  return w;
}

double observed_energy(const Field& v, std::span<const double> chi) {
  return integrate_spacetime(v.grid(), [&](int j, int i) {
    return chi[static_cast<std::size_t>(i)] * v(j, i) * v(j, i);
  });
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

// Quadratic forms of the observability pencil for one terminal datum.
struct Probe {
  std::vector<double> x;
  std::vector<double> Bx;   // P P* x: ||v(0)||^2 = <Bx, x>
  std::vector<double> Lx;   // Lambda x: int int chi v^2 = <Lx, x>
  double initial = 0.0;
  double observed = 0.0;
};

}  // namespace

ObservabilityReport estimate_observability(const CoefficientModel& model,
                                           const PotentialModel& potential,
                                           const SpaceTimeGrid& grid,
                                           const ControlConfig& control,
                                           const ObservabilitySampleSpec& spec) {
  control.require_contains(model.x0());
  if (spec.modes < 0 || spec.random < 0 || spec.power_iterations < 0)
    throw PreconditionError("observability sample counts must be nonnegative");
  const ParabolicSolver solver(model, potential, grid);
  const auto chi = control.indicator(grid);
  const std::size_t n = static_cast<std::size_t>(grid.N() + 1);

  ObservabilityReport report;
  report.N = grid.N();
  report.M = grid.M();
  report.T = grid.T();
  report.potential_sup_norm = potential.sup_norm();

  auto record = [&](std::string descriptor, double initial, double observed) {
    ObservabilitySample sample;
    sample.descriptor = std::move(descriptor);
    sample.initial_energy = initial;
    sample.observed_energy = observed;
    if (observed > 0.0) {
      sample.ratio = initial / observed;
      report.C_T_estimate = std::max(report.C_T_estimate, sample.ratio);
    } else {
      sample.ratio = std::numeric_limits<double>::infinity();
      report.violation = true;
    }
    report.samples.push_back(std::move(sample));
  };

  std::vector<Probe> basis;
  // Adds x to the Ritz basis; `descriptor` empty means a search direction, not a sample.
  auto evaluate = [&](std::vector<double> x, std::string descriptor) {
    Probe p;
    const Field v = solver.adjoint(x);
    auto v0 = v.row(0);
    p.initial = inner(v0, v0, grid);
    p.observed = observed_energy(v, chi);
    if (p.initial == 0.0 && p.observed == 0.0) return;  // v_T = 0 contributes nothing
    if (!descriptor.empty()) record(std::move(descriptor), p.initial, p.observed);
    if (p.observed <= 0.0) return;
    // Normalize so the Ritz pencil stays well scaled.
    const double scale = 1.0 / std::sqrt(p.observed);
    for (double& e : x) e *= scale;
    p.initial *= scale * scale;
    p.observed = 1.0;
    p.Bx = solver.forward_terminal(v0, nullptr);
    for (double& e : p.Bx) e *= scale;
    Field hv = v;
    hv *= scale;
    const std::vector<double> zero(n, 0.0);
    p.Lx = solver.forward_terminal(zero, &hv, chi);
    p.x = std::move(x);
    basis.push_back(std::move(p));
  };

  const auto modes = lowest_modes(solver.op(), spec.modes);
  for (std::size_t k = 0; k < modes.vectors.size(); ++k)
    evaluate(modes.vectors[k], "mode:" + std::to_string(k + 1));
  Rng rng(spec.seed);
  for (int k = 0; k < spec.random; ++k) evaluate(random_profile(grid, rng), "random:" + std::to_string(k + 1));

  // Rayleigh-Ritz on span(basis); each pass adds the residual B x - mu Lambda x.
  for (int it = 0; it < spec.power_iterations && !basis.empty(); ++it) {
    const auto m = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd Gs(m, m), Bs(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b <= a; ++b) {
        const auto& pa = basis[static_cast<std::size_t>(a)];
        const auto& pb = basis[static_cast<std::size_t>(b)];
        Gs(a, b) = Gs(b, a) = 0.5 * (inner(pa.Lx, pb.x, grid) + inner(pb.Lx, pa.x, grid));
        Bs(a, b) = Bs(b, a) = 0.5 * (inner(pa.Bx, pb.x, grid) + inner(pb.Bx, pa.x, grid));
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gs(Gs);
    const double gmax = gs.eigenvalues().maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < m; ++k)
      if (gs.eigenvalues()(k) > 1e-14 * gmax) keep.push_back(k);
    Eigen::MatrixXd W(m, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c)
      W.col(static_cast<Eigen::Index>(c)) =
          gs.eigenvectors().col(keep[c]) / std::sqrt(gs.eigenvalues()(keep[c]));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> red(W.transpose() * Bs * W);
    const Eigen::Index top = red.eigenvalues().size() - 1;
    const double mu = red.eigenvalues()(top);
    const Eigen::VectorXd coef = W * red.eigenvectors().col(top);

    std::vector<double> x(n, 0.0), Bx(n, 0.0), Lx(n, 0.0);
    for (Eigen::Index a = 0; a < m; ++a) {
      const auto& pa = basis[static_cast<std::size_t>(a)];
      axpy(coef(a), pa.x, x);
      axpy(coef(a), pa.Bx, Bx);
      axpy(coef(a), pa.Lx, Lx);
    }
    // The Ritz vector itself is a sample; the residual extends the space.
    evaluate(x, "refined:" + std::to_string(it + 1));
    std::vector<double> r = Bx;
    axpy(-mu, Lx, r);
    r.front() = 0.0;
    r.back() = 0.0;
    const double rn = norm(r, grid);
    if (!(rn > 1e-14 * norm(Bx, grid))) break;
    for (double& e : r) e /= rn;
    evaluate(std::move(r), "");
  }
  return report;
}

ControlSolution synthesize_null_control(const CoefficientModel& model,
                                        const PotentialModel& potential,
                                        const SpaceTimeGrid& grid, const ControlConfig& control,
                                        std::span<const double> u0, double tol, int max_iters,
                                        double epsilon) {
  control.require_contains(model.x0());
  if (!(tol > 0.0)) throw PreconditionError("control.tol must be positive");
  if (max_iters < 0) throw PreconditionError("control.max_iters must be nonnegative");
  if (!(epsilon >= 0.0)) throw PreconditionError("control.epsilon must be nonnegative");
  require_dirichlet(u0, grid, "u0");

  const ParabolicSolver solver(model, potential, grid);
  const auto chi = control.indicator(grid);
  const std::size_t n = static_cast<std::size_t>(grid.N() + 1);
  const std::vector<double> zero(n, 0.0);

  ControlSolution sol{Field(grid), Field(grid), std::vector<double>(n, 0.0), 0.0, 0.0, 0.0, 0,
                      {}, {}, false};
  sol.initial_norm = norm(u0, grid);
  if (sol.initial_norm == 0.0) {
    sol.converged = true;
    sol.residual_history.push_back(0.0);
    sol.objective_history.push_back(0.0);
    return sol;
  }

  // (Lambda + eps) x = b with b = -S u0; Lambda x = u(T) from rest driven by chi v.
  auto apply = [&](std::span<const double> x) {
    const Field v = solver.adjoint(x);
    auto y = solver.forward_terminal(zero, &v, chi);
    axpy(epsilon, x, y);
    return y;
  };
  std::vector<double> b = solver.forward_terminal(u0, nullptr);
  for (double& e : b) e = -e;

  std::vector<double> x(n, 0.0), r = b, p = r;
  double rr = inner(r, r, grid);
  double J = 0.0;
  const double target = tol * sol.initial_norm;
  auto terminal_estimate = [&] {
    std::vector<double> uT(n);
    for (std::size_t i = 0; i < n; ++i) uT[i] = -r[i] - epsilon * x[i];
    return norm(uT, grid);
  };
  sol.residual_history.push_back(terminal_estimate());
  sol.objective_history.push_back(0.0);
  sol.converged = sol.residual_history.back() <= target;

  for (int it = 0; it < max_iters && !sol.converged; ++it) {
    const auto q = apply(p);
    const double pq = inner(p, q, grid);
    if (!(pq > 0.0)) break;  // curvature lost to round-off
    const double alpha = rr / pq;
    axpy(alpha, p, x);
    axpy(-alpha, q, r);
    const double rr_new = inner(r, r, grid);
    // J(x) = 1/2 <A x, x> - <b, x> with A x = b - r.
    std::vector<double> br = b;
    axpy(1.0, r, br);
    const double J_new = -0.5 * inner(br, x, grid);
    if (!(J_new < J)) {  // round-off stall: reject the step
      axpy(-alpha, p, x);
      axpy(alpha, q, r);
      break;
    }
    ++sol.cg_iterations;
    sol.residual_history.push_back(terminal_estimate());
    sol.objective_history.push_back(J_new);
    sol.converged = sol.residual_history.back() <= target;
    const double decrease = J - J_new;
    J = J_new;
    if (std::abs(decrease) < 1e-10 * std::abs(J)) break;
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }

  // Control h = chi v; the state is re-simulated with h as a plain source.
  const Field v = solver.adjoint(x);
  for (int j = 0; j <= grid.M(); ++j)
    for (int i = 0; i <= grid.N(); ++i) sol.h(j, i) = chi[static_cast<std::size_t>(i)] * v(j, i);
  sol.state = solver.forward(u0, &sol.h);
  sol.terminal_data = x;
  auto uT = sol.state.row(grid.M());
  sol.terminal_norm = norm(uT, grid);
  sol.converged = sol.terminal_norm <= target;
  sol.cost = observed_energy(v, chi);
  return sol;
}

double verify_duality_gap(const ControlSolution& solution, const ObservabilityReport& report) {
  if (solution.initial_norm == 0.0) return 0.0;
  if (!(report.C_T_estimate > 0.0)) return std::numeric_limits<double>::infinity();
  return solution.cost / (report.C_T_estimate * solution.initial_norm * solution.initial_norm);
}

}  // namespace ideg
