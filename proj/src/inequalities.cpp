#include "inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "error.hpp"
#include "random.hpp"

namespace ideg {

// ---------------------------------------------------------------------------------------
// Hardy-Poincare

HardyWeight HardyWeight::distance_power(double x0, double q) {
  if (!(x0 > 0.0 && x0 < 1.0)) throw DomainError("x0 must lie strictly inside (0,1)");
  HardyWeight w;
  w.x0_ = x0;
  w.q_ = q;
  w.name_ = "distance_power";
  return w;
}

HardyWeight HardyWeight::carleman_preset(const CoefficientModel& model) {
  HardyWeight w;
  w.x0_ = model.x0();
  w.q_ = (4.0 + model.theta()) / 3.0;
  w.name_ = "carleman_preset";
  w.model_.push_back(model);
  return w;
}

double HardyWeight::operator()(double x) const {
  const double d = std::abs(x - x0_);
  if (model_.empty()) return std::pow(d, q_);
  return std::cbrt(model_.front().a(x) * d * d * d * d);
}

double hp_bound_at(double q, double beta) {
  if (!(beta > 1.0 && beta < q)) throw DomainError("beta must lie in (1, q)");
  return 1.0 / ((beta - 1.0) * (q - beta));
}

double hp_analytic_bound(double q) {
  if (!(q > 1.0 && q < 2.0)) throw DomainError("q must lie in (1,2)");
  return hp_bound_at(q, 0.5 * (1.0 + q));
}

namespace {

// Lumped mass (length N+1) and cell stiffness (length N) of the discrete pair.
struct HPPair {
  std::vector<double> mass;
  std::vector<double> stiff;
};

HPPair hp_pair(const HardyWeight& p, const SpaceTimeGrid& grid) {
  const int N = grid.N();
  const double h = grid.h();
  const double x0 = grid.x0();
  const double q = p.q();
  HPPair pair;
  pair.mass.assign(static_cast<std::size_t>(N + 1), 0.0);
  pair.stiff.resize(static_cast<std::size_t>(N));
  for (int i = 1; i < N; ++i) {
    if (i == grid.x0_index()) continue;
    const double d = grid.x(i) - x0;
    pair.mass[static_cast<std::size_t>(i)] = h * p(grid.x(i)) / (d * d);
  }
  // Dual cell of x0: int_0^{h/2} c r^{q-2} dr per side with c fitted at x0 +- h/2.
  const double half = 0.5 * h;
  pair.mass[static_cast<std::size_t>(grid.x0_index())] =
      (p(x0 - half) + p(x0 + half)) / (half * (q - 1.0));
  for (int i = 0; i < N; ++i) pair.stiff[static_cast<std::size_t>(i)] = p(grid.midpoint(i)) / h;
  return pair;
}

double pair_mass(const HPPair& pr, std::span<const double> w) {
  double m = 0.0;
  for (std::size_t i = 0; i < pr.mass.size(); ++i) m += pr.mass[i] * w[i] * w[i];
  return m;
}

double pair_stiff(const HPPair& pr, std::span<const double> w) {
  double k = 0.0;
  for (std::size_t i = 0; i < pr.stiff.size(); ++i) {
    const double d = w[i + 1] - w[i];
    k += pr.stiff[i] * d * d;
  }
  return k;
}

// Number of generalized eigenvalues of (K, M) below sigma: negative pivots of K - sigma M.
int sturm_count(const HPPair& pr, double sigma) {
  const std::size_t n = pr.mass.size();
  int negative = 0;
  double pivot = 1.0;
  double prev_off = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double diag = pr.stiff[i - 1] + pr.stiff[i] - sigma * pr.mass[i];
    pivot = diag - (i > 1 ? prev_off * prev_off / pivot : 0.0);
    if (pivot == 0.0) pivot = -std::numeric_limits<double>::min();
    if (pivot < 0.0) ++negative;
    prev_off = -pr.stiff[i];
  }
  return negative;
}

// Piecewise-cubic Hermite profile through random knots, zero at x = 0 and 1.
std::vector<double> random_cubic(const SpaceTimeGrid& grid, Rng& rng) {
  const int interior = rng.integer(2, 6);
  std::vector<double> knots{0.0, 1.0};
  for (int k = 0; k < interior; ++k) knots.push_back(rng.uniform(0.02, 0.98));
  std::sort(knots.begin(), knots.end());
  std::vector<double> val(knots.size()), slope(knots.size());
  for (std::size_t k = 0; k < knots.size(); ++k) {
    val[k] = (k == 0 || k + 1 == knots.size()) ? 0.0 : rng.uniform(-1.0, 1.0);
    slope[k] = rng.uniform(-3.0, 3.0);
  }
  std::vector<double> w(static_cast<std::size_t>(grid.N() + 1), 0.0);
  for (int i = 1; i < grid.N(); ++i) {
    const double x = grid.x(i);
    const auto hi = static_cast<std::size_t>(
        std::upper_bound(knots.begin(), knots.end(), x) - knots.begin());
    const std::size_t lo = hi - 1;
    const double len = knots[hi] - knots[lo];
    if (len <= 0.0) continue;
    const double u = (x - knots[lo]) / len;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    w[static_cast<std::size_t>(i)] =
        h00 * val[lo] + h10 * len * slope[lo] + h01 * val[hi] + h11 * len * slope[hi];
  }
  return w;
}

}  // namespace

double hp_quotient(const HardyWeight& p, const SpaceTimeGrid& grid, std::span<const double> w) {
  if (w.size() != static_cast<std::size_t>(grid.N() + 1))
    throw PreconditionError("w must have N+1 entries");
  const HPPair pr = hp_pair(p, grid);
  const double k = pair_stiff(pr, w);
  if (k == 0.0) return 0.0;
  return pair_mass(pr, w) / k;
}

HPReport hp_verify(const HardyWeight& p, const SpaceTimeGrid& grid, int battery_size,
                   std::uint64_t seed) {
  const double q = p.q();
  if (!(q > 1.0 && q < 2.0)) throw DomainError("hp.q must lie in (1,2)");
  {
    std::vector<double> xs, ratio;
    for (int i = 0; i <= grid.N(); ++i) {
      if (i == grid.x0_index()) continue;
      const double x = grid.x(i);
      xs.push_back(x);
      ratio.push_back(p(x) / std::pow(std::abs(x - grid.x0()), q));
    }
    const auto verdict = sided_monotonicity(xs, ratio, grid.x0(), 1e-9);
    if (!verdict.pass)
      throw PreconditionError("p/|x-x0|^q is not sided monotone (" + verdict.failing_side +
                              " side)");
  }

  HPReport r;
  r.weight = p.name();
  r.q = q;
  r.analytic_bound = hp_analytic_bound(q);
  r.grid_N = grid.N();

  const HPPair pr = hp_pair(p, grid);
  const std::size_t n = pr.mass.size();

  // Bracket the smallest eigenvalue by Sturm bisection, then polish by shifted inverse
  // iteration on K - sigma M.
  std::vector<double> probe(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double x = grid.x(static_cast<int>(i));
    probe[i] = x * (1.0 - x);
  }
  double lo = 0.0, hi = pair_stiff(pr, probe) / pair_mass(pr, probe);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (sturm_count(pr, mid) >= 1 ? hi : lo) = mid;
  }
  const double sigma = lo * (1.0 - 1e-9);
  std::vector<double> dl(n, 0.0), dd(n, 1.0), du(n, 0.0), x = probe, y(n), scratch;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    dd[i] = pr.stiff[i - 1] + pr.stiff[i] - sigma * pr.mass[i];
    if (i > 1) dl[i] = -pr.stiff[i - 1];
    if (i + 2 < n) du[i] = -pr.stiff[i];
  }
  double rq = hi, prev = std::numeric_limits<double>::infinity();
  int iters = 0;
  while (iters < 100 && std::abs(rq - prev) > 1e-14 * rq) {
    for (std::size_t i = 0; i < n; ++i) y[i] = pr.mass[i] * x[i];
    y.front() = 0.0;
    y.back() = 0.0;
    solve_tridiagonal(dl, dd, du, y, scratch);
    const double m = std::sqrt(pair_mass(pr, y));
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / m;
    prev = rq;
    rq = pair_stiff(pr, x);  // x is M-normalized
    ++iters;
  }
  r.rayleigh_estimate = 1.0 / rq;
  r.inverse_iterations = iters;

  Rng rng(seed);
  r.battery_ratios.reserve(static_cast<std::size_t>(std::max(battery_size, 0)));
  for (int k = 0; k < battery_size; ++k) {
    const auto w = random_cubic(grid, rng);
    const double ks = pair_stiff(pr, w);
    const double ratio = ks > 0.0 ? pair_mass(pr, w) / ks : 0.0;
    r.battery_ratios.push_back(ratio);
    r.battery_max_ratio = std::max(r.battery_max_ratio, ratio);
  }
  return r;
}

// ---------------------------------------------------------------------------------------
// Decomposition identity

double IdentityTerms::abs_sum() const noexcept {
  return std::abs(theta_tt) + std::abs(cubic) + std::abs(mixed) + std::abs(gradient) +
         std::abs(flux_time) + std::abs(time_phi_t) + std::abs(time_phi_x) +
         std::abs(space_mixed) + std::abs(space_flux) + std::abs(time_energy);
}

IdentityReport carleman_identity_check(const CoefficientModel& model,
                                       const WeightParams& params, const Field& w) {
  const SpaceTimeGrid& g = w.grid();
  if (std::abs(g.T() - params.T) > 1e-12 * params.T)
    throw PreconditionError("field horizon differs from weight.T");
  if (g.N() < 4) throw PreconditionError("identity check needs N >= 4");
  if (!w.is_dirichlet()) throw PreconditionError("w must vanish at x = 0 and x = 1");
  for (int i = 0; i <= g.N(); ++i)
    if (w(0, i) != 0.0 || w(g.M(), i) != 0.0)
      throw PreconditionError("w must vanish at t = 0 and t = T");

  const CarlemanWeight weight(model, params);
  const int N = g.N(), M = g.M();
  const double h = g.h(), dt = g.dt(), s = params.s, c1 = params.c1, x0 = model.x0();
  const auto n = static_cast<std::size_t>(N + 1);

  std::vector<double> a(n), ap(n, 0.0), xsa(n), G(n), psi(n), dx(n);
  for (int i = 0; i <= N; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double x = g.x(i);
    a[k] = model.a(x);
    if (i == 0 || i == N) ap[k] = model.a_prime(x);
    xsa[k] = model.distance_sq_over_a(x);
    G[k] = model.carleman_factor(x);
    psi[k] = weight.psi(x);
    dx[k] = x - x0;
  }
  const TridiagonalOperator op = assemble_operator(model, g);

  std::vector<double> Th(static_cast<std::size_t>(M + 1), 0.0), Thd = Th, Thdd = Th;
  for (int j = 1; j < M; ++j) {
    const auto k = static_cast<std::size_t>(j);
    Th[k] = weight.theta(g.t(j));
    Thd[k] = weight.theta_dot(g.t(j));
    Thdd[k] = weight.theta_ddot(g.t(j));
  }

  // w_x: central inside, one-sided second order at x = 0, 1.
  Field wx(g);
  for (int j = 0; j <= M; ++j) {
    for (int i = 1; i < N; ++i) wx(j, i) = (w(j, i + 1) - w(j, i - 1)) / (2.0 * h);
    wx(j, 0) = (-3.0 * w(j, 0) + 4.0 * w(j, 1) - w(j, 2)) / (2.0 * h);
    wx(j, N) = (3.0 * w(j, N) - 4.0 * w(j, N - 1) + w(j, N - 2)) / (2.0 * h);
  }
  auto wt = [&](int j, int i) {
    if (j == 0 || j == M) return 0.0;
    return (w(j + 1, i) - w(j - 1, i)) / (2.0 * dt);
  };
  // (a w_x)_x: conservative stencil inside; a w_xx + a' w_x with a one-sided w_xx at the ends.
  auto Aw = [&](int j, int i) {
    if (i == 0)
      return a[0] * (2.0 * w(j, 0) - 5.0 * w(j, 1) + 4.0 * w(j, 2) - w(j, 3)) / (h * h) +
             ap[0] * wx(j, 0);
    if (i == N)
      return a[n - 1] * (2.0 * w(j, N) - 5.0 * w(j, N - 1) + 4.0 * w(j, N - 2) - w(j, N - 3)) /
                 (h * h) +
             ap[n - 1] * wx(j, N);
    const auto k = static_cast<std::size_t>(i);
    return op.lower[k] * w(j, i - 1) + op.diag[k] * w(j, i) + op.upper[k] * w(j, i + 1);
  };

  auto tk = [](int j) { return static_cast<std::size_t>(j); };
  auto xk = [](int i) { return static_cast<std::size_t>(i); };

  IdentityReport r;
  r.s = s;
  r.N = N;
  r.M = M;
  double norm_plus = 0.0, norm_minus = 0.0;
  {
    const auto twq = time_weights(g);
    const auto swq = space_weights(g);
    for (int j = 1; j < M; ++j) {
      const double th = Th[tk(j)];
      double row = 0.0, rp = 0.0, rm = 0.0;
      for (int i = 0; i <= N; ++i) {
        const double ww = w(j, i);
        const double lp = Aw(j, i) - s * Thd[tk(j)] * psi[xk(i)] * ww +
                          s * s * th * th * c1 * c1 * xsa[xk(i)] * ww;
        const double lm = wt(j, i) - 2.0 * s * th * c1 * dx[xk(i)] * wx(j, i) - s * c1 * th * ww;
        row += swq[xk(i)] * lp * lm;
        rp += swq[xk(i)] * lp * lp;
        rm += swq[xk(i)] * lm * lm;
      }
      r.left += twq[tk(j)] * row;
      norm_plus += twq[tk(j)] * rp;
      norm_minus += twq[tk(j)] * rm;
    }
  }

  IdentityTerms& T = r.terms;
  T.theta_tt = 0.5 * s * integrate_spacetime(g, [&](int j, int i) {
    return Thdd[tk(j)] * psi[xk(i)] * w(j, i) * w(j, i);
  });
  T.cubic = s * s * s * integrate_spacetime(g, [&](int j, int i) {
    const double th = Th[tk(j)];
    return c1 * th * G[xk(i)] * th * th * c1 * c1 * xsa[xk(i)] * w(j, i) * w(j, i);
  });
  T.mixed = -2.0 * s * s * integrate_spacetime(g, [&](int j, int i) {
    return Th[tk(j)] * Thd[tk(j)] * c1 * c1 * xsa[xk(i)] * w(j, i) * w(j, i);
  });
  T.gradient = s * integrate_spacetime(g, [&](int j, int i) {
    return a[xk(i)] * Th[tk(j)] * c1 * G[xk(i)] * wx(j, i) * wx(j, i);
  });

  const auto tw = time_weights(g);
  const auto sw = space_weights(g);
  auto bracket_x = [&](auto&& f) {
    double total = 0.0;
    for (int j = 0; j <= M; ++j) total += tw[tk(j)] * (f(j, N) - f(j, 0));
    return total;
  };
  T.flux_time = bracket_x([&](int j, int i) { return a[xk(i)] * wx(j, i) * wt(j, i); });
  T.space_mixed = bracket_x([&](int j, int i) {
    const double th = Th[tk(j)];
    const double phix = th * c1 * dx[xk(i)] / a[xk(i)];
    const double awx = a[xk(i)] * wx(j, i);
    const double w2 = w(j, i) * w(j, i);
    return -s * phix * awx * awx + s * s * a[xk(i)] * Thd[tk(j)] * psi[xk(i)] * phix * w2 -
           s * s * s * a[xk(i)] * a[xk(i)] * phix * phix * phix * w2;
  });
  T.space_flux = bracket_x(
      [&](int j, int i) { return -s * a[xk(i)] * c1 * Th[tk(j)] * w(j, i) * wx(j, i); });
  // Time-boundary terms: with w = 0 at t = 0, T the phi_t and phi_x terms vanish in the
  // limit (Theta is infinite there), and a w_x^2 is evaluated directly.
  T.time_phi_t = 0.0;
  T.time_phi_x = 0.0;
  double e_top = 0.0, e_bottom = 0.0;
  for (int i = 0; i <= N; ++i) {
    e_top += sw[xk(i)] * a[xk(i)] * wx(M, i) * wx(M, i);
    e_bottom += sw[xk(i)] * a[xk(i)] * wx(0, i) * wx(0, i);
  }
  T.time_energy = -0.5 * (e_top - e_bottom);

  r.right = T.distributed() + T.boundary();
  const double diff = std::abs(r.left - r.right);
  r.relative_residual = diff / (std::abs(r.left) + 1e-300);
  const double scale = std::sqrt(norm_plus * norm_minus);
  r.scaled_residual = scale > 0.0 ? diff / scale : 0.0;
  if (diff == 0.0) r.relative_residual = 0.0;
  return r;
}

const char* to_string(SpaceProfile p) noexcept {
  switch (p) {
    case SpaceProfile::Polynomial: return "polynomial";
    case SpaceProfile::Sine: return "sine";
    case SpaceProfile::Skewed: return "skewed";
  }
  return "unknown";
}

double space_profile(SpaceProfile p, double x0, double x) {
  const double d2 = (x - x0) * (x - x0);
  switch (p) {
    case SpaceProfile::Polynomial: return d2 * x * (1.0 - x);
    case SpaceProfile::Sine: return x == 1.0 ? 0.0 : d2 * std::sin(M_PI * x);
    case SpaceProfile::Skewed: return d2 * x * (1.0 - x) * (1.0 + x);
  }
  return 0.0;
}

Field manufactured_field(const SpaceTimeGrid& grid, SpaceProfile profile, int time_exponent,
                         bool time_skew) {
  Field f(grid);
  const double T = grid.T();
  std::vector<double> X(static_cast<std::size_t>(grid.N() + 1));
  for (int i = 0; i <= grid.N(); ++i)
    X[static_cast<std::size_t>(i)] = space_profile(profile, grid.x0(), grid.x(i));
  for (int j = 0; j <= grid.M(); ++j) {
    const double t = grid.t(j);
    double tf = (j == 0 || j == grid.M()) ? 0.0 : std::pow(t * (T - t), time_exponent);
    if (time_skew) tf *= 1.0 + t / T;
    for (int i = 0; i <= grid.N(); ++i) f(j, i) = tf * X[static_cast<std::size_t>(i)];
  }
  return f;
}

// ---------------------------------------------------------------------------------------
// Carleman estimate scan

std::vector<double> geometric_s_list(double start, double ratio, int count) {
  if (!(start > 0.0) || !(ratio > 1.0) || count < 1)
    throw DomainError("s list needs start > 0, ratio > 1, count >= 1");
  std::vector<double> s(static_cast<std::size_t>(count));
  double v = start;
  for (auto& x : s) {
    x = v;
    v *= ratio;
  }
  return s;
}

Field adjoint_residual(const Field& v, const TridiagonalOperator& op,
                       const PotentialModel& potential) {
  const auto& g = v.grid();
  const int N = g.N(), M = g.M();
  if (op.size() != N + 1) throw PreconditionError("operator and field sizes differ");
  if (M < 2) throw PreconditionError("adjoint residual needs M >= 2");
  const double dt = g.dt();
  Field h(g);
  std::vector<double> Av(static_cast<std::size_t>(N + 1));
  for (int j = 0; j <= M; ++j) {
    op.apply_interior(v.row(j), Av);
    for (int i = 1; i < N; ++i) {
      double vt;
      if (j == 0)
        vt = (-3.0 * v(0, i) + 4.0 * v(1, i) - v(2, i)) / (2.0 * dt);
      else if (j == M)
        vt = (3.0 * v(M, i) - 4.0 * v(M - 1, i) + v(M - 2, i)) / (2.0 * dt);
      else
        vt = (v(j + 1, i) - v(j - 1, i)) / (2.0 * dt);
      h(j, i) = vt + Av[static_cast<std::size_t>(i)] - potential.value(j, i) * v(j, i);
    }
  }
  return h;
}

namespace {

void require_weight_horizon(const SpaceTimeGrid& g, const WeightParams& params) {
  if (std::abs(g.T() - params.T) > 1e-12 * params.T)
    throw PreconditionError("field horizon differs from weight.T");
}

}  // namespace

CarlemanReport carleman_scan(const CoefficientModel& model, const WeightParams& params,
                             const PotentialModel& potential, const Field& v, const Field& h,
                             std::span<const double> s_list) {
  const SpaceTimeGrid& g = v.grid();
  require_weight_horizon(g, params);
  if (h.grid().N() != g.N() || h.grid().M() != g.M())
    throw PreconditionError("v and h live on different grids");
  const int N = g.N(), M = g.M();
  if (N < 2 || M < 2) throw PreconditionError("scan needs N, M >= 2");
  const double hx = g.h(), c1 = params.c1, x0 = model.x0();
  const CarlemanWeight base(model, params);

  const auto n = static_cast<std::size_t>(N + 1);
  std::vector<double> psi_node(n), psi_mid(n - 1), a_mid(n - 1), xsa(n);
  for (int i = 0; i <= N; ++i) {
    psi_node[static_cast<std::size_t>(i)] = base.psi(g.x(i));
    xsa[static_cast<std::size_t>(i)] = model.distance_sq_over_a(g.x(i));
  }
  for (int i = 0; i < N; ++i) {
    psi_mid[static_cast<std::size_t>(i)] = base.psi(g.midpoint(i));
    a_mid[static_cast<std::size_t>(i)] = model.a(g.midpoint(i));
  }
  const double a0 = model.a(0.0), a1 = model.a(1.0);
  std::vector<double> Th(static_cast<std::size_t>(M + 1), 0.0);
  for (int j = 1; j < M; ++j) Th[static_cast<std::size_t>(j)] = base.theta(g.t(j));
  const auto tw = time_weights(g);
  const auto sw = space_weights(g);

  // One-sided second-order boundary slopes.
  std::vector<double> vx0(static_cast<std::size_t>(M + 1)), vx1(vx0.size());
  for (int j = 0; j <= M; ++j) {
    vx0[static_cast<std::size_t>(j)] = (-3.0 * v(j, 0) + 4.0 * v(j, 1) - v(j, 2)) / (2.0 * hx);
    vx1[static_cast<std::size_t>(j)] = (3.0 * v(j, N) - 4.0 * v(j, N - 1) + v(j, N - 2)) / (2.0 * hx);
  }

  CarlemanReport r;
  r.potential_sup_norm = potential.sup_norm();
  for (double s : s_list) {
    if (!(s > 0.0)) throw DomainError("scanned s must be positive");
    // Largest exponent over the grid (psi < 0, so at the smallest Theta and largest psi).
    double scale = -std::numeric_limits<double>::infinity();
    const double psi_max = std::max(*std::max_element(psi_node.begin(), psi_node.end()),
                                    *std::max_element(psi_mid.begin(), psi_mid.end()));
    for (int j = 1; j < M; ++j) scale = std::max(scale, 2.0 * s * Th[static_cast<std::size_t>(j)] * psi_max);
    if (!std::isfinite(scale)) scale = 0.0;

    double lhs = 0.0, src = 0.0, bnd = 0.0;
    for (int j = 1; j < M; ++j) {
      const auto jk = static_cast<std::size_t>(j);
      const double th = Th[jk];
      double grad = 0.0, cubic = 0.0, source = 0.0;
      for (int i = 0; i < N; ++i) {
        const auto ik = static_cast<std::size_t>(i);
        const double e = std::exp(2.0 * s * th * psi_mid[ik] - scale);
        const double d = (v(j, i + 1) - v(j, i)) / hx;
        grad += hx * a_mid[ik] * d * d * e;
      }
      for (int i = 0; i <= N; ++i) {
        const auto ik = static_cast<std::size_t>(i);
        const double e = std::exp(2.0 * s * th * psi_node[ik] - scale);
        cubic += sw[ik] * xsa[ik] * v(j, i) * v(j, i) * e;
        source += sw[ik] * h(j, i) * h(j, i) * e;
      }
      lhs += tw[jk] * (s * th * grad + s * s * s * th * th * th * cubic);
      src += tw[jk] * source;
      const double e0 = std::exp(2.0 * s * th * psi_node.front() - scale);
      const double e1 = std::exp(2.0 * s * th * psi_node.back() - scale);
      const double f1 = a1 * th * e1 * (1.0 - x0) * vx1[jk] * vx1[jk];
      const double f0 = a0 * th * e0 * (0.0 - x0) * vx0[jk] * vx0[jk];
      bnd += tw[jk] * s * c1 * (f1 - f0);
    }
    const double rhs = src + bnd;
    double ratio;
    if (rhs > 0.0)
      ratio = lhs / rhs;
    else if (lhs == 0.0)
      ratio = 0.0;
    else {
      ratio = std::numeric_limits<double>::quiet_NaN();
      r.rhs_violation = true;
    }
    r.s_values.push_back(s);
    r.log_scale.push_back(scale);
    r.lhs.push_back(lhs);
    r.rhs_source.push_back(src);
    r.rhs_boundary.push_back(bnd);
    r.ratio.push_back(ratio);
  }

  // Smallest k with every later step non-increasing within 5% and >= 3 points remaining.
  const std::size_t count = r.ratio.size();
  for (std::size_t k = 0; k + 3 <= count; ++k) {
    bool ok = true;
    for (std::size_t m = k; m + 1 < count && ok; ++m) {
      const double a = r.ratio[m], b = r.ratio[m + 1];
      ok = std::isfinite(a) && std::isfinite(b) && b <= 1.05 * a;
    }
    if (ok) {
      r.s0_found = true;
      r.s0_observed = r.s_values[k];
      r.fitted_C = *std::max_element(r.ratio.begin() + static_cast<std::ptrdiff_t>(k), r.ratio.end());
      break;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------------------
// Caccioppoli

CaccioppoliReport caccioppoli_check(const CoefficientModel& model, const WeightParams& params,
                                    const Field& v, const Interval& omega_prime,
                                    const Interval& omega, std::span<const double> s_list) {
  const double x0 = model.x0();
  if (!(0.0 <= omega.lo && omega.lo < omega.hi && omega.hi <= 1.0))
    throw GeometryError("omega must be a nonempty subinterval of [0,1]");
  if (!(omega_prime.lo < omega_prime.hi))
    throw GeometryError("omega' must be a nonempty interval");
  if (!(omega.lo < omega_prime.lo && omega_prime.hi < omega.hi))
    throw GeometryError("omega' must lie strictly inside omega");
  if (omega_prime.lo <= x0 && x0 <= omega_prime.hi)
    throw GeometryError("x0 must lie outside the closure of omega'");

  const SpaceTimeGrid& g = v.grid();
  require_weight_horizon(g, params);
  const CarlemanWeight base(model, params);
  const int N = g.N(), M = g.M();
  const double hx = g.h();
  const auto tw = time_weights(g);

  // Cell weights: length of [x_i, x_{i+1}] inside omega'.
  std::vector<double> cell_w(static_cast<std::size_t>(N), 0.0), psi_mid(cell_w.size());
  for (int i = 0; i < N; ++i) {
    const double lo = std::max(g.x(i), omega_prime.lo), hi = std::min(g.x(i + 1), omega_prime.hi);
    cell_w[static_cast<std::size_t>(i)] = std::max(0.0, hi - lo);
    psi_mid[static_cast<std::size_t>(i)] = base.psi(g.midpoint(i));
  }

  ControlConfig om{omega.lo, omega.hi};
  const auto chi = om.indicator(g);
  CaccioppoliReport r;
  r.rhs = integrate_spacetime(g, [&](int j, int i) {
    return chi[static_cast<std::size_t>(i)] * v(j, i) * v(j, i);
  });

  for (double s : s_list) {
    if (!(s > 0.0)) throw DomainError("scanned s must be positive");
    double psi_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cell_w.size(); ++i)
      if (cell_w[i] > 0.0) psi_max = std::max(psi_max, psi_mid[i]);
    double scale = -std::numeric_limits<double>::infinity();
    for (int j = 1; j < M; ++j) scale = std::max(scale, 2.0 * s * base.theta(g.t(j)) * psi_max);
    if (!std::isfinite(scale)) scale = 0.0;

    double lhs = 0.0;
    for (int j = 1; j < M; ++j) {
      const double th = base.theta(g.t(j));
      double row = 0.0;
      for (int i = 0; i < N; ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (cell_w[k] == 0.0) continue;
        const double d = (v(j, i + 1) - v(j, i)) / hx;
        row += cell_w[k] * d * d * std::exp(2.0 * s * th * psi_mid[k] - scale);
      }
      lhs += tw[static_cast<std::size_t>(j)] * row;
    }
    const double log_lhs = lhs > 0.0 ? std::log(lhs) + scale : -std::numeric_limits<double>::infinity();
    double log_ratio, ratio;
    if (r.rhs > 0.0) {
      log_ratio = log_lhs - std::log(r.rhs);
      ratio = flushed_exp(log_ratio);
    } else {
      log_ratio = -std::numeric_limits<double>::infinity();
      ratio = 0.0;
    }
    r.s_values.push_back(s);
    r.log_lhs.push_back(log_lhs);
    r.ratio.push_back(ratio);
    r.log_ratio.push_back(log_ratio);
    r.max_ratio = std::max(r.max_ratio, ratio);
  }
  return r;
}

}  // namespace ideg
