// Acceptance battery: one PASS/FAIL line per criterion, detail lines indented below it.
// Exit status 0 iff every criterion passes.

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "config.hpp"
#include "control.hpp"
#include "grid.hpp"
#include "inequalities.hpp"
#include "random.hpp"
#include "solvers.hpp"
#include "weights.hpp"
#include "workflows.hpp"

using namespace ideg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4)));
};

void Outcome::check(bool ok, const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  details.push_back(std::string(ok ? "ok   " : "FAIL ") + buf);
  pass = pass && ok;
}

double rel_change(double a, double b) { return std::abs(b - a) / std::abs(a); }

WeightParams weight_for(const CoefficientModel& m, double T) { return {T, 1.0, 1.1 * c2_min(m), 1.0}; }

std::vector<double> dirichlet_random(const SpaceTimeGrid& g, Rng& rng) {
  std::vector<double> u(static_cast<std::size_t>(g.N() + 1), 0.0);
  for (int i = 1; i < g.N(); ++i) u[static_cast<std::size_t>(i)] = rng.uniform(-1.0, 1.0);
  return u;
}

std::vector<double> sine(const SpaceTimeGrid& g) {
  std::vector<double> u(static_cast<std::size_t>(g.N() + 1), 0.0);
  for (int i = 1; i < g.N(); ++i) u[static_cast<std::size_t>(i)] = std::sin(M_PI * g.x(i));
  return u;
}

// ---------------------------------------------------------------------------------------

Outcome hypothesis_equality() {
  Outcome o;
  for (double alpha : {0.25, 0.5, 1.0, 1.5, 1.9}) {
    const auto m = CoefficientModel::power_law(0.3, alpha);
    const auto rep = check_hypotheses(m, SpaceTimeGrid::create(1000, 1, 1.0, 0.3));
    o.check(rep.max_abs_slack < 1e-12, "alpha=%g slack=%.3g (< 1e-12)", alpha, rep.max_abs_slack);
  }
  return o;
}

Outcome hardy_poincare() {
  Outcome o;
  for (double q : {1.2, 1.5, 1.8})
    for (double x0 : {0.3, 0.5}) {
      const auto p = HardyWeight::distance_power(x0, q);
      const auto coarse = hp_verify(p, SpaceTimeGrid::create(1000, 1, 1.0, x0), 50, 0);
      const auto fine = hp_verify(p, SpaceTimeGrid::create(2000, 1, 1.0, x0), 50, 0);
      const double bound = 4.0 / ((q - 1) * (q - 1));
      o.check(coarse.rayleigh_estimate <= bound * 1.05, "q=%g x0=%g rayleigh=%.6g (<= %.6g)", q, x0,
              coarse.rayleigh_estimate, bound * 1.05);
      o.check(coarse.battery_max_ratio <= coarse.rayleigh_estimate * 1.02,
              "q=%g x0=%g battery_max=%.6g (<= %.6g)", q, x0, coarse.battery_max_ratio,
              coarse.rayleigh_estimate * 1.02);
      const double change = rel_change(coarse.rayleigh_estimate, fine.rayleigh_estimate);
      o.check(change < 0.05, "q=%g x0=%g refinement N=1000->2000 change=%.4f (< 0.05)", q, x0, change);
    }
  return o;
}

Outcome decomposition_identity() {
  Outcome o;
  struct Case {
    SpaceProfile profile;
    int exponent;
    bool skew;
  };
  const Case cases[] = {{SpaceProfile::Polynomial, 7, false},
                        {SpaceProfile::Sine, 9, false},
                        {SpaceProfile::Skewed, 7, true}};
  for (auto [alpha, x0] : {std::pair{0.5, 0.3}, std::pair{1.5, 0.5}}) {
    const auto m = CoefficientModel::power_law(x0, alpha);
    const auto gc = SpaceTimeGrid::create(200, 400, 2.0, x0);
    const auto gf = SpaceTimeGrid::create(400, 800, 2.0, x0);
    for (const auto& c : cases) {
      const Field wc = manufactured_field(gc, c.profile, c.exponent, c.skew);
      const Field wf = manufactured_field(gf, c.profile, c.exponent, c.skew);
      for (double s : {1.0, 10.0}) {
        auto p = weight_for(m, 2.0);
        p.s = s;
        const double rc = carleman_identity_check(m, p, wc).relative_residual;
        const double rf = carleman_identity_check(m, p, wf).relative_residual;
        o.check(rc / rf >= 3.0 && rf < 5e-2,
                "alpha=%g x0=%g %s s=%g residual %.3g -> %.3g (factor %.2f >= 3, fine < 5e-2)", alpha,
                x0, to_string(c.profile), s, rc, rf, rc / rf);
      }
    }
  }
  return o;
}

Outcome carleman() {
  Outcome o;
  const auto s_list = geometric_s_list(1.0, 1.5, 10);
  const auto m = CoefficientModel::power_law(0.3, 0.5);
  const auto params = weight_for(m, 2.0);
  for (double c : {0.0, 1.0}) {
    const auto pot = c == 0.0 ? PotentialModel::zero() : PotentialModel::constant(c);
    double fitted[2];
    int level = 0;
    for (int N : {200, 400}) {
      const auto g = SpaceTimeGrid::create(N, 2 * N, 2.0, 0.3);
      const Field v = manufactured_field(g, SpaceProfile::Polynomial, 1);
      const Field h = adjoint_residual(v, assemble_operator(m, g), pot);
      const auto r = carleman_scan(m, params, pot, v, h, s_list);
      const bool finite = std::all_of(r.ratio.begin(), r.ratio.end(),
                                      [](double x) { return std::isfinite(x); });
      bool monotone = r.s0_found;
      for (std::size_t k = 0; k + 1 < r.ratio.size(); ++k)
        if (r.s_values[k] >= r.s0_observed && r.ratio[k + 1] > 1.05 * r.ratio[k]) monotone = false;
      o.check(finite && !r.rhs_violation, "c=%g N=%d ratios finite for all %zu s", c, N, s_list.size());
      o.check(monotone, "c=%g N=%d non-increasing (5%%) beyond s0=%g", c, N, r.s0_observed);
      fitted[level++] = r.fitted_C;
    }
    const double change = rel_change(fitted[0], fitted[1]);
    o.check(change < 0.25, "c=%g fitted_C %.6g -> %.6g change=%.4f (< 0.25)", c, fitted[0], fitted[1],
            change);
  }
  return o;
}

Outcome solver_correctness() {
  Outcome o;
  {
    const auto g = SpaceTimeGrid::create(200, 400, 0.1, 0.5);
    const auto a1 = CoefficientModel::uniform(0.5, 1.0);
    const auto u0 = sine(g);
    const Field u = solve_forward(a1, PotentialModel::zero(), g, u0, nullptr, {0.0, 1.0});
    const Field v = solve_adjoint(a1, PotentialModel::zero(), g, u0, nullptr);
    double eu = 0.0, ev = 0.0;
    for (int i = 0; i <= g.N(); ++i) {
      const double exact = std::exp(-M_PI * M_PI * 0.1) * std::sin(M_PI * g.x(i));
      eu = std::max(eu, std::abs(u(g.M(), i) - exact));
      ev = std::max(ev, std::abs(v(0, i) - exact));
    }
    o.check(eu < 1e-3 && ev < 1e-3, "heat mode max error forward=%.3g adjoint=%.3g (< 1e-3)", eu, ev);
  }
  {
    const auto m = CoefficientModel::power_law(0.3, 0.5);
    const auto g = SpaceTimeGrid::create(200, 400, 0.5, 0.3);
    const ParabolicSolver solver(m, PotentialModel::zero(), g);
    Rng rng(20240);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const auto u0 = dirichlet_random(g, rng), vT = dirichlet_random(g, rng);
      const double lhs = inner(solver.forward_terminal(u0, nullptr), vT, g);
      const double rhs = inner(u0, solver.adjoint(vT).row(0), g);
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
    }
    o.check(worst < 1e-8, "adjoint identity over 20 random pairs: max rel error %.3g (< 1e-8)", worst);
  }
  for (double alpha : {0.5, 1.5}) {
    const auto m = CoefficientModel::power_law(0.3, alpha);
    const auto g = SpaceTimeGrid::create(200, 400, 0.5, 0.3);
    Rng rng(7);
    const Field v = solve_adjoint(m, PotentialModel::zero(), g, dirichlet_random(g, rng), nullptr);
    const auto tr = energy_trace(v, m);
    const double top = *std::max_element(tr.begin(), tr.end());
    double worst = 0.0;
    for (std::size_t j = 1; j < tr.size(); ++j) worst = std::max(worst, (tr[j - 1] - tr[j]) / top);
    o.check(worst <= 1e-10, "alpha=%g energy_trace largest relative drop %.3g (<= 1e-10)", alpha, worst);
  }
  return o;
}

Outcome observability() {
  Outcome o;
  const auto m = CoefficientModel::power_law(0.3, 0.5);
  const ControlConfig omega{0.2, 0.5};
  double C[2];
  int level = 0;
  for (int N : {200, 400}) {
    const auto g = SpaceTimeGrid::create(N, 2 * N, 0.5, 0.3);
    const auto r = estimate_observability(m, PotentialModel::zero(), g, omega, {10, 10, 20, 0});
    o.check(std::isfinite(r.C_T_estimate) && r.C_T_estimate > 0.0, "N=%d C_T=%.6g finite, positive", N,
            r.C_T_estimate);
    o.check(!r.violation, "N=%d backward-uniqueness flag clear", N);
    C[level++] = r.C_T_estimate;
  }
  const double change = rel_change(C[0], C[1]);
  o.check(change <= 0.25, "C_T change N=200->400 %.4f (<= 0.25)", change);
  return o;
}

Outcome null_control() {
  Outcome o;
  {
    const auto m = CoefficientModel::power_law(0.3, 0.5);
    const auto g = SpaceTimeGrid::create(200, 400, 0.5, 0.3);
    const ControlConfig omega{0.2, 0.5};
    std::vector<double> u0(static_cast<std::size_t>(g.N() + 1));
    for (int i = 0; i <= g.N(); ++i) u0[static_cast<std::size_t>(i)] = g.x(i) * (1 - g.x(i));
    const auto sol = synthesize_null_control(m, PotentialModel::zero(), g, omega, u0, 1e-2, 500, 1e-8);
    const double ratio = sol.terminal_norm / sol.initial_norm;
    o.check(ratio <= 1e-2 && sol.cg_iterations <= 500,
            "degenerate preset terminal/initial=%.4g (<= 1e-2) after %d iterations (<= 500)", ratio,
            sol.cg_iterations);
    bool decreasing = true;
    for (std::size_t k = 1; k < sol.objective_history.size(); ++k)
      decreasing = decreasing && sol.objective_history[k] < sol.objective_history[k - 1];
    o.check(decreasing, "J strictly decreasing over %zu values", sol.objective_history.size());
    const auto chi = omega.indicator(g);
    double outside = 0.0;
    for (int j = 0; j <= g.M(); ++j)
      for (int i = 0; i <= g.N(); ++i)
        if (chi[static_cast<std::size_t>(i)] == 0.0) outside = std::max(outside, std::abs(sol.h(j, i)));
    o.check(outside == 0.0, "max |h| outside omega = %g", outside);
  }
  {
    const auto m = CoefficientModel::uniform(0.5, 1.0);
    const auto g = SpaceTimeGrid::create(100, 200, 0.5, 0.5);
    const auto sol = synthesize_null_control(m, PotentialModel::zero(), g, {0.2, 0.8}, sine(g), 1e-3, 200);
    const double ratio = sol.terminal_norm / sol.initial_norm;
    o.check(ratio <= 1e-3 && sol.cg_iterations <= 200,
            "a=1 preset terminal/initial=%.4g (<= 1e-3) after %d iterations (<= 200)", ratio,
            sol.cg_iterations);
  }
  return o;
}

std::map<std::string, std::string> csv_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[e.path().filename().string()] = ss.str();
  }
  return out;
}

Outcome determinism(const fs::path& preset, const fs::path& out_dir) {
  Outcome o;
  fs::remove_all(out_dir);
  const auto cfg = RunConfig::load(preset, {}, out_dir.string(), 0u);
  (void)run_workflow("all", cfg);
  const auto first = csv_bytes(out_dir);
  (void)run_workflow("all", cfg);
  const auto second = csv_bytes(out_dir);
  o.check(!first.empty(), "%zu CSV files written", first.size());
  for (const auto& [name, bytes] : first) {
    const auto it = second.find(name);
    o.check(it != second.end() && it->second == bytes, "%s byte-identical (%zu bytes)", name.c_str(),
            bytes.size());
  }
  o.check(first.size() == second.size(), "same file set");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path source_dir = argc > 1 ? fs::path(argv[1]) : fs::current_path();
  const fs::path work_dir = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "ideg_acceptance";

  struct Criterion {
    const char* name;
    double limit_seconds;  // 0: no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"1 hypothesis equality", 1.0, hypothesis_equality},
      {"2 hardy-poincare", 30.0, hardy_poincare},
      {"3 decomposition identity", 120.0, decomposition_identity},
      {"4 carleman scan", 180.0, carleman},
      {"5 solver correctness", 60.0, solver_correctness},
      {"6 observability", 120.0, observability},
      {"7 null control", 300.0, null_control},
      {"8 determinism", 0.0,
       [&] { return determinism(source_dir / "configs/presets/alpha0.5_x0_0.3.json", work_dir / "all"); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.check(false, "exception: %s", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_seconds > 0.0) out.check(secs < c.limit_seconds, "runtime %.2f s (< %g s)", secs, c.limit_seconds);
    failed += out.pass ? 0 : 1;
    std::printf("%s criterion %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", c.name, secs);
    for (const auto& d : out.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed),
              criteria.size());
  return failed == 0 ? 0 : 1;
}
