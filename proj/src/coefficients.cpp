#include "coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "error.hpp"
#include "grid.hpp"

namespace ideg {

namespace {

void require_unit_interval(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream os;
    os << what << ": x = " << x << " outside [0,1]";
    throw DomainError(os.str());
  }
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

const char* to_string(DegeneracyClass c) noexcept {
  return c == DegeneracyClass::WeaklyDegenerate ? "WD" : "SD";
}

CoefficientModel::CoefficientModel(double x0, CoefficientKind kind, double K, double theta)
    : x0_(x0), kind_(std::move(kind)), K_(K), theta_(theta) {}

CoefficientModel CoefficientModel::power_law(double x0, double alpha,
                                             std::optional<double> theta) {
  if (!(x0 > 0.0 && x0 < 1.0)) throw InvalidModelError("x0 must lie strictly inside (0,1)");
  if (!(alpha > 0.0 && alpha < 2.0))
    throw InvalidModelError("power-law exponent alpha must lie in (0,2)");
  const double th = theta.value_or(alpha);
  if (!(th > 0.0 && th <= alpha)) throw InvalidModelError("theta must lie in (0, K]");
  return CoefficientModel(x0, PowerLaw{alpha}, alpha, th);
}

CoefficientModel CoefficientModel::tabulated(double x0, Tabulated table, double K,
                                             std::optional<double> theta) {
  if (!(x0 > 0.0 && x0 < 1.0)) throw InvalidModelError("x0 must lie strictly inside (0,1)");
  if (!(K > 0.0 && K < 2.0)) throw InvalidModelError("K must lie in (0,2)");
  const double th = theta.value_or(K);
  if (!(th > 0.0 && th <= K)) throw InvalidModelError("theta must lie in (0, K]");
  const auto n = table.nodes.size();
  if (n < 3 || table.a_values.size() != n || table.a_prime_values.size() != n)
    throw InvalidModelError("table needs >= 3 rows with matching x, a, a_prime columns");
  if (table.nodes.front() != 0.0 || table.nodes.back() != 1.0)
    throw InvalidModelError("table nodes must start at 0 and end at 1");
  for (std::size_t k = 1; k < n; ++k)
    if (!(table.nodes[k] > table.nodes[k - 1]))
      throw InvalidModelError("table nodes must be strictly increasing");

  auto it = std::find_if(table.nodes.begin(), table.nodes.end(),
                         [&](double x) { return std::abs(x - x0) <= 1e-14; });
  if (it == table.nodes.end()) throw InvalidModelError("x0 must be a table node");
  const auto k0 = static_cast<std::size_t>(it - table.nodes.begin());
  table.nodes[k0] = x0;
  if (table.a_values[k0] != 0.0) throw InvalidModelError("a(x0) must be 0");
  for (std::size_t k = 0; k < n; ++k)
    if (k != k0 && !(table.a_values[k] > 0.0))
      throw InvalidModelError("a must be positive away from x0");

  CoefficientModel m(x0, std::move(table), K, th);
  m.x0_node_ = k0;
  return m;
}

CoefficientModel CoefficientModel::uniform(double x0, double value, double K) {
  if (!(x0 > 0.0 && x0 < 1.0)) throw InvalidModelError("x0 must lie strictly inside (0,1)");
  if (!(value > 0.0)) throw InvalidModelError("uniform coefficient must be positive");
  if (!(K > 0.0 && K < 2.0)) throw InvalidModelError("K must lie in (0,2)");
  return CoefficientModel(x0, Uniform{value}, K, K);
}

std::string CoefficientModel::kind_name() const {
  return std::visit(overloaded{[](const PowerLaw&) { return std::string("power_law"); },
                               [](const Tabulated&) { return std::string("tabulated"); },
                               [](const Uniform&) { return std::string("uniform"); }},
                    kind_);
}

bool CoefficientModel::is_degenerate() const noexcept {
  return !std::holds_alternative<Uniform>(kind_);
}

DegeneracyClass CoefficientModel::degeneracy_class() const noexcept {
  return K_ < 1.0 ? DegeneracyClass::WeaklyDegenerate : DegeneracyClass::StronglyDegenerate;
}

double CoefficientModel::tab_a(const Tabulated& t, double x) const {
  auto hi = std::upper_bound(t.nodes.begin(), t.nodes.end(), x);
  if (hi == t.nodes.end()) return t.a_values.back();
  const auto k = static_cast<std::size_t>(hi - t.nodes.begin());
  if (k == 0) return t.a_values.front();
  const double xl = t.nodes[k - 1], xr = t.nodes[k];
  const double w = (x - xl) / (xr - xl);
  return (1.0 - w) * t.a_values[k - 1] + w * t.a_values[k];
}

double CoefficientModel::tab_a_prime(const Tabulated& t, double x) const {
  auto hi = std::upper_bound(t.nodes.begin(), t.nodes.end(), x);
  if (hi == t.nodes.end()) return t.a_prime_values.back();
  const auto k = static_cast<std::size_t>(hi - t.nodes.begin());
  if (k == 0) return t.a_prime_values.front();
  // The sample at x0 is meaningless (a' may be unbounded there); cells touching x0 take
  // the value at their other end.
  if (k - 1 == x0_node_) return t.a_prime_values[k];
  if (k == x0_node_) return t.a_prime_values[k - 1];
  const double xl = t.nodes[k - 1], xr = t.nodes[k];
  const double w = (x - xl) / (xr - xl);
  return (1.0 - w) * t.a_prime_values[k - 1] + w * t.a_prime_values[k];
}

double CoefficientModel::a(double x) const {
  require_unit_interval(x, "eval_a");
  return std::visit(overloaded{[&](const PowerLaw& p) { return std::pow(std::abs(x - x0_), p.alpha); },
                               [&](const Tabulated& t) { return tab_a(t, x); },
                               [&](const Uniform& u) { return u.value; }},
                    kind_);
}

double CoefficientModel::a_prime(double x) const {
  require_unit_interval(x, "eval_a_prime");
  if (x == x0_ && is_degenerate())
    throw SingularPointError("a' is not defined at the degeneracy point x0");
  return std::visit(
      overloaded{[&](const PowerLaw& p) {
                   return p.alpha * std::pow(std::abs(x - x0_), p.alpha - 1.0) * sign(x - x0_);
                 },
                 [&](const Tabulated& t) { return tab_a_prime(t, x); },
                 [&](const Uniform&) { return 0.0; }},
      kind_);
}

double CoefficientModel::distance_sq_over_a(double x) const {
  require_unit_interval(x, "distance_sq_over_a");
  if (x == x0_) return 0.0;
  if (const auto* p = std::get_if<PowerLaw>(&kind_))
    return std::pow(std::abs(x - x0_), 2.0 - p->alpha);
  const double d = x - x0_;
  return d * d / a(x);
}

double CoefficientModel::carleman_factor(double x) const {
  require_unit_interval(x, "carleman_factor");
  if (const auto* p = std::get_if<PowerLaw>(&kind_)) return 2.0 - p->alpha;
  if (std::holds_alternative<Uniform>(kind_)) return 2.0;
  if (x == x0_) return 2.0 - K_;
  return 2.0 - growth_ratio(x);
}

double CoefficientModel::growth_ratio(double x) const {
  if (const auto* p = std::get_if<PowerLaw>(&kind_)) {
    if (x == x0_) throw SingularPointError("growth ratio undefined at x0");
    return p->alpha;
  }
  return (x - x0_) * a_prime(x) / a(x);
}

double CoefficientModel::default_slack_tolerance() const noexcept {
  return std::holds_alternative<Tabulated>(kind_) ? 1e-9 : 1e-12;
}

MonotonicityVerdict sided_monotonicity(const std::vector<double>& xs,
                                       const std::vector<double>& f, double x0,
                                       double rel_tol) {
  MonotonicityVerdict v;
  // Left: nonincreasing on [0, x0). Right: nondecreasing on (x0, 1].
  auto scan = [&](bool left) {
    double scale = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      if ((left && xs[i] < x0) || (!left && xs[i] > x0)) scale = std::max(scale, std::abs(f[i]));
    const double tol = rel_tol * scale;
    const char* side = left ? "left" : "right";
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const bool in_side = left ? (xs[i + 1] < x0) : (xs[i] > x0);
      if (!in_side) continue;
      const double step = left ? f[i + 1] - f[i] : f[i] - f[i + 1];  // > 0 is wrong-way
      if (step > tol) {
        const double rel = scale > 0.0 ? step / scale : step;
        v.worst_violation = std::max(v.worst_violation, rel);
        // The first failing side determines the reported span.
        if (v.pass) {
          v.pass = false;
          v.failing_side = side;
          v.failure_lo = xs[i];
          v.failure_hi = xs[i + 1];
        } else if (v.failing_side == side) {
          v.failure_lo = std::min(v.failure_lo, xs[i]);
          v.failure_hi = std::max(v.failure_hi, xs[i + 1]);
        }
      }
    }
  };
  scan(true);
  scan(false);
  return v;
}

HypothesisReport check_hypotheses(const CoefficientModel& model, const SpaceTimeGrid& grid,
                                  double tolerance) {
  HypothesisReport r;
  r.degeneracy_class = model.degeneracy_class();
  r.K = model.K();
  r.theta = model.theta();
  r.tolerance = tolerance < 0.0 ? model.default_slack_tolerance() : tolerance;

  const double x0 = model.x0();
  std::vector<double> xs, power_ratio, theta_ratio;
  for (int i = 0; i <= grid.N(); ++i) {
    if (i == grid.x0_index()) continue;
    const double x = grid.x(i);
    const double a = model.a(x);
    const double g = model.growth_ratio(x);
    const double slack = g - model.K();
    r.max_excess = r.sample_count == 0 ? slack : std::max(r.max_excess, slack);
    r.max_abs_slack = std::max(r.max_abs_slack, std::abs(slack));
    ++r.sample_count;
    const double d = std::abs(x - x0);
    xs.push_back(x);
    power_ratio.push_back(std::pow(d, model.K()) / a);
    theta_ratio.push_back(a / std::pow(d, model.theta()));
  }
  r.growth_pass = r.max_excess <= r.tolerance;
  const double mono_tol = std::max(r.tolerance, 1e-12);
  r.power_ratio = sided_monotonicity(xs, power_ratio, x0, mono_tol);
  r.theta_ratio = sided_monotonicity(xs, theta_ratio, x0, mono_tol);
  return r;
}

double excised_inverse_power_integral(const CoefficientModel& model, double power,
                                      double delta) {
  const double x0 = model.x0();
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  auto f = [&](double x) { return std::pow(model.a(x), -power); };
  using boost::math::quadrature::gauss_kronrod;
  auto side = [&](double near, double far) {
    // Panels [near + d_k, near + d_{k+1}] with d doubling from delta.
    const double dir = far > near ? 1.0 : -1.0;
    const double length = std::abs(far - near);
    double total = 0.0;
    double lo = delta;
    while (lo < length) {
      const double hi = std::min(2.0 * lo, length);
      const double a = near + dir * lo, b = near + dir * hi;
      total += gauss_kronrod<double, 31>::integrate(f, std::min(a, b), std::max(a, b), 8, 1e-12);
      lo = hi;
    }
    return total;
  };
  return side(x0, 0.0) + side(x0, 1.0);
}

}  // namespace ideg
