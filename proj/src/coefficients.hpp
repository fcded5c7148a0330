#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ideg {

class SpaceTimeGrid;

/// WD: K in (0,1). SD: K in [1,2).
enum class DegeneracyClass { WeaklyDegenerate, StronglyDegenerate };

const char* to_string(DegeneracyClass c) noexcept;

/// a(x) = |x - x0|^alpha, 0 < alpha < 2.
struct PowerLaw {
  double alpha = 0.5;
};

/// Sampled coefficient on [0,1]. The caller supplies a' alongside a; tables are never
/// differentiated numerically. x0 must be one of the nodes, with a = 0 there.
struct Tabulated {
  std::vector<double> nodes;
  std::vector<double> a_values;
  std::vector<double> a_prime_values;
};

/// Constant, nondegenerate coefficient. Used as the classical heat-equation reference.
struct Uniform {
  double value = 1.0;
};

using CoefficientKind = std::variant<PowerLaw, Tabulated, Uniform>;

/// Diffusion coefficient with an interior degeneracy at x0.
///
/// Immutable after construction. All evaluators are pure and safe to call concurrently.
class CoefficientModel {
 public:
  /// K = alpha. theta defaults to K.
  static CoefficientModel power_law(double x0, double alpha,
                                    std::optional<double> theta = std::nullopt);
  static CoefficientModel tabulated(double x0, Tabulated table, double K,
                                    std::optional<double> theta = std::nullopt);
  static CoefficientModel uniform(double x0, double value, double K = 0.5);

  double x0() const noexcept { return x0_; }
  double K() const noexcept { return K_; }
  double theta() const noexcept { return theta_; }
  const CoefficientKind& kind() const noexcept { return kind_; }
  std::string kind_name() const;

  bool is_degenerate() const noexcept;
  DegeneracyClass degeneracy_class() const noexcept;

  /// a(x) for x in [0,1]; throws DomainError outside.
  double a(double x) const;

  /// a'(x) for x in [0,1], x != x0; throws SingularPointError at x0 for degenerate models.
  double a_prime(double x) const;

  /// (x - x0)^2 / a(x), extended by its limit 0 at x0 (valid because K < 2).
  double distance_sq_over_a(double x) const;

  /// (2a - (x - x0) a') / a, extended at x0 by the local-model limit 2 - K.
  /// For the power law this is the constant 2 - alpha.
  double carleman_factor(double x) const;

  /// (x - x0) a'(x) / a(x) at x != x0.
  double growth_ratio(double x) const;

  /// Default tolerance for the pointwise hypothesis slack: 1e-12 for closed forms,
  /// 1e-9 for tables (interpolation error).
  double default_slack_tolerance() const noexcept;

 private:
  CoefficientModel(double x0, CoefficientKind kind, double K, double theta);

  double tab_a(const Tabulated& t, double x) const;
  double tab_a_prime(const Tabulated& t, double x) const;

  double x0_;
  CoefficientKind kind_;
  double K_;
  double theta_;
  std::size_t x0_node_ = 0;  // tabulated only
};

/// Verdict of a sided monotonicity test.
///
/// The tested ratio f must be nonincreasing on [0, x0) and nondecreasing on (x0, 1].
struct MonotonicityVerdict {
  bool pass = true;
  double worst_violation = 0.0;  ///< largest relative step in the wrong direction
  std::string failing_side;      ///< "left" / "right" / empty
  double failure_lo = 0.0;       ///< span of the failing cells on that side
  double failure_hi = 0.0;
};

struct HypothesisReport {
  DegeneracyClass degeneracy_class = DegeneracyClass::WeaklyDegenerate;
  double K = 0.0;
  double theta = 0.0;
  double tolerance = 0.0;
  /// max over samples of (x-x0)a'/a - K; must be <= tolerance.
  double max_excess = 0.0;
  /// max over samples of |(x-x0)a'/a - K|; zero for pure powers.
  double max_abs_slack = 0.0;
  bool growth_pass = true;
  MonotonicityVerdict power_ratio;  ///< x -> |x-x0|^K / a
  MonotonicityVerdict theta_ratio;  ///< x -> a / |x-x0|^theta
  int sample_count = 0;

  bool pass() const noexcept { return growth_pass && power_ratio.pass && theta_ratio.pass; }
};

/// Tests the growth bound (x-x0)a' <= K a, the monotonicity of |x-x0|^K/a, and the
/// monotonicity of a/|x-x0|^theta on the space nodes of `grid`. Violations are reported,
/// never thrown. A negative `tolerance` selects the model default.
HypothesisReport check_hypotheses(const CoefficientModel& model, const SpaceTimeGrid& grid,
                                  double tolerance = -1.0);

/// Sided monotonicity test on samples (xs[i], f[i]) around x0. A step in the wrong direction
/// smaller than rel_tol * max|f| on that side is accepted.
MonotonicityVerdict sided_monotonicity(const std::vector<double>& xs,
                                       const std::vector<double>& f, double x0,
                                       double rel_tol = 1e-12);

/// Integral of a^(-power) over [0,1] minus (x0-delta, x0+delta), by adaptive Gauss-Kronrod
/// on panels graded toward the excised gap. Used to exhibit the integrability dichotomy:
/// 1/a is integrable iff K < 1, 1/sqrt(a) for every K < 2.
double excised_inverse_power_integral(const CoefficientModel& model, double power,
                                      double delta);

}  // namespace ideg
