#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "coefficients.hpp"
#include "error.hpp"
#include "weights.hpp"

using namespace ideg;

namespace {

// b(x) = int_{x0}^x (y - x0)/a(y) dy for a = |y - x0|^alpha, by adaptive Gauss-Kronrod in
// the distance r = u^10 (bounded integrand; distances kept exact instead of x0 + r - x0).
double b_quadrature(const CoefficientModel& m, double alpha, double x) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double u) {
    const double r = std::pow(u, 10);
    return u == 0.0 ? 0.0 : 10.0 * std::pow(u, 9) * r / std::pow(r, alpha);
  };
  const double L = std::abs(x - m.x0());
  return gauss_kronrod<double, 61>::integrate(f, 0.0, std::pow(L, 0.1), 10, 1e-12);
}

Tabulated table_of(const CoefficientModel& m, int n) {
  Tabulated t;
  for (int i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) / n;
    t.nodes.push_back(x);
    t.a_values.push_back(m.a(x));
    t.a_prime_values.push_back(x == m.x0() ? 0.0 : m.a_prime(x));
  }
  return t;
}

}  // namespace

TEST(Weights, C2MinExamples) {
  const double wd = c2_min(CoefficientModel::power_law(0.3, 0.5));
  EXPECT_NEAR(wd, std::max(0.49 / (std::sqrt(0.7) * 1.5), 0.09 / (std::sqrt(0.3) * 1.5)), 1e-15);
  EXPECT_NEAR(wd, 0.390441, 1e-6);
  EXPECT_DOUBLE_EQ(c2_min(CoefficientModel::power_law(0.5, 1.0)), 0.5);
  EXPECT_NEAR(c2_min(CoefficientModel::power_law(0.5, 1.5)), std::sqrt(2.0), 1e-12);
}

TEST(Weights, C2MinIsMaxOfB) {
  // For a power law, c2_min = max(b(0), b(1)): psi < 0 iff c2 > c2_min.
  for (double alpha : {0.5, 1.0, 1.5}) {
    const auto m = CoefficientModel::power_law(0.3, alpha);
    const double bmax = std::max(b_quadrature(m, alpha, 0.0), b_quadrature(m, alpha, 1.0));
    EXPECT_NEAR(c2_min(m), bmax, 1e-10 * bmax);
  }
}

TEST(Weights, ThetaExamples) {
  const WeightParams p1{1.0, 1.0, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(theta(p1, 0.5), 256.0);
  EXPECT_NEAR(theta(p1, 0.25), std::pow(0.1875, -4), 1e-9);
  EXPECT_NEAR(theta(p1, 0.25), 809.086, 1e-3);
  EXPECT_DOUBLE_EQ(theta({2.0, 1.0, 1.0, 1.0}, 1.0), 1.0);
  EXPECT_THROW(theta(p1, 0.0), DomainError);
  EXPECT_THROW(theta(p1, 1.0), DomainError);
}

TEST(Weights, ThetaDerivativesMatchFiniteDifferences) {
  const WeightParams p{2.0, 1.0, 1.0, 1.0};
  for (double t : {0.3, 0.7, 1.0, 1.6}) {
    const double e = 1e-5;
    const double d1 = (theta(p, t + e) - theta(p, t - e)) / (2 * e);
    const double d2 = (theta(p, t + e) - 2 * theta(p, t) + theta(p, t - e)) / (e * e);
    EXPECT_NEAR(theta_dot(p, t), d1, 1e-6 * std::max(1.0, std::abs(d1)));
    EXPECT_NEAR(theta_ddot(p, t), d2, 1e-4 * std::max(1.0, std::abs(d2)));
  }
}

TEST(Weights, PsiExamples) {
  const auto m = CoefficientModel::power_law(0.3, 0.5);
  const WeightParams p{1.0, 1.0, 1.0, 1.0};
  EXPECT_NEAR(psi(p, m, 0.8), std::pow(0.5, 1.5) / 1.5 - 1.0, 1e-14);
  EXPECT_NEAR(psi(p, m, 0.8), -0.7642977, 1e-7);
  EXPECT_DOUBLE_EQ(psi(p, m, 0.3), -1.0);

  const auto m1 = CoefficientModel::power_law(0.5, 1.0);
  const WeightParams q{1.0, 2.0, 0.6, 1.0};
  EXPECT_NEAR(psi(q, m1, 0.0), -0.2, 1e-14);
  EXPECT_NEAR(2.0 * (b_quadrature(m1, 1.0, 0.0) - 0.6), -0.2, 1e-12);
}

TEST(Weights, ClosedFormBMatchesQuadrature) {
  for (double alpha : {0.25, 0.5, 1.0, 1.5, 1.9}) {
    const auto m = CoefficientModel::power_law(0.3, alpha);
    const CarlemanWeight w(m, {1.0, 1.0, 1.1 * c2_min(m), 1.0});
    for (int i = 0; i <= 1000; ++i) {
      const double x = i / 1000.0;
      const double ref = b_quadrature(m, alpha, x);
      EXPECT_DOUBLE_EQ(m.a(x), std::pow(std::abs(x - 0.3), alpha));
      EXPECT_NEAR(w.b(x), ref, 1e-8 * std::max(ref, 1e-12)) << alpha << " " << x;
    }
  }
}

TEST(Weights, TabulatedBConvergesToClosedForm) {
  // Composite trapezoid on the table: the integrand |y - x0|^{1-alpha} limits the error to
  // O(h^{2-alpha}).
  for (double alpha : {0.5, 1.5}) {
    const auto pl = CoefficientModel::power_law(0.3, alpha);
    const WeightParams p{1.0, 1.0, 1.1 * c2_min(pl), 1.0};
    const CarlemanWeight wp(pl, p);
    auto max_err = [&](int n) {
      const CarlemanWeight wt(CoefficientModel::tabulated(0.3, table_of(pl, n), alpha), p);
      double e = 0.0;
      for (int i = 0; i <= 200; ++i) e = std::max(e, std::abs(wt.b(i / 200.0) - wp.b(i / 200.0)));
      return e;
    };
    const double e1 = max_err(200), e2 = max_err(400);
    EXPECT_LT(e1, 5e-3) << alpha;
    EXPECT_GT(std::log2(e1 / e2), 2.0 - alpha - 0.15) << alpha;
  }
}

TEST(Weights, PsiSignAndBounds) {
  for (double alpha : {0.5, 1.0, 1.5}) {
    for (double x0 : {0.3, 0.5}) {
      const auto m = CoefficientModel::power_law(x0, alpha);
      const WeightParams p{2.0, 1.5, 1.001 * c2_min(m), 1.0};
      const CarlemanWeight w(m, p);
      double prev_left = 0.0, prev_right = 0.0;
      for (int i = 0; i <= 2000; ++i) {
        const double x = i / 2000.0;
        EXPECT_LT(w.psi(x), 0.0);
        EXPECT_GE(w.psi(x), -p.c1 * p.c2 - 1e-15);
        // b grows with |x - x0| on each side.
        if (x > x0) {
          EXPECT_GE(w.b(x), prev_right);
          prev_right = w.b(x);
        }
      }
      for (int i = 2000; i >= 0; --i) {
        const double x = i / 2000.0;
        if (x < x0) {
          EXPECT_GE(w.b(x), prev_left);
          prev_left = w.b(x);
        }
      }
    }
  }
}

TEST(Weights, RejectsInadmissibleC2) {
  const auto m = CoefficientModel::power_law(0.5, 1.5);
  EXPECT_THROW(CarlemanWeight(m, {1.0, 1.0, 0.99 * c2_min(m), 1.0}), InvalidModelError);
  EXPECT_THROW(CarlemanWeight(m, {0.0, 1.0, 2.0, 1.0}), InvalidModelError);
  EXPECT_THROW(CarlemanWeight(m, {1.0, -1.0, 2.0, 1.0}), InvalidModelError);
  // Just below the bound psi turns nonnegative at an endpoint (direct quadrature).
  const double c2 = 0.99 * c2_min(m);
  EXPECT_GT(std::max(b_quadrature(m, 1.5, 0.0), b_quadrature(m, 1.5, 1.0)) - c2, 0.0);
}

TEST(Weights, Exp2sPhiExamples) {
  const auto m = CoefficientModel::power_law(0.3, 0.5);
  const WeightParams p{1.0, 1.0, 1.0, 1.0};
  EXPECT_LT(exp2s_phi(p, m, 0.5, 0.8), 1e-150);

  const auto m1 = CoefficientModel::power_law(0.5, 1.0);
  const WeightParams q{2.0, 2.0, 0.6, 1.0};
  EXPECT_NEAR(exp2s_phi(q, m1, 1.0, 0.0), std::exp(-0.4), 1e-14);
  EXPECT_NEAR(exp2s_phi(q, m1, 1.0, 0.0), 0.670320, 1e-6);
  EXPECT_EQ(exp2s_phi(q, m1, 0.0, 0.2), 0.0);
  EXPECT_EQ(exp2s_phi(q, m1, 2.0, 0.2), 0.0);
  EXPECT_LT(exp2s_phi(q, m1, 1e-3, 0.2), 1e-300);
  EXPECT_EQ(flushed_exp(-800.0), 0.0);
  EXPECT_GT(flushed_exp(-700.0), 0.0);
}

TEST(Weights, Exp2sPhiDecreasesInS) {
  const auto m = CoefficientModel::power_law(0.3, 1.5);
  const CarlemanWeight w(m, {2.0, 1.0, 1.1 * c2_min(m), 1.0});
  for (double t : {0.2, 1.0, 1.9})
    for (double x : {0.0, 0.3, 0.6, 1.0}) {
      double prev = 1.0;
      for (double s = 0.5; s < 50.0; s *= 1.5) {
        const double v = w.with_s(s).exp2s_phi(t, x);
        if (prev > 0.0) EXPECT_LT(v, prev);
        else EXPECT_EQ(v, 0.0);
        prev = v;
      }
    }
}
