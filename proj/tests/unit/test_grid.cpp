#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "coefficients.hpp"
#include "error.hpp"
#include "grid.hpp"

using namespace ideg;

TEST(Grid, SnapsNSoX0IsANode) {
  const auto g = SpaceTimeGrid::create(101, 10, 1.0, 0.3);
  EXPECT_EQ(g.N(), 110);
  EXPECT_TRUE(g.adjusted());
  EXPECT_EQ(g.x0_index(), 33);
  EXPECT_DOUBLE_EQ(g.x(g.x0_index()), 0.3);
  const auto h = SpaceTimeGrid::create(200, 10, 1.0, 0.3);
  EXPECT_FALSE(h.adjusted());
  EXPECT_EQ(h.x0_index(), 60);
  for (int i = 0; i < h.N(); ++i) EXPECT_NE(h.midpoint(i), h.x0());
}

TEST(Grid, RejectsBadParameters) {
  EXPECT_THROW(SpaceTimeGrid::create(1, 10, 1.0, 0.5), PreconditionError);
  EXPECT_THROW(SpaceTimeGrid::create(10, 0, 1.0, 0.5), PreconditionError);
  EXPECT_THROW(SpaceTimeGrid::create(10, 10, 0.0, 0.5), PreconditionError);
  EXPECT_THROW(SpaceTimeGrid::create(10, 10, 1.0, 1.0), PreconditionError);
}

TEST(Grid, IntegrateSpaceExamples) {
  const auto g = SpaceTimeGrid::create(100, 1, 1.0, 0.5);
  std::vector<double> one(101, 1.0), lin(101);
  for (int i = 0; i <= 100; ++i) lin[static_cast<std::size_t>(i)] = g.x(i);
  EXPECT_NEAR(integrate_space(one, g), 1.0, 1e-15);
  EXPECT_NEAR(integrate_space(lin, g), 0.5, 1e-15);

  const auto m = CoefficientModel::power_law(0.5, 0.5);
  const auto g2 = SpaceTimeGrid::create(1000, 1, 1.0, 0.5);
  std::vector<double> f(1001);
  for (int i = 0; i <= 1000; ++i) {
    const double x = g2.x(i);
    f[static_cast<std::size_t>(i)] = i == g2.x0_index() ? 0.0 : std::pow(std::abs(x - 0.5), 1.5) / m.a(x);
  }
  EXPECT_NEAR(integrate_space(f, g2), 0.25, 1e-4);
  EXPECT_THROW(integrate_space(lin, g2), PreconditionError);
}

TEST(Grid, TrapezoidConvergesAtOrderTwo) {
  auto err = [](int N) {
    const auto g = SpaceTimeGrid::create(N, 1, 1.0, 0.5);
    std::vector<double> f(static_cast<std::size_t>(N + 1));
    for (int i = 0; i <= N; ++i) f[static_cast<std::size_t>(i)] = std::sin(M_PI * g.x(i));
    return std::abs(integrate_space(f, g) - 2.0 / M_PI);
  };
  const double order = std::log2(err(100) / err(200));
  EXPECT_NEAR(order, 2.0, 0.05);
}

TEST(Grid, SpaceTimeQuadrature) {
  const auto g = SpaceTimeGrid::create(50, 40, 2.0, 0.5);
  const Field f = sample_field(g, [](double t, double x) { return t * x; });
  EXPECT_NEAR(integrate_spacetime(f), 2.0 * 0.5, 1e-12);
  const Field one(g, 1.0);
  EXPECT_NEAR(integrate_spacetime(one, TimeEndpoints::Vanish), 2.0 - 2.0 / 40, 1e-12);
}

TEST(Grid, AssembledRowAtX0) {
  const auto m = CoefficientModel::power_law(0.3, 0.5);
  const auto g = SpaceTimeGrid::create(10, 1, 1.0, 0.3);
  const auto op = assemble_operator(m, g);
  const int i = g.x0_index();
  const double am = std::sqrt(0.05), h2 = 0.01;
  EXPECT_NEAR(op.lower[static_cast<std::size_t>(i)], am / h2, 1e-12);
  EXPECT_NEAR(op.upper[static_cast<std::size_t>(i)], am / h2, 1e-12);
  EXPECT_NEAR(op.diag[static_cast<std::size_t>(i)], -2 * am / h2, 1e-12);
  for (int k = 1; k + 1 < g.N(); ++k)
    EXPECT_DOUBLE_EQ(op.upper[static_cast<std::size_t>(k)], op.lower[static_cast<std::size_t>(k + 1)]);
}

TEST(Grid, ConstantCoefficientStencilExactOnQuadratics) {
  const auto m = CoefficientModel::uniform(0.5, 1.0);
  const auto g = SpaceTimeGrid::create(64, 1, 1.0, 0.5);
  const auto op = assemble_operator(m, g);
  std::vector<double> u(65);
  for (int i = 0; i <= 64; ++i) u[static_cast<std::size_t>(i)] = g.x(i) * (1 - g.x(i));
  const auto Au = op.apply(u);
  for (int i = 1; i < 64; ++i) EXPECT_NEAR(Au[static_cast<std::size_t>(i)], -2.0, 1e-11);
}

TEST(Grid, OperatorNegativeSemidefinite) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (double alpha : {0.5, 1.5}) {
    const auto m = CoefficientModel::power_law(0.3, alpha);
    const auto g = SpaceTimeGrid::create(80, 1, 1.0, 0.3);
    const auto op = assemble_operator(m, g);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> z(81, 0.0), y(81, 0.0);
      for (int i = 1; i < 80; ++i) {
        z[static_cast<std::size_t>(i)] = U(gen);
        y[static_cast<std::size_t>(i)] = U(gen);
      }
      std::vector<double> Az(81), Ay(81);
      op.apply_interior(z, Az);
      op.apply_interior(y, Ay);
      double zAz = 0, yAz = 0, zAy = 0;
      for (std::size_t i = 0; i < 81; ++i) {
        zAz += z[i] * Az[i];
        yAz += y[i] * Az[i];
        zAy += z[i] * Ay[i];
      }
      EXPECT_LE(zAz, 0.0);
      EXPECT_NEAR(yAz, zAy, 1e-10 * std::abs(yAz));
      EXPECT_NEAR(op.energy(z), -g.h() * zAz, 1e-10 * op.energy(z));
    }
  }
}

TEST(Grid, LowestModesMatchDenseEigensolve) {
  const auto m = CoefficientModel::power_law(0.3, 1.5);
  const auto g = SpaceTimeGrid::create(60, 1, 1.0, 0.3);
  const auto op = assemble_operator(m, g);
  const int n = g.N() - 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    const auto i = static_cast<std::size_t>(r + 1);
    A(r, r) = op.diag[i];
    if (r > 0) A(r, r - 1) = op.lower[i];
    if (r + 1 < n) A(r, r + 1) = op.upper[i];
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  std::vector<double> ev;
  for (int k = 0; k < n; ++k) ev.push_back(es.eigenvalues()(k).real());
  std::sort(ev.begin(), ev.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });

  const auto modes = lowest_modes(op, 4);
  ASSERT_EQ(modes.eigenvalues.size(), 4u);
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(modes.eigenvalues[static_cast<std::size_t>(k)], ev[static_cast<std::size_t>(k)],
                1e-9 * std::abs(ev[static_cast<std::size_t>(k)]));
    const auto& v = modes.vectors[static_cast<std::size_t>(k)];
    EXPECT_NEAR(norm(v, g), 1.0, 1e-12);
    const auto Av = op.apply(v);
    for (int i = 1; i < g.N(); ++i)
      EXPECT_NEAR(Av[static_cast<std::size_t>(i)],
                  modes.eigenvalues[static_cast<std::size_t>(k)] * v[static_cast<std::size_t>(i)],
                  1e-8 * std::abs(modes.eigenvalues[static_cast<std::size_t>(k)]));
  }
}

TEST(Grid, ConstantCoefficientEigenvaluesApproachLaplacian) {
  const auto g = SpaceTimeGrid::create(400, 1, 1.0, 0.5);
  const auto modes = lowest_modes(assemble_operator(CoefficientModel::uniform(0.5, 1.0), g), 2);
  EXPECT_NEAR(modes.eigenvalues[0], -M_PI * M_PI, 1e-3 * M_PI * M_PI);
  EXPECT_NEAR(modes.eigenvalues[1], -4 * M_PI * M_PI, 1e-3 * 4 * M_PI * M_PI);
}

TEST(Grid, ThomasSolveMatchesDense) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> U(0.1, 1.0);
  const int n = 30;
  std::vector<double> lo(n), di(n), up(n), rhs(n), scratch;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    lo[static_cast<std::size_t>(i)] = U(gen);
    up[static_cast<std::size_t>(i)] = U(gen);
    di[static_cast<std::size_t>(i)] = 3.0 + U(gen);
    rhs[static_cast<std::size_t>(i)] = b(i) = U(gen) - 0.5;
    A(i, i) = di[static_cast<std::size_t>(i)];
    if (i > 0) A(i, i - 1) = lo[static_cast<std::size_t>(i)];
    if (i + 1 < n) A(i, i + 1) = up[static_cast<std::size_t>(i)];
  }
  solve_tridiagonal(lo, di, up, rhs, scratch);
  const Eigen::VectorXd x = A.partialPivLu().solve(b);
  for (int i = 0; i < n; ++i) EXPECT_NEAR(rhs[static_cast<std::size_t>(i)], x(i), 1e-13);
  std::vector<double> zero_diag(n, 0.0);
  EXPECT_THROW(solve_tridiagonal(lo, zero_diag, up, rhs, scratch), StepSizeError);
}
