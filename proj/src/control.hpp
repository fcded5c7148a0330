#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "grid.hpp"
#include "solvers.hpp"

namespace ideg {

struct ObservabilitySample {
  std::string descriptor;        ///< "mode:k", "random:k" or "refined:k"
  double initial_energy = 0.0;   ///< ||v(0)||^2
  double observed_energy = 0.0;  ///< int_0^T int_omega v^2 (trapezoid, chi_omega weights)
  double ratio = 0.0;            ///< initial_energy / observed_energy
};

struct ObservabilitySampleSpec {
  int modes = 10;
  int random = 10;
  int power_iterations = 20;
  std::uint64_t seed = 0;
};

struct ObservabilityReport {
  std::vector<ObservabilitySample> samples;
  double C_T_estimate = 0.0;  ///< max ratio over samples
  /// Some v_T gave observed energy 0 with v(0) != 0 (discrete backward uniqueness failure).
  bool violation = false;
  int N = 0;
  int M = 0;
  double T = 0.0;
  double potential_sup_norm = 0.0;
};

/// Samples ||v(0)||^2 / int int_omega v^2 over homogeneous adjoint solutions. The sample set
/// holds the lowest discrete eigenmodes, random Dirichlet profiles, and Rayleigh-Ritz
/// refinements that maximize the ratio over the span of everything seen so far (each
/// refinement step adds the gradient of the ratio at the current maximizer).
/// Requires x0 in omega (GeometryError otherwise).
ObservabilityReport estimate_observability(const CoefficientModel& model,
                                           const PotentialModel& potential,
                                           const SpaceTimeGrid& grid,
                                           const ControlConfig& control,
                                           const ObservabilitySampleSpec& spec);

struct ControlSolution {
  Field h;                       ///< control, zero at nodes outside omega
  Field state;                   ///< controlled trajectory u
  std::vector<double> terminal_data;  ///< optimal adjoint datum v_T
  double terminal_norm = 0.0;    ///< ||u(T)||, recomputed by a forward solve
  double initial_norm = 0.0;     ///< ||u_0||
  double cost = 0.0;             ///< int int_omega h^2
  int cg_iterations = 0;
  std::vector<double> residual_history;   ///< ||u(T)|| after each iteration (index 0: free)
  std::vector<double> objective_history;  ///< J after each iteration (index 0: J(0) = 0)
  bool converged = false;
};

/// HUM null control by conjugate gradient on
///   J(v_T) = 1/2 int int_omega v^2 + eps/2 ||v_T||^2 + <u_0, v(0)>,
/// where v solves the homogeneous adjoint with v(T) = v_T. The gradient is u(T) from one
/// forward solve with h = v chi_omega (plus eps v_T). Stops when ||u(T)|| <= tol ||u_0||,
/// when the relative decrease of J falls below 1e-10, or after max_iters iterations; the
/// returned solution reports `converged` either way. Requires x0 in omega and tol > 0.
ControlSolution synthesize_null_control(const CoefficientModel& model,
                                        const PotentialModel& potential,
                                        const SpaceTimeGrid& grid, const ControlConfig& control,
                                        std::span<const double> u0, double tol, int max_iters,
                                        double epsilon = 0.0);

/// cost / (C_T ||u_0||^2); observability bounds the HUM cost by C_T ||u_0||^2, so values much
/// larger than 1 flag an inconsistency. Returns 0 when u_0 = 0.
double verify_duality_gap(const ControlSolution& solution, const ObservabilityReport& report);

}  // namespace ideg
