#pragma once

#include <optional>
#include <string>
#include <vector>

#include "invariantkit/scalar.hpp"

namespace invkit::comparison {

/// The scalar comparison problem dw/dt = -mu(w), w(0) = w0 on [0, t_end].
struct ScalarIVP {
  ScalarFn mu;
  double w0 = 0.0;
  double t_end = 1.0;
  double step = 1e-3;
  double escape_floor = -1e9;  // finite-time blowup cutoff
};

/// Epsilon-indexed family of perturbed trajectories r_k solving
/// dr/dt = -mu(r) - eps_k, r(0) = w0 - eps_k, on one shared time grid,
/// together with the pointwise limit estimate.
struct ComparisonTrajectory {
  std::vector<double> epsilons;                 // decreasing, eps0 / 2^(k-1)
  std::vector<double> times;                    // shared grid
  std::vector<std::vector<double>> trajectories;  // one row per epsilon
  std::vector<double> estimate;                 // Richardson extrapolant of the last two rows
  std::vector<double> error_estimate;           // |r_N - r_{N-1}| per grid point
  std::optional<double> blowup_time;            // set when a trajectory escaped the floor

  double estimate_at(double t) const;  // linear interpolation on the grid
  std::string to_csv() const;          // columns: t, r_1..r_N, estimate, err_estimate
};

/// Integrates the perturbed family with classical fixed-step RK4 and forms
/// the pointwise limit estimate. Throws NonMonotoneFamilyError when the
/// family ordering is violated beyond 10*step^2.
ComparisonTrajectory minimal_solution(const ScalarIVP& ivp, double eps0 = 1e-3, int n_refine = 8);

struct DominanceRecord {
  bool dominated = true;
  double first_violation_t = 0.0;  // valid when !dominated
  double margin = 0.0;             // eta - estimate at the violation (negative)
};

/// Checks eta(t) >= estimate(t) - (tol + per-point error estimate) on every
/// shared grid point. `eta` must be sampled on the trajectory grid or on an
/// integer refinement of it.
DominanceRecord dominance_check(const std::vector<double>& eta_times,
                                const std::vector<double>& eta_values,
                                const ComparisonTrajectory& traj, double tol = 1e-6);

}  // namespace invkit::comparison
