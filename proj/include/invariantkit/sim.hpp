#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "invariantkit/certify.hpp"
#include "invariantkit/comparison.hpp"
#include "invariantkit/control.hpp"

namespace invkit::sim {

/// Raised by a closed-loop field when the safety filter has no feasible
/// input at a stage point; integrate() turns it into a trajectory event.
class QpInfeasibleAtState : public Error {
 public:
  QpInfeasibleAtState(double t, std::vector<double> x)
      : Error("QP infeasible at t = " + std::to_string(t)), t(t), x(std::move(x)) {}
  double t;
  std::vector<double> x;
};

enum class EventKind { DomainExit, QpInfeasible, ExprDomainError };
const char* to_string(EventKind k);

struct Event {
  double t = 0.0;
  EventKind kind = EventKind::DomainExit;
  std::string detail;
};

struct Trajectory {
  std::vector<double> times;                 // uniform, 0 .. T step dt
  std::vector<std::vector<double>> states;
  std::vector<double> h_values;
  std::vector<std::vector<double>> inputs;   // closed loop only, per sample
  std::optional<double> exit_time;           // first time the box was left
  std::vector<Event> events;
  double dt = 0.0;

  std::string to_csv() const;  // t, x1..xn, h, u1..um, event
};

/// Time-dependent vector field dx/dt = field(t, x).
using Field = std::function<std::vector<double>(double, std::span<const double>)>;
/// Barrier evaluation along the flow, h(t, x).
using BarrierFn = std::function<double(double, std::span<const double>)>;
/// Optional per-sample input log for closed-loop runs.
using InputFn = std::function<std::vector<double>(double, std::span<const double>)>;

/// Open-loop field from expressions (state variables, optionally t).
Field expression_field(const expr::VectorExprFunction& f);
BarrierFn expression_barrier(const expr::ExprFunction& h);

/// Closed-loop field f(x) + g(x) k_hat(x); k_hat from the QP safety filter,
/// evaluated at every integrator stage point.
Field closed_loop_field(const control::ControlProblem& prob);
InputFn closed_loop_input(const control::ControlProblem& prob);

/// Classical fixed-step RK4. Domain exit truncates; field errors truncate
/// with an event instead of propagating.
Trajectory integrate(const Field& field, const BarrierFn& h, std::span<const double> x0, double T,
                     double dt, const std::optional<certify::Box>& box = std::nullopt,
                     const InputFn& input_log = nullptr);

struct InvarianceResult {
  bool invariant = true;
  double first_violation_t = 0.0;
  double h_at_violation = 0.0;
};

InvarianceResult invariance_test(const Trajectory& traj, double tol = 1e-6);

struct OverlayResult {
  comparison::ComparisonTrajectory minimal;
  comparison::DominanceRecord dominance;
};

/// The central inequality h(x(t)) >= w_tilde(t) made executable: integrates
/// the comparison system from w0 = h(x0) on the trajectory grid and runs the
/// dominance check.
OverlayResult comparison_overlay(const Trajectory& traj, const minfunc::MuCandidate& mu,
                                 double eps0 = 1e-3, int n_refine = 8);

struct DistanceSeries {
  std::vector<double> times;
  std::vector<double> rho;
  double rho_initial = 0.0;
  double rho_final = 0.0;
  double rho_max = 0.0;
  double nonincreasing_fraction = 1.0;  // share of steps with rho not increasing
};

/// Point-to-set distance rho(x(t), S) per sample, S approximated by the
/// given grid points with h >= 0 (membership decided through h).
DistanceSeries set_distance_series(const Trajectory& traj,
                                   const std::vector<std::vector<double>>& s_grid);

}  // namespace invkit::sim
