#include "invariantkit/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "invariantkit/utils.hpp"

namespace invkit::sim {

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::DomainExit: return "domain_exit";
    case EventKind::QpInfeasible: return "qp_infeasible";
    case EventKind::ExprDomainError: return "domain_error";
  }
  return "?";
}

Field expression_field(const expr::VectorExprFunction& f) {
  const bool has_t = f.component(0).has_variable("t");
  return [f, has_t](double t, std::span<const double> x) {
    std::vector<double> args(x.begin(), x.end());
    if (has_t) args.push_back(t);
    return f.eval(args);
  };
}

BarrierFn expression_barrier(const expr::ExprFunction& h) {
  const bool has_t = h.has_variable("t");
  return [h, has_t](double t, std::span<const double> x) {
    std::vector<double> args(x.begin(), x.end());
    if (has_t) args.push_back(t);
    return h.eval(args);
  };
}

Field closed_loop_field(const control::ControlProblem& prob) {
  return [&prob](double t, std::span<const double> x) {
    const control::ConstraintSystem sys = control::viable_set_row(prob, x);
    const auto kv = prob.k_nom.eval(x);
    Eigen::VectorXd target(prob.m());
    for (int j = 0; j < prob.m(); ++j) target(j) = kv[static_cast<std::size_t>(j)];
    const control::QpSolve sol = control::least_distance(sys.G, sys.d, target);
    if (!sol.feasible) throw QpInfeasibleAtState(t, {x.begin(), x.end()});
    const auto fv = prob.f.eval(x);
    const auto gv = prob.g.eval(x);
    std::vector<double> dx(fv);
    const int mm = prob.m();
    for (int a = 0; a < prob.n(); ++a)
      for (int j = 0; j < mm; ++j)
        dx[static_cast<std::size_t>(a)] += gv[static_cast<std::size_t>(a * mm + j)] * sol.u(j);
    return dx;
  };
}

InputFn closed_loop_input(const control::ControlProblem& prob) {
  return [&prob](double t, std::span<const double> x) -> std::vector<double> {
    const control::ConstraintSystem sys = control::viable_set_row(prob, x);
    const auto kv = prob.k_nom.eval(x);
    Eigen::VectorXd target(prob.m());
    for (int j = 0; j < prob.m(); ++j) target(j) = kv[static_cast<std::size_t>(j)];
    const control::QpSolve sol = control::least_distance(sys.G, sys.d, target);
    if (!sol.feasible) throw QpInfeasibleAtState(t, {x.begin(), x.end()});
    return {sol.u.data(), sol.u.data() + sol.u.size()};
  };
}

Trajectory integrate(const Field& field, const BarrierFn& h, std::span<const double> x0, double T,
                     double dt, const std::optional<certify::Box>& box, const InputFn& input_log) {
  if (!(dt > 0.0) || !(T > 0.0)) throw Error("integrate: T and dt must be positive");
  if (box && !box->contains(x0)) throw Error("integrate: x0 is outside the domain box");

  const std::size_t n = x0.size();
  const std::size_t n_steps = static_cast<std::size_t>(std::llround(T / dt));

  Trajectory traj;
  traj.dt = dt;
  std::vector<double> x(x0.begin(), x0.end());

  auto append_sample = [&](double t, const std::vector<double>& state) -> bool {
    const std::size_t base = traj.times.size();
    traj.times.push_back(t);
    traj.states.push_back(state);
    try {
      traj.h_values.push_back(h(t, state));
      if (input_log) traj.inputs.push_back(input_log(t, state));
      return true;
    } catch (const QpInfeasibleAtState& e) {
      traj.events.push_back({e.t, EventKind::QpInfeasible, e.what()});
    } catch (const DomainError& e) {
      traj.events.push_back({t, EventKind::ExprDomainError, e.what()});
    }
    traj.times.resize(base);
    traj.states.resize(base);
    traj.h_values.resize(base);
    if (input_log) traj.inputs.resize(std::min(traj.inputs.size(), base));
    return false;
  };

  if (!append_sample(0.0, x)) return traj;

  std::vector<double> k1, k2, k3, k4, tmp(n);
  for (std::size_t i = 0; i < n_steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    try {
      k1 = field(t, x);
      for (std::size_t a = 0; a < n; ++a) tmp[a] = x[a] + 0.5 * dt * k1[a];
      k2 = field(t + 0.5 * dt, tmp);
      for (std::size_t a = 0; a < n; ++a) tmp[a] = x[a] + 0.5 * dt * k2[a];
      k3 = field(t + 0.5 * dt, tmp);
      for (std::size_t a = 0; a < n; ++a) tmp[a] = x[a] + dt * k3[a];
      k4 = field(t + dt, tmp);
    } catch (const QpInfeasibleAtState& e) {
      traj.events.push_back({e.t, EventKind::QpInfeasible, e.what()});
      break;
    } catch (const DomainError& e) {
      traj.events.push_back({t, EventKind::ExprDomainError, e.what()});
      break;
    }
    for (std::size_t a = 0; a < n; ++a)
      x[a] += dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
    const double t_next = static_cast<double>(i + 1) * dt;
    if (!append_sample(t_next, x)) break;
    if (box && !box->contains(x)) {
      traj.exit_time = t_next;
      traj.events.push_back({t_next, EventKind::DomainExit, ""});
      break;
    }
  }
  return traj;
}

InvarianceResult invariance_test(const Trajectory& traj, double tol) {
  InvarianceResult res;
  for (std::size_t i = 0; i < traj.h_values.size(); ++i) {
    if (traj.h_values[i] < -tol) {
      res.invariant = false;
      res.first_violation_t = traj.times[i];
      res.h_at_violation = traj.h_values[i];
      return res;
    }
  }
  return res;
}

OverlayResult comparison_overlay(const Trajectory& traj, const minfunc::MuCandidate& mu,
                                 double eps0, int n_refine) {
  if (traj.times.size() < 2) throw Error("comparison_overlay: trajectory too short");
  comparison::ScalarIVP ivp;
  ivp.mu = mu.mu;
  ivp.w0 = traj.h_values.front();
  ivp.t_end = traj.times.back();
  ivp.step = traj.dt;
  OverlayResult out{comparison::minimal_solution(ivp, eps0, n_refine), {}};
  out.dominance = comparison::dominance_check(traj.times, traj.h_values, out.minimal);
  return out;
}

DistanceSeries set_distance_series(const Trajectory& traj,
                                   const std::vector<std::vector<double>>& s_grid) {
  if (s_grid.empty()) throw Error("set_distance_series: S grid is empty");
  DistanceSeries out;
  out.times = traj.times;
  out.rho.reserve(traj.times.size());
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    double rho = 0.0;
    if (traj.h_values[i] < 0.0) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& s : s_grid) {
        double d2 = 0.0;
        for (std::size_t a = 0; a < s.size(); ++a) {
          const double dd = s[a] - traj.states[i][a];
          d2 += dd * dd;
        }
        best = std::min(best, d2);
      }
      rho = std::sqrt(best);
    }
    out.rho.push_back(rho);
  }
  if (!out.rho.empty()) {
    out.rho_initial = out.rho.front();
    out.rho_final = out.rho.back();
    out.rho_max = *std::max_element(out.rho.begin(), out.rho.end());
    std::size_t nonincreasing = 0;
    for (std::size_t i = 0; i + 1 < out.rho.size(); ++i)
      if (out.rho[i + 1] <= out.rho[i] + 1e-12) ++nonincreasing;
    out.nonincreasing_fraction =
        out.rho.size() > 1
            ? static_cast<double>(nonincreasing) / static_cast<double>(out.rho.size() - 1)
            : 1.0;
  }
  return out;
}

std::string Trajectory::to_csv() const {
  std::ostringstream os;
  const std::size_t n = states.empty() ? 0 : states.front().size();
  const std::size_t m = inputs.empty() ? 0 : inputs.front().size();
  os << "t";
  for (std::size_t a = 0; a < n; ++a) os << ",x" << (a + 1);
  os << ",h";
  for (std::size_t j = 0; j < m; ++j) os << ",u" << (j + 1);
  os << ",event\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    os << format_double(times[i]);
    for (double v : states[i]) os << "," << format_double(v);
    os << "," << format_double(h_values[i]);
    for (std::size_t j = 0; j < m; ++j)
      os << "," << (i < inputs.size() ? format_double(inputs[i][j]) : std::string());
    std::string ev;
    for (const auto& e : events)
      if (e.t == times[i]) ev = to_string(e.kind);
    os << "," << ev << "\n";
  }
  return os.str();
}

}  // namespace invkit::sim
