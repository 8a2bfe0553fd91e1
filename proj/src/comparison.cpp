#include "invariantkit/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "invariantkit/errors.hpp"

namespace invkit::comparison {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// One RK4 trajectory of dr/dt = -mu(r) - eps. Returns the sample values and
// the index after which the solution escaped the floor (or n_steps+1).
std::vector<double> integrate_perturbed(const ScalarFn& mu, double w0, double eps, double step,
                                        std::size_t n_steps, double floor,
                                        std::size_t* escape_index) {
  std::vector<double> r;
  r.reserve(n_steps + 1);
  double y = w0 - eps;
  r.push_back(y);
  *escape_index = n_steps + 1;
  auto f = [&](double w) { return -mu(w) - eps; };
  for (std::size_t i = 0; i < n_steps; ++i) {
    const double k1 = f(y);
    const double k2 = f(y + 0.5 * step * k1);
    const double k3 = f(y + 0.5 * step * k2);
    const double k4 = f(y + step * k3);
    y += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    r.push_back(y);
    if (!(y > floor)) {  // also catches NaN
      *escape_index = i + 1;
      break;
    }
  }
  return r;
}

}  // namespace

ComparisonTrajectory minimal_solution(const ScalarIVP& ivp, double eps0, int n_refine) {
  if (!(eps0 > 0.0)) throw Error("minimal_solution: eps0 must be positive");
  if (n_refine < 2) throw Error("minimal_solution: n_refine must be at least 2");
  if (!(ivp.step > 0.0) || !(ivp.t_end > 0.0))
    throw Error("minimal_solution: step and t_end must be positive");

  const std::size_t n_steps = static_cast<std::size_t>(std::llround(ivp.t_end / ivp.step));

  ComparisonTrajectory out;
  out.epsilons.resize(static_cast<std::size_t>(n_refine));
  for (int k = 0; k < n_refine; ++k)
    out.epsilons[static_cast<std::size_t>(k)] = eps0 / std::ldexp(1.0, k);

  std::size_t shared_len = n_steps + 1;
  out.trajectories.resize(out.epsilons.size());
  for (std::size_t k = 0; k < out.epsilons.size(); ++k) {
    std::size_t escape = 0;
    out.trajectories[k] = integrate_perturbed(ivp.mu, ivp.w0, out.epsilons[k], ivp.step, n_steps,
                                              ivp.escape_floor, &escape);
    if (escape <= n_steps) {
      const double t_escape = static_cast<double>(escape) * ivp.step;
      if (!out.blowup_time || t_escape < *out.blowup_time) out.blowup_time = t_escape;
      shared_len = std::min(shared_len, escape + 1);
    }
  }

  out.times.resize(shared_len);
  for (std::size_t i = 0; i < shared_len; ++i) out.times[i] = static_cast<double>(i) * ivp.step;
  for (auto& traj : out.trajectories) traj.resize(shared_len);

  // Ordering invariant: smaller eps => larger trajectory, within 10*step^2.
  const double order_tol = 10.0 * ivp.step * ivp.step;
  for (std::size_t k = 0; k + 1 < out.trajectories.size(); ++k) {
    for (std::size_t i = 0; i < shared_len; ++i) {
      if (out.trajectories[k][i] > out.trajectories[k + 1][i] + order_tol)
        throw NonMonotoneFamilyError(
            "epsilon family lost monotone ordering at t = " + fmt(out.times[i]) +
            " (eps " + fmt(out.epsilons[k]) + " vs " + fmt(out.epsilons[k + 1]) +
            "); the integrator step is too coarse");
    }
  }

  // Pointwise limit estimate: Richardson extrapolation of the last two
  // refinements (geometric ratio 1/2 in eps); exact at t = 0 by construction.
  const auto& last = out.trajectories.back();
  const auto& prev = out.trajectories[out.trajectories.size() - 2];
  out.estimate.resize(shared_len);
  out.error_estimate.resize(shared_len);
  for (std::size_t i = 0; i < shared_len; ++i) {
    out.estimate[i] = 2.0 * last[i] - prev[i];
    out.error_estimate[i] = std::abs(last[i] - prev[i]);
  }
  out.estimate[0] = ivp.w0;
  return out;
}

double ComparisonTrajectory::estimate_at(double t) const {
  if (times.empty()) throw Error("estimate_at: empty trajectory");
  if (t <= times.front()) return estimate.front();
  if (t >= times.back()) return estimate.back();
  const double step = times[1] - times[0];
  const std::size_t i = std::min(static_cast<std::size_t>(t / step), times.size() - 2);
  const double a = (t - times[i]) / step;
  return (1.0 - a) * estimate[i] + a * estimate[i + 1];
}

std::string ComparisonTrajectory::to_csv() const {
  std::ostringstream os;
  os << "t";
  for (std::size_t k = 0; k < trajectories.size(); ++k) os << ",r_" << (k + 1);
  os << ",estimate,err_estimate\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    os << fmt(times[i]);
    for (const auto& traj : trajectories) os << "," << fmt(traj[i]);
    os << "," << fmt(estimate[i]) << "," << fmt(error_estimate[i]) << "\n";
  }
  return os.str();
}

DominanceRecord dominance_check(const std::vector<double>& eta_times,
                                const std::vector<double>& eta_values,
                                const ComparisonTrajectory& traj, double tol) {
  if (eta_times.size() != eta_values.size() || eta_times.size() < 2)
    throw GridMismatchError("dominance_check: eta sampling is malformed");
  if (traj.times.size() < 2) throw GridMismatchError("dominance_check: trajectory grid too short");

  const double eta_step = eta_times[1] - eta_times[0];
  const double traj_step = traj.times[1] - traj.times[0];
  const double ratio = traj_step / eta_step;
  const long m = std::lround(ratio);
  if (m < 1 || std::abs(ratio - static_cast<double>(m)) > 1e-9 * static_cast<double>(m))
    throw GridMismatchError("dominance_check: eta grid is not a refinement of the trajectory grid");
  if (std::abs(eta_times.front() - traj.times.front()) > 1e-12)
    throw GridMismatchError("dominance_check: grids do not share the start point");

  DominanceRecord rec;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const std::size_t j = i * static_cast<std::size_t>(m);
    if (j >= eta_times.size()) break;  // eta sampled on a shorter window
    const double allowed = tol + traj.error_estimate[i];
    const double margin = eta_values[j] - traj.estimate[i];
    if (margin < -allowed) {
      rec.dominated = false;
      rec.first_violation_t = traj.times[i];
      rec.margin = margin;
      return rec;
    }
  }
  return rec;
}

}  // namespace invkit::comparison
