#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "invariantkit/comparison.hpp"

using namespace invkit;
using comparison::minimal_solution;
using comparison::ScalarIVP;

namespace {

ScalarIVP ivp_of(ScalarFn mu, double w0, double t_end, double step = 1e-3) {
  ScalarIVP ivp;
  ivp.mu = std::move(mu);
  ivp.w0 = w0;
  ivp.t_end = t_end;
  ivp.step = step;
  return ivp;
}

}  // namespace

TEST_CASE("cbrt-squared comparison system approaches -t^3") {
  const auto mu = to_scalar_fn(expr::parse("3*cbrt(w)^2", {"w"}));
  const auto traj = minimal_solution(ivp_of(mu, 0.0, 1.0), 1e-3, 8);
  const double at1 = traj.estimate.back();
  CHECK(at1 >= -1.05);
  CHECK(at1 <= -0.95);
  // matches -t^3 at mid horizon within the epsilon-induced error scale
  CHECK(traj.estimate_at(0.5) == doctest::Approx(-0.125).epsilon(0.15));
  CHECK(traj.estimate.front() == 0.0);
}

TEST_CASE("Lipschitz mu with mu(0)=0: the minimal solution is the zero solution") {
  // uniqueness => the estimate collapses to 0 (exactly, for mu linear in w)
  for (const char* src : {"w", "0-w", "2*w", "w + w^3", "w^2 * w"}) {
    const auto mu = to_scalar_fn(expr::parse(src, {"w"}));
    const auto traj = minimal_solution(ivp_of(mu, 0.0, 1.0), 1e-3, 12);
    for (double v : traj.estimate) CHECK(std::abs(v) <= 1e-6);
  }
}

TEST_CASE("constant mu(w) = -1 gives estimate(t) = t exactly") {
  const auto mu = to_scalar_fn(expr::parse("-1", {"w"}));
  const auto traj = minimal_solution(ivp_of(mu, 0.0, 1.0), 1e-3, 8);
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    CHECK(traj.estimate[i] == doctest::Approx(traj.times[i]).epsilon(1e-9));
  CHECK(std::abs(traj.estimate.back() - 1.0) <= 1e-6);
}

TEST_CASE("estimate(0) = w0 exactly") {
  const auto mu = to_scalar_fn(expr::parse("3*cbrt(w)^2", {"w"}));
  for (double w0 : {0.0, 0.25, -0.5}) {
    const auto traj = minimal_solution(ivp_of(mu, w0, 0.5), 1e-3, 4);
    CHECK(traj.estimate.front() == w0);
  }
}

TEST_CASE("family ordering: smaller eps lies above") {
  const auto mu = to_scalar_fn(expr::parse("3*cbrt(w)^2", {"w"}));
  const auto traj = minimal_solution(ivp_of(mu, 0.0, 1.0), 1e-3, 6);
  for (std::size_t k = 0; k + 1 < traj.trajectories.size(); ++k)
    for (std::size_t i = 0; i < traj.times.size(); ++i)
      CHECK(traj.trajectories[k][i] <= traj.trajectories[k + 1][i] + 1e-5);
}

TEST_CASE("halving eps0 never decreases the estimate beyond tolerance") {
  const auto mu = to_scalar_fn(expr::parse("3*cbrt(w)^2", {"w"}));
  const auto coarse = minimal_solution(ivp_of(mu, 0.0, 1.0), 1e-3, 6);
  const auto fine = minimal_solution(ivp_of(mu, 0.0, 1.0), 0.5e-3, 6);
  for (std::size_t i = 0; i < coarse.times.size(); ++i)
    CHECK(fine.estimate[i] >= coarse.estimate[i] - 1e-5);
}

TEST_CASE("finite-time escape is truncated at the floor") {
  // dw/dt = -mu(w) = -(1 + w^2): escapes to -infinity in finite time
  const auto mu = to_scalar_fn(expr::parse("1 + w^2", {"w"}));
  auto ivp = ivp_of(mu, 0.0, 5.0, 1e-3);
  ivp.escape_floor = -1e6;
  const auto traj = minimal_solution(ivp, 1e-3, 4);
  REQUIRE(traj.blowup_time.has_value());
  CHECK(*traj.blowup_time < 2.0);  // tan blows up at pi/2
  CHECK(traj.times.back() <= *traj.blowup_time + 1e-9);
  for (const auto& r : traj.trajectories) CHECK(r.size() == traj.times.size());
}

TEST_CASE("RK4 on a constant field is exact down to the floating floor") {
  const auto mu = to_scalar_fn(expr::parse("-1", {"w"}));
  const auto coarse = minimal_solution(ivp_of(mu, 0.0, 1.0, 1e-2), 1e-3, 4);
  const auto fine = minimal_solution(ivp_of(mu, 0.0, 1.0, 5e-3), 1e-3, 4);
  double err_coarse = 0.0;
  for (std::size_t i = 0; i < coarse.times.size(); ++i)
    err_coarse = std::max(err_coarse, std::abs(coarse.estimate[i] - coarse.times[i]));
  double err_fine = 0.0;
  for (std::size_t i = 0; i < fine.times.size(); ++i)
    err_fine = std::max(err_fine, std::abs(fine.estimate[i] - fine.times[i]));
  CHECK(err_fine <= std::max(err_coarse / 8.0, 1e-13));
}

TEST_CASE("dominance checks") {
  const auto mu = to_scalar_fn(expr::parse("3*cbrt(w)^2", {"w"}));
  const auto traj = minimal_solution(ivp_of(mu, 0.0, 1.0), 1e-3, 8);

  std::vector<double> zeros(traj.times.size(), 0.0);
  CHECK(comparison::dominance_check(traj.times, zeros, traj).dominated);

  CHECK(comparison::dominance_check(traj.times, traj.estimate, traj).dominated);  // reflexive

  std::vector<double> below(traj.estimate);
  for (double& v : below) v -= 1.0;
  const auto rec = comparison::dominance_check(traj.times, below, traj);
  CHECK_FALSE(rec.dominated);
  CHECK(rec.first_violation_t == 0.0);

  std::vector<double> short_eta = {0.0, 0.0};
  CHECK_THROWS_AS(comparison::dominance_check({0.0, 0.3}, short_eta, traj),
                  GridMismatchError);
}

TEST_CASE("eta sampled on a refinement of the trajectory grid") {
  const auto mu = to_scalar_fn(expr::parse("-1", {"w"}));
  const auto traj = minimal_solution(ivp_of(mu, 0.0, 1.0, 1e-2), 1e-3, 4);
  // eta on a 2x finer grid, eta(t) = t (equals the estimate)
  std::vector<double> ts, vs;
  for (int i = 0; i <= 200; ++i) {
    ts.push_back(i * 5e-3);
    vs.push_back(i * 5e-3);
  }
  CHECK(comparison::dominance_check(ts, vs, traj).dominated);
}

TEST_CASE("csv export shape") {
  const auto mu = to_scalar_fn(expr::parse("w", {"w"}));
  const auto traj = minimal_solution(ivp_of(mu, 0.0, 0.01, 1e-3), 1e-3, 3);
  const auto csv = traj.to_csv();
  CHECK(csv.find("t,r_1,r_2,r_3,estimate,err_estimate\n") == 0);
}
