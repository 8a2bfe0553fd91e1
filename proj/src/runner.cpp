#include "invariantkit/runner.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "invariantkit/sim.hpp"
#include "invariantkit/utils.hpp"

namespace invkit::cli {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path, "-", "cannot open file");
  json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ConfigError(path, "-", std::string("JSON parse error: ") + e.what());
  }
  return j;
}

const json& need(const json& cfg, const std::string& field, const std::string& path) {
  if (!cfg.contains(field)) throw ConfigError(path, field, "missing");
  return cfg.at(field);
}

std::vector<std::string> state_list(const json& cfg, const std::string& path) {
  auto state = need(cfg, "state", path).get<std::vector<std::string>>();
  if (state.empty()) throw ConfigError(path, "state", "must name at least one variable");
  return state;
}

// Parses with the state variables; retries with a trailing "t" when the
// source actually mentions it.
expr::ExprFunction parse_state_expr(const std::string& src, const std::vector<std::string>& state,
                                    const std::string& path, const std::string& field) {
  try {
    return expr::parse(src, state);
  } catch (const UnknownVariableError& e) {
    if (e.name != "t") throw ConfigError(path, field, e.what());
    auto with_t = state;
    with_t.push_back("t");
    try {
      return expr::parse(src, with_t);
    } catch (const Error& e2) {
      throw ConfigError(path, field, e2.what());
    }
  } catch (const Error& e) {
    throw ConfigError(path, field, e.what());
  }
}

expr::VectorExprFunction parse_state_vector(const std::vector<std::string>& sources,
                                            const std::vector<std::string>& state,
                                            const std::string& path, const std::string& field) {
  std::vector<expr::ExprFunction> comps;
  bool any_t = false;
  for (const auto& s : sources) {
    auto fn = parse_state_expr(s, state, path, field);
    any_t = any_t || fn.has_variable("t");
    comps.push_back(std::move(fn));
  }
  if (any_t) {  // reparse all with t so the variable lists agree
    auto with_t = state;
    with_t.push_back("t");
    comps.clear();
    for (const auto& s : sources) comps.push_back(expr::parse(s, with_t));
  }
  return expr::VectorExprFunction(std::move(comps), static_cast<int>(sources.size()), 1);
}

expr::VectorExprFunction parse_state_matrix(const std::vector<std::vector<std::string>>& sources,
                                            const std::vector<std::string>& state,
                                            const std::string& path, const std::string& field) {
  if (sources.empty()) throw ConfigError(path, field, "empty matrix");
  const int cols = static_cast<int>(sources.front().size());
  std::vector<expr::ExprFunction> comps;
  for (const auto& row : sources) {
    if (static_cast<int>(row.size()) != cols) throw ConfigError(path, field, "ragged rows");
    for (const auto& s : row) comps.push_back(parse_state_expr(s, state, path, field));
  }
  return expr::VectorExprFunction(std::move(comps), static_cast<int>(sources.size()), cols);
}

certify::Box box_from_config(const json& cfg, const std::string& path) {
  const json& dom = need(cfg, "domain", path);
  certify::Box box;
  box.lo = need(dom, "lo", path).get<std::vector<double>>();
  box.hi = need(dom, "hi", path).get<std::vector<double>>();
  return box;
}

std::vector<int> grid_from_config(const json& cfg, const std::string& path) {
  return need(need(cfg, "domain", path), "grid", path).get<std::vector<int>>();
}

minfunc::MuCandidate mu_candidate_from_config(const json& cfg, const std::string& path) {
  const json& exprs = need(cfg, "expressions", path);
  const std::string mu_src = need(exprs, "mu", path).get<std::string>();
  minfunc::MuCandidate cand;
  try {
    cand = minfunc::MuCandidate::from_source(mu_src);
  } catch (const Error& e) {
    throw ConfigError(path, "expressions.mu", e.what());
  }
  if (cfg.contains("mu_properties")) {
    const json& p = cfg.at("mu_properties");
    minfunc::DeclaredProperties decl;
    decl.locally_lipschitz = p.value("locally_lipschitz", false);
    decl.divergent_integral = p.value("divergent_integral", false);
    decl.note = p.value("note", "");
    cand.declared = decl;
  }
  if (cfg.contains("mu_probe")) {
    const json& p = cfg.at("mu_probe");
    cand.probe_radius = p.value("radius", cand.probe_radius);
    cand.sample_count = p.value("samples", cand.sample_count);
  }
  return cand;
}

bool mu_is_time_varying(const json& cfg, const std::string& path) {
  const std::string mu_src =
      need(need(cfg, "expressions", path), "mu", path).get<std::string>();
  try {
    expr::parse(mu_src, {"w"});
    return false;
  } catch (const UnknownVariableError& e) {
    if (e.name == "t") return true;
    throw ConfigError(path, "expressions.mu", e.what());
  }
}

}  // namespace

certify::BarrierProblem barrier_problem_from_config(const json& cfg, const std::string& path) {
  const auto state = state_list(cfg, path);
  const json& exprs = need(cfg, "expressions", path);

  certify::BarrierProblem prob;
  prob.state = state;
  prob.f = parse_state_vector(need(exprs, "f", path).get<std::vector<std::string>>(), state, path,
                              "expressions.f");
  prob.h = parse_state_expr(need(exprs, "h", path).get<std::string>(), state, path,
                            "expressions.h");
  if (mu_is_time_varying(cfg, path)) {
    prob.mu_tv = expr::parse(need(exprs, "mu", path).get<std::string>(), {"t", "w"});
    if (cfg.contains("mu_properties")) {
      minfunc::DeclaredProperties decl;
      decl.locally_lipschitz = cfg.at("mu_properties").value("locally_lipschitz", false);
      decl.note = cfg.at("mu_properties").value("note", "");
      prob.mu_tv_declared = decl;
    }
  } else {
    prob.mu = mu_candidate_from_config(cfg, path);
  }
  prob.domain = box_from_config(cfg, path);
  prob.grid = grid_from_config(cfg, path);
  try {
    prob.validate();
  } catch (const Error& e) {
    throw ConfigError(path, "domain", e.what());
  }
  return prob;
}

control::ControlProblem control_problem_from_config(const json& cfg, const std::string& path) {
  const auto state = state_list(cfg, path);
  const json& exprs = need(cfg, "expressions", path);

  control::ControlProblem prob;
  prob.state = state;
  prob.f = parse_state_vector(need(exprs, "f", path).get<std::vector<std::string>>(), state, path,
                              "expressions.f");
  prob.g = parse_state_matrix(need(exprs, "g", path).get<std::vector<std::vector<std::string>>>(),
                              state, path, "expressions.g");
  prob.h = parse_state_expr(need(exprs, "h", path).get<std::string>(), state, path,
                            "expressions.h");
  prob.mu = mu_candidate_from_config(cfg, path);
  prob.A = parse_state_matrix(need(exprs, "A", path).get<std::vector<std::vector<std::string>>>(),
                              state, path, "expressions.A");
  prob.b = parse_state_vector(need(exprs, "b", path).get<std::vector<std::string>>(), state, path,
                              "expressions.b");
  prob.k_nom = parse_state_vector(need(exprs, "k_nom", path).get<std::vector<std::string>>(),
                                  state, path, "expressions.k_nom");
  prob.domain = box_from_config(cfg, path);
  prob.grid = grid_from_config(cfg, path);
  try {
    prob.validate();
  } catch (const Error& e) {
    throw ConfigError(path, "expressions", e.what());
  }
  return prob;
}

namespace {

struct Tolerances {
  double check_tol = 1e-9;
  double invariance_tol = 1e-6;
  double dominance_tol = 1e-6;
  double nagumo_band = 1e-3;

  static Tolerances from_config(const json& cfg) {
    Tolerances t;
    if (cfg.contains("tolerances")) {
      const json& j = cfg.at("tolerances");
      t.check_tol = j.value("check_tol", t.check_tol);
      t.invariance_tol = j.value("invariance_tol", t.invariance_tol);
      t.dominance_tol = j.value("dominance_tol", t.dominance_tol);
      t.nagumo_band = j.value("nagumo_band", t.nagumo_band);
    }
    return t;
  }

  json echo() const {
    return {{"check_tol", check_tol},
            {"invariance_tol", invariance_tol},
            {"dominance_tol", dominance_tol},
            {"nagumo_band", nagumo_band}};
  }
};

enum class JobOutcome { Pass, Fail, Inconclusive, Info };

const char* to_string(JobOutcome o) {
  switch (o) {
    case JobOutcome::Pass: return "pass";
    case JobOutcome::Fail: return "fail";
    case JobOutcome::Inconclusive: return "inconclusive";
    case JobOutcome::Info: return "info";
  }
  return "?";
}

JobOutcome verdict_outcome(certify::Verdict v) {
  switch (v) {
    case certify::Verdict::Certified: return JobOutcome::Pass;
    case certify::Verdict::Violated: return JobOutcome::Fail;
    case certify::Verdict::MuNotMinimal: return JobOutcome::Fail;
    case certify::Verdict::CertifiedModuloClassification: return JobOutcome::Inconclusive;
  }
  return JobOutcome::Fail;
}

// Deterministic x0 draws: uniform over the grid points with h >= 0 (at t=0).
std::vector<std::vector<double>> random_s_points(const certify::Box& box,
                                                 const std::vector<int>& grid,
                                                 const std::function<double(std::span<const double>)>& h0,
                                                 int count, std::mt19937_64& rng) {
  std::vector<std::vector<double>> out;
  const std::size_t n = box.dim();
  std::vector<std::uniform_int_distribution<int>> axis;
  for (std::size_t a = 0; a < n; ++a) axis.emplace_back(0, grid[a] - 1);
  int attempts = 0;
  while (static_cast<int>(out.size()) < count && attempts < count * 10000) {
    ++attempts;
    std::vector<double> x(n);
    for (std::size_t a = 0; a < n; ++a)
      x[a] = grid_coord(box.lo[a], box.hi[a], grid[a], axis[a](rng));
    if (h0(x) >= 0.0) out.push_back(std::move(x));
  }
  if (static_cast<int>(out.size()) < count)
    throw Error("could not sample enough grid points inside S");
  return out;
}

class Runner {
 public:
  Runner(const std::string& config_path, const RunOptions& opts)
      : path_(config_path), opts_(opts), cfg_(load_json(config_path)) {
    kind_ = need(cfg_, "kind", path_).get<std::string>();
    if (kind_ != "mbf" && kind_ != "tmbf" && kind_ != "mcbf")
      throw ConfigError(path_, "kind", "must be one of mbf, tmbf, mcbf");
    tol_ = Tolerances::from_config(cfg_);
    out_dir_ = !opts.out_dir_override.empty()
                   ? opts.out_dir_override
                   : cfg_.value("output_dir", std::string("out"));
    rng_.seed(opts.seed);
    if (kind_ == "mcbf")
      control_.emplace(control_problem_from_config(cfg_, path_));
    else
      barrier_.emplace(barrier_problem_from_config(cfg_, path_));
  }

  RunResult execute() {
    const json jobs = need(cfg_, "jobs", path_);
    if (!jobs.is_array() || jobs.empty()) throw ConfigError(path_, "jobs", "must be nonempty");

    json report;
    report["schema"] = kReportSchema;
    report["version"] = kVersion;
    report["kind"] = kind_;
    report["seed"] = opts_.seed;
    report["tolerances"] = tol_.echo();
    report["jobs"] = json::array();

    bool any_fail = false;
    bool any_inconclusive = false;
    bool any_error = false;

    int index = 0;
    for (const auto& job : jobs) {
      const std::string name = need(job, "job", path_).get<std::string>();
      json entry;
      entry["job"] = name;
      entry["index"] = index;
      try {
        const JobOutcome outcome = dispatch(name, job, index, entry);
        entry["outcome"] = to_string(outcome);
        any_fail = any_fail || outcome == JobOutcome::Fail;
        any_inconclusive = any_inconclusive || outcome == JobOutcome::Inconclusive;
      } catch (const std::exception& e) {
        entry["outcome"] = "error";
        entry["error"] = e.what();
        any_error = true;
      }
      report["jobs"].push_back(entry);
      ++index;
    }

    RunResult res;
    res.exit_code = any_error ? 3 : (any_fail ? 1 : (any_inconclusive ? 2 : 0));
    report["exit_code"] = res.exit_code;
    res.report_json = report.dump(2) + "\n";
    res.report_path = (std::filesystem::path(out_dir_) / "report.json").string();
    write_file_atomic(res.report_path, res.report_json);
    return res;
  }

 private:
  void write_csv(int index, const std::string& stem, const std::string& content) {
    std::ostringstream name;
    name << (index < 10 ? "0" : "") << index << "_" << stem << ".csv";
    write_file_atomic((std::filesystem::path(out_dir_) / name.str()).string(), content);
  }

  const minfunc::MuCandidate& require_mu() {
    if (control_) return control_->mu;
    if (barrier_ && barrier_->mu) return *barrier_->mu;
    throw Error("this job needs a time-invariant mu");
  }

  JobOutcome dispatch(const std::string& name, const json& job, int index, json& entry) {
    if (name == "classify") return job_classify(entry);
    if (name == "certify") return job_certify(job, index, entry);
    if (name == "nagumo") return job_nagumo(job, entry);
    if (name == "distance_quotient") return job_distance_quotient(job, index, entry);
    if (name == "gamma") return job_gamma(job, index, entry);
    if (name == "stability") return job_stability(job, entry);
    if (name == "qp_scan") return job_qp_scan(job, index, entry);
    if (name == "simulate") return job_simulate(job, index, entry);
    if (name == "compare") return job_compare(job, entry);
    throw ConfigError(path_, "jobs", "unknown job '" + name + "'");
  }

  JobOutcome job_classify(json& entry) {
    const auto verdict = minfunc::classify(require_mu());
    entry["verdict"] = json::parse(verdict.to_json());
    switch (verdict.status) {
      case minfunc::Status::Minimal: return JobOutcome::Pass;
      case minfunc::Status::NotMinimal: return JobOutcome::Fail;
      case minfunc::Status::Inconclusive: return JobOutcome::Inconclusive;
    }
    return JobOutcome::Fail;
  }

  JobOutcome job_certify(const json& job, int index, json& entry) {
    if (kind_ == "mcbf") {
      const auto rep = control::check_mcbf(*control_, tol_.check_tol);
      entry["report"] = json::parse(rep.to_json());
      write_csv(index, "certify_samples", rep.base.samples_csv());
      return verdict_outcome(rep.base.verdict);
    }
    if (kind_ == "tmbf") {
      const auto t_interval = need(cfg_, "t_interval", path_).get<std::vector<double>>();
      if (t_interval.size() != 2 || t_interval[0] != 0.0)
        throw ConfigError(path_, "t_interval", "must be [0, T]");
      const int t_grid = cfg_.value("t_grid", 101);
      const auto rep = certify::check_tmbf(*barrier_, t_interval[1], t_grid, tol_.check_tol);
      entry["report"] = json::parse(rep.to_json());
      write_csv(index, "certify_samples", rep.samples_csv());
      return verdict_outcome(rep.verdict);
    }
    const auto rep = certify::check_mbf(*barrier_, tol_.check_tol);
    entry["report"] = json::parse(rep.to_json());
    write_csv(index, "certify_samples", rep.samples_csv());
    (void)job;
    return verdict_outcome(rep.verdict);
  }

  JobOutcome job_nagumo(const json& job, json& entry) {
    if (kind_ != "mbf") throw Error("nagumo job requires kind mbf");
    const double band = job.value("band", tol_.nagumo_band);
    const auto res = certify::nagumo_boundary_check(*barrier_, band, tol_.check_tol);
    entry["pass"] = res.pass;
    entry["band_used"] = res.band_used;
    entry["widened"] = res.widened;
    entry["min_grad_norm"] = res.min_grad_norm;
    entry["regularity_flag"] = res.regularity_flag;
    entry["band_points"] = res.band_samples.size();
    if (res.witness) entry["witness"] = {{"x", res.witness->x}, {"lfh", res.witness->lfh}};
    return res.pass ? JobOutcome::Pass : JobOutcome::Fail;
  }

  JobOutcome job_distance_quotient(const json& job, int index, json& entry) {
    if (kind_ != "mbf") throw Error("distance_quotient job requires kind mbf");
    const double band = job.value("band", tol_.nagumo_band);
    const auto nag = certify::nagumo_boundary_check(*barrier_, band, tol_.check_tol);
    std::vector<std::vector<double>> pts;
    for (const auto& s : nag.band_samples) pts.push_back(s.x);
    std::vector<double> eps;
    if (job.contains("eps_sequence")) eps = job.at("eps_sequence").get<std::vector<double>>();
    const auto table = certify::distance_quotient_check(*barrier_, pts, eps);
    write_csv(index, "distance_quotient", table.to_csv());
    json trends = json::array();
    for (const auto& row : table.rows)
      trends.push_back({{"x", row.x}, {"trend", certify::to_string(row.trend)}});
    entry["rows"] = trends;
    return JobOutcome::Info;
  }

  JobOutcome job_gamma(const json& job, int index, json& entry) {
    if (kind_ != "mbf") throw Error("gamma job requires kind mbf");
    const double w_lo = need(job, "w_lo", path_).get<double>();
    const double w_hi = need(job, "w_hi", path_).get<double>();
    const int w_count = need(job, "w_count", path_).get<int>();
    const double band = need(job, "band", path_).get<double>();
    const auto rec = certify::gamma_construct(*barrier_, linspace(w_lo, w_hi, w_count), band);
    write_csv(index, "gamma", rec.to_csv());
    entry["modulus_of_continuity"] = rec.modulus_of_continuity;
    entry["band"] = rec.band;
    std::size_t empties = 0;
    for (const auto& g : rec.gamma)
      if (!g) ++empties;
    entry["empty_levels"] = empties;
    try {
      const auto loop = minfunc::classify(rec.comparison_candidate());
      entry["neg_gamma_classification"] = json::parse(loop.to_json());
    } catch (const Error& e) {
      entry["neg_gamma_classification"] = {{"error", e.what()}};
    }
    return JobOutcome::Info;
  }

  JobOutcome job_stability(const json& job, json& entry) {
    const double delta = job.value("delta", 1.0);
    const auto res = certify::stability_classify(require_mu(), delta);
    entry["certificate"] = certify::to_string(res.level);
    entry["delta"] = res.delta;
    entry["caveat"] = res.caveat;
    return JobOutcome::Info;
  }

  JobOutcome job_qp_scan(const json& job, int index, json& entry) {
    if (kind_ != "mcbf") throw Error("qp_scan job requires kind mcbf");
    const auto lo = need(job, "lo", path_).get<std::vector<double>>();
    const auto hi = need(job, "hi", path_).get<std::vector<double>>();
    const int count = need(job, "count", path_).get<int>();
    if (lo.size() != control_->state.size() || hi.size() != lo.size() || count < 2)
      throw ConfigError(path_, "jobs.qp_scan", "bad path description");
    std::vector<std::vector<double>> path_pts;
    for (int i = 0; i < count; ++i) {
      std::vector<double> x(lo.size());
      for (std::size_t a = 0; a < lo.size(); ++a)
        x[a] = grid_coord(lo[a], hi[a], count, i);
      path_pts.push_back(std::move(x));
    }
    const auto scan = control::continuity_scan(*control_, path_pts);
    write_csv(index, "qp_scan", scan.to_csv());
    entry["max_jump_quotient"] = scan.max_jump_quotient;
    entry["infeasible_points"] = scan.infeasible_points;
    entry["interior_failures"] = scan.interior_failures;
    return scan.infeasible_points == 0 ? JobOutcome::Pass : JobOutcome::Fail;
  }

  std::vector<std::vector<double>> gather_x0(const json& job) {
    std::vector<std::vector<double>> x0s;
    if (job.contains("x0"))
      for (const auto& x : job.at("x0")) x0s.push_back(x.get<std::vector<double>>());
    const int random_n = job.value("random_n", 0);
    if (random_n > 0) {
      const certify::Box& box = control_ ? control_->domain : barrier_->domain;
      const std::vector<int>& grid = control_ ? control_->grid : barrier_->grid;
      auto h0 = [&](std::span<const double> x) {
        if (control_) return control_->h.eval(x);
        std::vector<double> args(x.begin(), x.end());
        if (barrier_->h.has_variable("t")) args.push_back(0.0);
        return barrier_->h.eval(args);
      };
      auto extra = random_s_points(box, grid, h0, random_n, rng_);
      x0s.insert(x0s.end(), extra.begin(), extra.end());
    }
    if (x0s.empty()) throw ConfigError(path_, "jobs.simulate", "no initial conditions");
    return x0s;
  }

  JobOutcome job_simulate(const json& job, int index, json& entry) {
    const double T = need(job, "T", path_).get<double>();
    const double dt = job.value("dt", 1e-3);
    const auto x0s = gather_x0(job);

    sim::Field field;
    sim::BarrierFn barrier;
    sim::InputFn input_log;
    certify::Box box;
    if (kind_ == "mcbf") {
      field = sim::closed_loop_field(*control_);
      barrier = sim::expression_barrier(control_->h);
      input_log = sim::closed_loop_input(*control_);
      box = control_->domain;
    } else {
      field = sim::expression_field(barrier_->f);
      barrier = sim::expression_barrier(barrier_->h);
      box = barrier_->domain;
    }

    json results = json::array();
    std::size_t violations = 0;
    for (std::size_t i = 0; i < x0s.size(); ++i) {
      const auto traj = sim::integrate(field, barrier, x0s[i], T, dt, box, input_log);
      const auto inv = sim::invariance_test(traj, tol_.invariance_tol);
      if (i == 0) write_csv(index, "trajectory", traj.to_csv());
      json r = {{"x0", x0s[i]}, {"invariant", inv.invariant}};
      if (!inv.invariant) {
        ++violations;
        r["first_violation_t"] = inv.first_violation_t;
        r["h_at_violation"] = inv.h_at_violation;
      }
      if (traj.exit_time) r["exit_time"] = *traj.exit_time;
      if (!traj.events.empty()) r["first_event"] = sim::to_string(traj.events.front().kind);
      results.push_back(r);
    }
    entry["trajectories"] = results;
    entry["violations"] = violations;
    return violations == 0 ? JobOutcome::Pass : JobOutcome::Fail;
  }

  JobOutcome job_compare(const json& job, json& entry) {
    if (kind_ == "tmbf") throw Error("compare job requires a time-invariant mu");
    const double T = need(job, "T", path_).get<double>();
    const double dt = job.value("dt", 1e-3);
    const double eps0 = job.value("eps0", 1e-3);
    const int n_refine = job.value("n_refine", 8);
    const auto x0s = gather_x0(job);
    const minfunc::MuCandidate& mu = require_mu();

    sim::Field field;
    sim::BarrierFn barrier;
    certify::Box box;
    if (kind_ == "mcbf") {
      field = sim::closed_loop_field(*control_);
      barrier = sim::expression_barrier(control_->h);
      box = control_->domain;
    } else {
      field = sim::expression_field(barrier_->f);
      barrier = sim::expression_barrier(barrier_->h);
      box = barrier_->domain;
    }

    json results = json::array();
    std::size_t failures = 0;
    for (const auto& x0 : x0s) {
      const auto traj = sim::integrate(field, barrier, x0, T, dt, box);
      json r = {{"x0", x0}};
      if (traj.times.size() < 2) {
        r["status"] = "skipped";
        if (!traj.events.empty()) r["event"] = sim::to_string(traj.events.front().kind);
      } else {
        const auto overlay = sim::comparison_overlay(traj, mu, eps0, n_refine);
        r["status"] = overlay.dominance.dominated ? "dominated" : "violated";
        if (!overlay.dominance.dominated) {
          ++failures;
          r["first_violation_t"] = overlay.dominance.first_violation_t;
          r["margin"] = overlay.dominance.margin;
        }
        if (overlay.minimal.blowup_time) r["blowup_time"] = *overlay.minimal.blowup_time;
      }
      results.push_back(r);
    }
    entry["comparisons"] = results;
    entry["failures"] = failures;
    return failures == 0 ? JobOutcome::Pass : JobOutcome::Fail;
  }

  std::string path_;
  RunOptions opts_;
  json cfg_;
  std::string kind_;
  Tolerances tol_;
  std::string out_dir_;
  std::mt19937_64 rng_;
  std::optional<certify::BarrierProblem> barrier_;
  std::optional<control::ControlProblem> control_;
};

}  // namespace

RunResult run(const std::string& config_path, const RunOptions& opts) {
  default_thread_count() = std::max(1, opts.threads);
  Runner runner(config_path, opts);
  return runner.execute();
}

std::pair<std::string, int> check_mu(const std::string& expr_text) {
  const auto verdict = minfunc::classify(minfunc::MuCandidate::from_source(expr_text));
  int code = 2;
  if (verdict.status == minfunc::Status::Minimal) code = 0;
  if (verdict.status == minfunc::Status::NotMinimal) code = 1;
  nlohmann::json j = nlohmann::json::parse(verdict.to_json());
  j["note"] = "sampled verdicts are semi-decisions; sign checks use a finite grid";
  return {j.dump(2) + "\n", code};
}

}  // namespace invkit::cli
