#include "invariantkit/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "invariantkit/utils.hpp"
#include "json.hpp"

namespace invkit::certify {

namespace {

std::vector<int> decode_index(std::size_t flat, const std::vector<int>& counts) {
  std::vector<int> idx(counts.size());
  for (std::size_t a = counts.size(); a-- > 0;) {
    idx[a] = static_cast<int>(flat % static_cast<std::size_t>(counts[a]));
    flat /= static_cast<std::size_t>(counts[a]);
  }
  return idx;
}

std::size_t grid_total(const std::vector<int>& counts) {
  std::size_t total = 1;
  for (int c : counts) total *= static_cast<std::size_t>(c);
  return total;
}

// Shared per-point grid evaluation of x, h(x), L_f h(x), ||grad h(x)||.
struct GridEval {
  std::size_t total = 0;
  std::size_t n = 0;
  std::vector<double> x;  // total x n, row-major
  std::vector<double> h;
  std::vector<double> lfh;
  std::vector<double> grad_norm;

  std::span<const double> point(std::size_t i) const { return {x.data() + i * n, n}; }
};

GridEval evaluate_grid(const BarrierProblem& prob) {
  const std::size_t n = prob.state.size();
  GridEval ev;
  ev.total = grid_total(prob.grid);
  ev.n = n;
  ev.x.resize(ev.total * n);
  ev.h.resize(ev.total);
  ev.lfh.resize(ev.total);
  ev.grad_norm.resize(ev.total);
  parallel_for(ev.total, default_thread_count(), [&](std::size_t i) {
    const auto idx = decode_index(i, prob.grid);
    std::vector<double> pt(n);
    for (std::size_t a = 0; a < n; ++a)
      pt[a] = grid_coord(prob.domain.lo[a], prob.domain.hi[a], prob.grid[a], idx[a]);
    std::copy(pt.begin(), pt.end(), ev.x.begin() + static_cast<std::ptrdiff_t>(i * n));
    const auto g = prob.h.grad(pt);
    const auto fv = prob.f.eval(pt);
    double lfh = 0.0;
    double norm2 = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      lfh += g.gradient[a] * fv[a];
      norm2 += g.gradient[a] * g.gradient[a];
    }
    ev.h[i] = g.value;
    ev.lfh[i] = lfh;
    ev.grad_norm[i] = std::sqrt(norm2);
  });
  return ev;
}

// Classification of a time-varying candidate via the sufficient condition:
// unique solutions (declared local Lipschitz) and mu(t, 0) <= 0 for all t.
minfunc::MinimalityVerdict classify_tv(const std::function<double(double, double)>& mu,
                                       const std::vector<double>& t_samples,
                                       const std::optional<minfunc::DeclaredProperties>& declared) {
  minfunc::MinimalityVerdict v;
  v.confidence = minfunc::Confidence::Sampled;
  double worst = -std::numeric_limits<double>::infinity();
  double worst_t = 0.0;
  for (double t : t_samples) {
    const double m = mu(t, 0.0);
    if (m > worst) {
      worst = m;
      worst_t = t;
    }
  }
  v.mu_at_zero = worst;
  if (worst > 1e-12) {
    v.status = minfunc::Status::NotMinimal;
    v.reason = "mu(t, 0) > 0 at sampled t = " + format_double(worst_t);
    return v;
  }
  if (declared && declared->locally_lipschitz) {
    v.status = minfunc::Status::Minimal;
    v.reason = "unique solutions declared and sampled mu(t, 0) <= 0";
    return v;
  }
  v.status = minfunc::Status::Inconclusive;
  v.reason = "sampled mu(t, 0) <= 0 but uniqueness of solutions was not declared";
  return v;
}

Verdict combine(double min_margin, double tol, const minfunc::MinimalityVerdict& mu_verdict) {
  if (min_margin < -tol) return Verdict::Violated;
  switch (mu_verdict.status) {
    case minfunc::Status::Minimal:
      return Verdict::Certified;
    case minfunc::Status::NotMinimal:
      return Verdict::MuNotMinimal;
    case minfunc::Status::Inconclusive:
      return Verdict::CertifiedModuloClassification;
  }
  return Verdict::Violated;
}

}  // namespace

bool Box::contains(std::span<const double> x) const {
  for (std::size_t a = 0; a < lo.size(); ++a)
    if (x[a] < lo[a] || x[a] > hi[a]) return false;
  return true;
}

void Box::validate() const {
  if (lo.empty() || lo.size() != hi.size()) throw Error("box: lo/hi size mismatch");
  for (std::size_t a = 0; a < lo.size(); ++a)
    if (!(lo[a] < hi[a])) throw Error("box: lo must be strictly below hi on every axis");
}

bool BarrierProblem::time_dependent() const {
  return h.has_variable("t") || (f.size() > 0 && f.component(0).has_variable("t"));
}

void BarrierProblem::validate() const {
  domain.validate();
  const std::size_t n = state.size();
  if (n == 0) throw Error("problem: empty state variable list");
  if (domain.dim() != n) throw Error("problem: box dimension does not match the state");
  if (grid.size() != n) throw Error("problem: grid counts do not match the state");
  for (int c : grid)
    if (c < 2) throw Error("problem: grid counts must be at least 2");
  if (static_cast<std::size_t>(f.rows()) != n || f.cols() != 1)
    throw Error("problem: f must have one component per state variable");

  auto check_vars = [&](const std::vector<std::string>& vars, const std::string& who) {
    if (vars.size() != n && vars.size() != n + 1)
      throw Error("problem: " + who + " must take the state variables, optionally followed by t");
    for (std::size_t a = 0; a < n; ++a)
      if (vars[a] != state[a])
        throw Error("problem: " + who + " variable list must start with the state variables");
    if (vars.size() == n + 1 && vars[n] != "t")
      throw Error("problem: the trailing variable of " + who + " must be t");
  };
  check_vars(f.variables(), "f");
  check_vars(h.variables(), "h");
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Certified: return "certified";
    case Verdict::Violated: return "violated";
    case Verdict::CertifiedModuloClassification: return "certified_modulo_classification";
    case Verdict::MuNotMinimal: return "mu_not_minimal";
  }
  return "?";
}

CertificationReport check_mbf(const BarrierProblem& prob, double tol) {
  prob.validate();
  if (prob.time_dependent()) throw Error("check_mbf: use check_tmbf for t-dependent problems");
  if (!prob.mu) throw Error("check_mbf: problem has no mu candidate");

  const GridEval ev = evaluate_grid(prob);
  const auto& mu = prob.mu->mu;

  CertificationReport rep;
  rep.tol = tol;
  rep.samples.resize(ev.total);
  parallel_for(ev.total, default_thread_count(), [&](std::size_t i) {
    Sample& s = rep.samples[i];
    s.x.assign(ev.point(i).begin(), ev.point(i).end());
    s.h = ev.h[i];
    s.lfh = ev.lfh[i];
    s.margin = ev.lfh[i] + mu(ev.h[i]);
  });

  rep.min_margin = std::numeric_limits<double>::infinity();
  rep.s_empty_warning = true;
  for (std::size_t i = 0; i < ev.total; ++i) {
    if (rep.samples[i].margin < rep.min_margin) {
      rep.min_margin = rep.samples[i].margin;
      rep.argmin_index = i;
    }
    if (rep.samples[i].h >= 0.0) rep.s_empty_warning = false;
  }

  rep.mu_verdict = minfunc::classify(*prob.mu);
  rep.verdict = combine(rep.min_margin, tol, *rep.mu_verdict);
  return rep;
}

CertificationReport check_tmbf(const BarrierProblem& prob, double t_end, int t_grid, double tol) {
  prob.validate();
  if (!(t_end > 0.0) || t_grid < 2) throw Error("check_tmbf: bad time interval or grid");
  if (!prob.mu && !prob.mu_tv) throw Error("check_tmbf: problem has no mu candidate");

  const std::size_t n = prob.state.size();
  const bool f_has_t = prob.f.component(0).has_variable("t");
  const bool h_has_t = prob.h.has_variable("t");
  const std::vector<double> ts = linspace(0.0, t_end, t_grid);

  std::function<double(double, double)> mu_tw;
  if (prob.mu_tv) {
    const auto& m = *prob.mu_tv;
    if (m.variables() != std::vector<std::string>{"t", "w"})
      throw Error("check_tmbf: mu(t, w) must take the variables (t, w)");
    mu_tw = [&m](double t, double w) {
      const double pt[2] = {t, w};
      return m.eval(pt);
    };
  } else {
    const auto& cand = *prob.mu;
    mu_tw = [&cand](double, double w) { return cand.mu(w); };
  }

  const std::size_t space_total = grid_total(prob.grid);
  const std::size_t total = space_total * static_cast<std::size_t>(t_grid);

  CertificationReport rep;
  rep.tol = tol;
  rep.time_varying = true;
  rep.samples.resize(total);
  // space-major, t fastest: the argmin tie-break follows this order
  parallel_for(space_total, default_thread_count(), [&](std::size_t si) {
    const auto idx = decode_index(si, prob.grid);
    std::vector<double> xs(n);
    for (std::size_t a = 0; a < n; ++a)
      xs[a] = grid_coord(prob.domain.lo[a], prob.domain.hi[a], prob.grid[a], idx[a]);
    std::vector<double> args(n + 1);
    std::copy(xs.begin(), xs.end(), args.begin());
    for (int j = 0; j < t_grid; ++j) {
      const double t = ts[static_cast<std::size_t>(j)];
      args[n] = t;
      std::span<const double> h_args(args.data(), h_has_t ? n + 1 : n);
      std::span<const double> f_args(args.data(), f_has_t ? n + 1 : n);
      const auto g = prob.h.grad(h_args);
      const auto fv = prob.f.eval(f_args);
      double total_rate = h_has_t ? g.gradient[n] : 0.0;  // dh/dt
      for (std::size_t a = 0; a < n; ++a) total_rate += g.gradient[a] * fv[a];
      Sample& s = rep.samples[si * static_cast<std::size_t>(t_grid) + static_cast<std::size_t>(j)];
      s.x = xs;
      s.t = t;
      s.h = g.value;
      s.lfh = total_rate;
      s.margin = total_rate + mu_tw(t, g.value);
    }
  });

  rep.min_margin = std::numeric_limits<double>::infinity();
  rep.s_empty_warning = true;
  for (std::size_t i = 0; i < total; ++i) {
    if (rep.samples[i].margin < rep.min_margin) {
      rep.min_margin = rep.samples[i].margin;
      rep.argmin_index = i;
    }
    if (rep.samples[i].h >= 0.0) rep.s_empty_warning = false;
  }

  std::optional<minfunc::DeclaredProperties> declared;
  if (prob.mu_tv)
    declared = prob.mu_tv_declared;
  else if (prob.mu)
    declared = prob.mu->declared;
  rep.mu_verdict = classify_tv(mu_tw, ts, declared);
  rep.verdict = combine(rep.min_margin, tol, *rep.mu_verdict);
  return rep;
}

NagumoResult nagumo_boundary_check(const BarrierProblem& prob, double band, double tol) {
  prob.validate();
  if (prob.time_dependent()) throw Error("nagumo_boundary_check: time-invariant problems only");
  const GridEval ev = evaluate_grid(prob);

  NagumoResult res;
  res.band_used = band;
  for (int attempt = 0; attempt < 2; ++attempt) {
    for (std::size_t i = 0; i < ev.total; ++i) {
      if (std::abs(ev.h[i]) <= res.band_used) {
        Sample s;
        s.x.assign(ev.point(i).begin(), ev.point(i).end());
        s.h = ev.h[i];
        s.lfh = ev.lfh[i];
        s.margin = ev.lfh[i];
        res.band_samples.push_back(std::move(s));
        if (res.band_samples.size() == 1 ||
            ev.grad_norm[i] < res.min_grad_norm)
          res.min_grad_norm = ev.grad_norm[i];
      }
    }
    if (!res.band_samples.empty()) break;
    res.band_used *= 10.0;
    res.widened = true;
  }
  if (res.band_samples.empty())
    throw EmptyBoundaryError("no grid point within |h| <= " + format_double(res.band_used));

  res.pass = true;
  for (const auto& s : res.band_samples) {
    if (s.lfh < -tol) {
      res.pass = false;
      res.witness = s;
      break;
    }
  }
  res.regularity_flag = res.min_grad_norm < 1e-6;
  return res;
}

namespace {

// Upper bound on the distance from y to {h >= 0}: exact 0 for members,
// otherwise the best h-crossing found by bisection toward the nearest
// S-grid candidates.
double s_distance(const BarrierProblem& prob, const GridEval& ev,
                  const std::vector<std::size_t>& s_points, std::span<const double> y) {
  const std::size_t n = ev.n;
  std::vector<double> yv(y.begin(), y.end());
  if (prob.h.eval(yv) >= 0.0) return 0.0;

  const std::size_t k_candidates = std::min<std::size_t>(64, s_points.size());
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(s_points.size());
  for (std::size_t idx : s_points) {
    double d2 = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      const double diff = ev.x[idx * n + a] - yv[a];
      d2 += diff * diff;
    }
    order.emplace_back(d2, idx);
  }
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_candidates),
                    order.end());

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> probe(n);
  for (std::size_t c = 0; c < k_candidates; ++c) {
    const std::size_t idx = order[c].second;
    const double seg_len = std::sqrt(order[c].first);
    if (seg_len >= best) continue;  // even the full segment cannot improve
    double t_lo = 0.0;
    double t_hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double tm = 0.5 * (t_lo + t_hi);
      for (std::size_t a = 0; a < n; ++a)
        probe[a] = yv[a] + tm * (ev.x[idx * n + a] - yv[a]);
      if (prob.h.eval(probe) >= 0.0)
        t_hi = tm;
      else
        t_lo = tm;
    }
    best = std::min(best, t_hi * seg_len);
  }
  return best;
}

}  // namespace

QuotientTable distance_quotient_check(const BarrierProblem& prob,
                                      const std::vector<std::vector<double>>& boundary_points,
                                      std::vector<double> eps_sequence) {
  prob.validate();
  if (prob.time_dependent()) throw Error("distance_quotient_check: time-invariant problems only");
  if (eps_sequence.empty()) eps_sequence = {1e-1, 1e-2, 1e-3, 1e-4};

  const GridEval ev = evaluate_grid(prob);
  std::vector<std::size_t> s_points;
  for (std::size_t i = 0; i < ev.total; ++i)
    if (ev.h[i] >= 0.0) s_points.push_back(i);
  if (s_points.empty()) throw Error("distance_quotient_check: S contains no grid point");

  QuotientTable table;
  table.eps_sequence = eps_sequence;
  const std::size_t n = prob.state.size();
  for (const auto& x : boundary_points) {
    if (x.size() != n) throw Error("distance_quotient_check: boundary point dimension mismatch");
    const auto fv = prob.f.eval(x);
    QuotientRow row;
    row.x = x;
    std::vector<double> y(n);
    for (double eps : eps_sequence) {
      for (std::size_t a = 0; a < n; ++a) y[a] = x[a] + eps * fv[a];
      row.quotients.push_back(s_distance(prob, ev, s_points, y) / eps);
    }
    const double q_first = row.quotients.front();
    const double q_last = row.quotients.back();
    if (q_last <= std::max(0.01, 0.11 * q_first))
      row.trend = QuotientTrend::Vanishing;
    else if (q_last > 0.02 && q_last >= 0.5 * q_first)
      row.trend = QuotientTrend::BoundedAway;
    else
      row.trend = QuotientTrend::Inconclusive;
    table.rows.push_back(std::move(row));
  }
  return table;
}

const char* to_string(QuotientTrend t) {
  switch (t) {
    case QuotientTrend::Vanishing: return "vanishing";
    case QuotientTrend::BoundedAway: return "bounded_away";
    case QuotientTrend::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::string QuotientTable::to_csv() const {
  std::ostringstream os;
  os << "x...";
  for (double e : eps_sequence) os << ",q_eps_" << format_double(e);
  os << ",trend\n";
  for (const auto& row : rows) {
    for (std::size_t a = 0; a < row.x.size(); ++a)
      os << (a ? ";" : "") << format_double(row.x[a]);
    for (double q : row.quotients) os << "," << format_double(q);
    os << "," << to_string(row.trend) << "\n";
  }
  return os.str();
}

GammaReconstruction gamma_construct(const BarrierProblem& prob, const std::vector<double>& w_grid,
                                    double band) {
  prob.validate();
  if (prob.time_dependent()) throw Error("gamma_construct: time-invariant problems only");
  if (!(band > 0.0)) throw Error("gamma_construct: band must be positive");
  const GridEval ev = evaluate_grid(prob);

  GammaReconstruction rec;
  rec.w = w_grid;
  rec.band = band;
  for (std::size_t a = 0; a < prob.state.size(); ++a)
    rec.max_grid_pitch =
        std::max(rec.max_grid_pitch, (prob.domain.hi[a] - prob.domain.lo[a]) /
                                         static_cast<double>(prob.grid[a] - 1));

  rec.gamma.resize(w_grid.size());
  for (std::size_t j = 0; j < w_grid.size(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t i = 0; i < ev.total; ++i) {
      if (std::abs(ev.h[i] - w_grid[j]) <= band) {
        best = std::min(best, ev.lfh[i]);
        found = true;
      }
    }
    if (found) rec.gamma[j] = best;
  }

  rec.modulus_of_continuity = 0.0;
  std::optional<std::size_t> prev;
  for (std::size_t j = 0; j < w_grid.size(); ++j) {
    if (!rec.gamma[j]) continue;
    if (prev) {
      const double dw = std::abs(w_grid[j] - w_grid[*prev]);
      if (dw > 0.0)
        rec.modulus_of_continuity = std::max(
            rec.modulus_of_continuity, std::abs(*rec.gamma[j] - *rec.gamma[*prev]) / dw);
    }
    prev = j;
  }
  return rec;
}

minfunc::MuCandidate GammaReconstruction::comparison_candidate() const {
  std::vector<double> ws;
  std::vector<double> vals;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (gamma[j]) {
      ws.push_back(w[j]);
      vals.push_back(-*gamma[j]);
    }
  }
  if (ws.size() < 2) throw Error("comparison_candidate: too few non-empty levels");

  minfunc::MuCandidate cand;
  cand.source = "piecewise-linear -Gamma reconstruction";
  cand.zero_tol = 2.0 * (band + max_grid_pitch);
  cand.mu = [ws, vals](double x) {
    if (x <= ws.front()) return vals.front();
    if (x >= ws.back()) return vals.back();
    const auto it = std::upper_bound(ws.begin(), ws.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - ws.begin());
    const double a = (x - ws[j - 1]) / (ws[j] - ws[j - 1]);
    return (1.0 - a) * vals[j - 1] + a * vals[j];
  };
  return cand;
}

std::string GammaReconstruction::to_csv() const {
  std::ostringstream os;
  os << "w,gamma,empty\n";
  for (std::size_t j = 0; j < w.size(); ++j) {
    os << format_double(w[j]) << ",";
    if (gamma[j])
      os << format_double(*gamma[j]) << ",0\n";
    else
      os << ",1\n";
  }
  return os.str();
}

StabilityResult stability_classify(const minfunc::MuCandidate& mu, double delta) {
  if (!(delta > 0.0)) throw Error("stability_classify: delta must be positive");
  StabilityResult res;
  res.delta = delta;
  res.caveat =
      "class-K sandwich bounds on h near S are the caller's obligation and are not checked";
  bool all_negative = true;
  bool all_nonpositive = true;
  const int samples = mu.sample_count;
  for (int i = 0; i < samples - 1; ++i) {  // [-delta, 0), endpoint excluded
    const double w = -delta * (1.0 - static_cast<double>(i) / (samples - 1));
    const double v = mu.mu(w);
    if (!(v < -mu.zero_tol)) all_negative = false;
    if (v > mu.zero_tol) all_nonpositive = false;
    if (!all_negative && !all_nonpositive) break;
  }
  if (all_negative)
    res.level = StabilityLevel::AsymptoticCertificate;
  else if (all_nonpositive)
    res.level = StabilityLevel::StabilityCertificate;
  else
    res.level = StabilityLevel::None;
  return res;
}

const char* to_string(StabilityLevel level) {
  switch (level) {
    case StabilityLevel::AsymptoticCertificate: return "asymptotic_certificate";
    case StabilityLevel::StabilityCertificate: return "stability_certificate";
    case StabilityLevel::None: return "none";
  }
  return "?";
}

std::string CertificationReport::to_json() const {
  nlohmann::json j;
  j["verdict"] = to_string(verdict);
  j["min_margin"] = min_margin;
  const Sample& w = witness();
  j["witness"] = {{"x", w.x}, {"h", w.h}, {"lfh", w.lfh}, {"margin", w.margin}};
  if (time_varying) j["witness"]["t"] = w.t;
  if (mu_verdict) j["mu_verdict"] = nlohmann::json::parse(mu_verdict->to_json());
  j["s_empty_warning"] = s_empty_warning;
  j["tol"] = tol;
  j["time_varying"] = time_varying;
  return j.dump();
}

std::string CertificationReport::samples_csv() const {
  std::ostringstream os;
  const std::size_t n = samples.empty() ? 0 : samples.front().x.size();
  for (std::size_t a = 0; a < n; ++a) os << "x" << (a + 1) << ",";
  if (time_varying) os << "t,";
  os << "h,Lfh,margin\n";
  for (const auto& s : samples) {
    for (double xv : s.x) os << format_double(xv) << ",";
    if (time_varying) os << format_double(s.t) << ",";
    os << format_double(s.h) << "," << format_double(s.lfh) << "," << format_double(s.margin)
       << "\n";
  }
  return os.str();
}

}  // namespace invkit::certify
