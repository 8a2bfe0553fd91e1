#include "invariantkit/minfunc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace invkit::minfunc {

namespace {

constexpr double kDivergentFloor = 1e-3;   // non-vanishing increment threshold
constexpr double kGeometricRatio = 0.9;    // decay ratio certifying a summable tail
constexpr double kCauchyIncrement = 1e-9;

// Adaptive Simpson on [a, b] with sign checking of mu.
struct ShellIntegrand {
  const ScalarFn& mu;
  double operator()(double w) const {
    const double m = mu(w);
    if (m <= 0.0) throw SignViolationError(w, m);
    return 1.0 / m;
  }
};

double simpson(const ShellIntegrand& f, double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const ShellIntegrand& f, double a, double fa, double b, double fb,
                        double fm, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, flm);
  const double right = simpson(f, m, fm, b, fb, frm);
  const double err = left + right - whole;
  if (depth <= 0 || std::abs(err) <= 15.0 * std::max(tol, 1e-12 * std::abs(left + right)))
    return left + right + err / 15.0;
  return adaptive_simpson(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

double integrate_shell(const ScalarFn& mu, double a, double b, double tol) {
  ShellIntegrand f{mu};
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = simpson(f, a, fa, b, fb, fm);
  return adaptive_simpson(f, a, fa, b, fb, fm, whole, tol, 40);
}

bool tail_geometric(const std::vector<double>& increments, std::size_t tail) {
  const std::size_t n = increments.size();
  for (std::size_t i = n - tail; i + 1 < n; ++i) {
    const double a = increments[i];
    const double b = increments[i + 1];
    if (a <= 0.0) return false;
    if (b / a > kGeometricRatio) return false;
  }
  return true;
}

}  // namespace

DivergenceDiagnostic divergence_test(const ScalarFn& mu, double eps, int eta_sequence_len) {
  if (!(eps > 0.0)) throw Error("divergence_test: eps must be positive");
  if (eta_sequence_len < 2) throw Error("divergence_test: sequence length too short");

  DivergenceDiagnostic diag;
  diag.eps = eps;
  double eta_prev = eps;
  double total = 0.0;
  for (int j = 1; j <= eta_sequence_len; ++j) {
    const double eta = eps * std::ldexp(1.0, -j);
    const double inc = integrate_shell(mu, -eta_prev, -eta, 1e-10);
    total += inc;
    diag.etas.push_back(eta);
    diag.increments.push_back(inc);
    diag.partial_integrals.push_back(total);
    eta_prev = eta;
  }

  const std::size_t tail = std::min<std::size_t>(10, diag.increments.size());
  double tail_min = diag.increments.back();
  double tail_max = diag.increments.back();
  for (std::size_t i = diag.increments.size() - tail; i < diag.increments.size(); ++i) {
    tail_min = std::min(tail_min, diag.increments[i]);
    tail_max = std::max(tail_max, diag.increments[i]);
  }
  const bool geometric = tail_geometric(diag.increments, tail);
  if (!std::isfinite(total) || (tail_min >= kDivergentFloor && !geometric))
    diag.verdict = DivergenceVerdict::Divergent;
  else if (geometric || tail_max < kCauchyIncrement)
    diag.verdict = DivergenceVerdict::Convergent;
  else
    diag.verdict = DivergenceVerdict::Inconclusive;
  return diag;
}

namespace {

// Per-window sign statistics, sampled uniformly on [-eps, 0].
struct WindowSigns {
  bool has_positive = false;
  bool has_negative = false;
  bool all_nonpositive = true;  // on [-eps, 0), endpoint 0 excluded
  bool all_nonnegative = true;  // on [-eps, 0]
  bool all_positive = true;     // strictly, on [-eps, 0)
  double positive_witness = 0.0;
  double negative_witness = 0.0;
};

WindowSigns scan_window(const ScalarFn& mu, double eps, int samples, double tol) {
  WindowSigns s;
  for (int i = 0; i < samples; ++i) {
    const double w = -eps * (1.0 - static_cast<double>(i) / (samples - 1));
    const double v = mu(w);
    if (v > tol && !s.has_positive) {
      s.has_positive = true;
      s.positive_witness = w;
    }
    if (v < -tol && !s.has_negative) {
      s.has_negative = true;
      s.negative_witness = w;
    }
    if (w < 0.0 && v > tol) s.all_nonpositive = false;
    if (w < 0.0 && v <= tol) s.all_positive = false;
    if (v < -tol) s.all_nonnegative = false;
  }
  return s;
}

}  // namespace

MinimalityVerdict classify(const MuCandidate& cand) {
  if (!cand.mu) throw Error("classify: empty candidate");
  if (!(cand.probe_radius > 0.0)) throw Error("classify: probe interval must have negative left end");
  if (cand.sample_count < 3) throw Error("classify: sample_count must be at least 3");

  MinimalityVerdict v;
  v.mu_at_zero = cand.mu(0.0);
  const double tol = cand.zero_tol;

  // Case 1: mu(0) < 0. Exact, since only the value at 0 is consulted.
  if (v.mu_at_zero < -tol) {
    v.status = Status::Minimal;
    v.which_case = MinimalCase::Case1;
    v.confidence = Confidence::Exact;
    return v;
  }
  // Necessity direction: mu(0) > 0 admits an escaping solution.
  if (v.mu_at_zero > tol) {
    v.status = Status::NotMinimal;
    v.confidence = Confidence::Exact;
    v.reason = "mu(0) > 0";
    return v;
  }

  // Locally Lipschitz shortcut: with mu(0) <= 0, uniqueness settles it.
  if (cand.declared && cand.declared->locally_lipschitz) {
    v.status = Status::Minimal;
    v.which_case = MinimalCase::Corollary1;
    v.confidence = Confidence::Exact;
    v.reason = cand.declared->note;
    return v;
  }

  // Geometric sweep of windows [-eps_j, 0], eps_j = k / 2^j.
  std::vector<double> sweep;
  for (double eps = cand.probe_radius; eps >= 1e-8 * cand.probe_radius && sweep.size() < 24;
       eps *= 0.5)
    sweep.push_back(eps);

  std::vector<WindowSigns> signs;
  signs.reserve(sweep.size());
  for (double eps : sweep) signs.push_back(scan_window(cand.mu, eps, cand.sample_count, tol));

  // Case 2: some window has mu <= 0 throughout [-eps, 0).
  for (std::size_t j = 0; j < sweep.size(); ++j) {
    if (signs[j].all_nonpositive) {
      v.status = Status::Minimal;
      v.which_case = MinimalCase::Case2;
      v.case2_epsilon = sweep[j];
      return v;
    }
  }

  // Case 3: both signs appear in every swept window.
  bool case3 = true;
  std::vector<SignWitnesses> witnesses;
  for (std::size_t j = 0; j < sweep.size(); ++j) {
    if (!(signs[j].has_positive && signs[j].has_negative)) {
      case3 = false;
      break;
    }
    witnesses.push_back({sweep[j], signs[j].positive_witness, signs[j].negative_witness});
  }
  if (case3) {
    v.status = Status::Minimal;
    v.which_case = MinimalCase::Case3;
    v.case3_witnesses = std::move(witnesses);
    return v;
  }

  // Case 4: mu >= 0 on every swept window and 1/mu nonintegrable at 0^-.
  bool nonnegative = true;
  for (const auto& s : signs) nonnegative = nonnegative && s.all_nonnegative;
  if (nonnegative) {
    if (cand.declared && cand.declared->divergent_integral) {
      v.status = Status::Minimal;
      v.which_case = MinimalCase::Case4;
      v.confidence = Confidence::Exact;
      v.reason = "divergence declared: " + cand.declared->note;
      return v;
    }
    // Retry on smaller windows when the integrand hits mu <= 0 (e.g. an
    // interior or endpoint zero away from the origin).
    for (double eps : sweep) {
      DivergenceDiagnostic diag;
      try {
        diag = divergence_test(cand.mu, eps);
      } catch (const SignViolationError&) {
        continue;
      }
      v.divergence = diag;
      if (diag.verdict == DivergenceVerdict::Divergent) {
        v.status = Status::Minimal;
        v.which_case = MinimalCase::Case4;
        return v;
      }
      if (diag.verdict == DivergenceVerdict::Convergent) {
        // Necessity: mu > 0 a.e. near 0 with an integrable reciprocal.
        std::size_t jeps = 0;
        while (jeps < sweep.size() && sweep[jeps] > eps) ++jeps;
        bool strictly_positive = true;
        for (std::size_t j = jeps; j < sweep.size(); ++j)
          strictly_positive = strictly_positive && signs[j].all_positive;
        if (strictly_positive) {
          v.status = Status::NotMinimal;
          v.reason = "mu > 0 near 0 and the reciprocal integral converges";
          return v;
        }
        v.status = Status::Inconclusive;
        v.reason = "convergent reciprocal integral but positivity is unclear at sampled points";
        return v;
      }
      v.status = Status::Inconclusive;
      v.reason = "divergence test inconclusive";
      return v;
    }
    v.status = Status::Inconclusive;
    v.reason = "integrand left the positive regime on every swept window";
    return v;
  }

  v.status = Status::Inconclusive;
  v.reason = "sampled signs match none of the four cases";
  return v;
}

MuCandidate MuCandidate::from_expression(expr::ExprFunction fn) {
  MuCandidate c;
  c.source = fn.source();
  c.mu = to_scalar_fn(std::move(fn));
  return c;
}

MuCandidate MuCandidate::from_source(const std::string& text) {
  return from_expression(expr::parse(text, {"w"}));
}

const char* to_string(Status s) {
  switch (s) {
    case Status::Minimal: return "minimal";
    case Status::NotMinimal: return "not_minimal";
    case Status::Inconclusive: return "inconclusive";
  }
  return "?";
}

const char* to_string(MinimalCase c) {
  switch (c) {
    case MinimalCase::None: return "none";
    case MinimalCase::Case1: return "case1";
    case MinimalCase::Case2: return "case2";
    case MinimalCase::Case3: return "case3";
    case MinimalCase::Case4: return "case4";
    case MinimalCase::Corollary1: return "corollary1";
  }
  return "?";
}

const char* to_string(Confidence c) {
  return c == Confidence::Exact ? "exact" : "sampled";
}

const char* to_string(DivergenceVerdict v) {
  switch (v) {
    case DivergenceVerdict::Divergent: return "divergent";
    case DivergenceVerdict::Convergent: return "convergent";
    case DivergenceVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::string MinimalityVerdict::to_json() const {
  nlohmann::json evidence;
  evidence["mu_at_zero"] = mu_at_zero;
  if (case2_epsilon) evidence["case2_epsilon"] = *case2_epsilon;
  if (!case3_witnesses.empty()) {
    nlohmann::json ws = nlohmann::json::array();
    for (const auto& w : case3_witnesses)
      ws.push_back({{"eps", w.eps}, {"w_positive", w.w_positive}, {"w_negative", w.w_negative}});
    evidence["case3_witnesses"] = ws;
  }
  if (divergence) {
    evidence["divergence"] = {{"verdict", to_string(divergence->verdict)},
                              {"eps", divergence->eps},
                              {"partial_integrals", divergence->partial_integrals}};
  }
  if (!reason.empty()) evidence["reason"] = reason;
  nlohmann::json j = {{"status", to_string(status)},
                      {"case", to_string(which_case)},
                      {"evidence", evidence},
                      {"confidence", to_string(confidence)}};
  return j.dump();
}

}  // namespace invkit::minfunc
