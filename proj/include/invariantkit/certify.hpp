#pragma once

#include <optional>
#include <string>
#include <vector>

#include "invariantkit/expr.hpp"
#include "invariantkit/minfunc.hpp"

namespace invkit::certify {

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
  std::size_t dim() const { return lo.size(); }
  bool contains(std::span<const double> x) const;
  void validate() const;
};

/// A barrier verification problem: dx/dt = f(x), S = {h >= 0}, candidate
/// comparison function mu, sampled over an axis-aligned box.
/// f and h take the state variables, optionally followed by "t".
struct BarrierProblem {
  expr::VectorExprFunction f;  // n x 1
  expr::ExprFunction h;
  std::optional<minfunc::MuCandidate> mu;   // time-invariant candidate
  std::optional<expr::ExprFunction> mu_tv;  // mu(t, w) for the time-varying check
  std::optional<minfunc::DeclaredProperties> mu_tv_declared;
  Box domain;
  std::vector<int> grid;  // per-axis sample counts, >= 2
  std::vector<std::string> state;

  void validate() const;
  bool time_dependent() const;  // f or h mentions "t"
};

enum class Verdict {
  Certified,
  Violated,
  CertifiedModuloClassification,  // inequality holds, mu classification inconclusive
  MuNotMinimal,                   // inequality holds, mu is not a minimal function
};
const char* to_string(Verdict v);

struct Sample {
  std::vector<double> x;
  double t = 0.0;
  double h = 0.0;
  double lfh = 0.0;  // includes dh/dt for the time-varying check
  double margin = 0.0;
};

struct CertificationReport {
  std::vector<Sample> samples;
  double min_margin = 0.0;
  std::size_t argmin_index = 0;  // into samples
  Verdict verdict = Verdict::Violated;
  std::optional<minfunc::MinimalityVerdict> mu_verdict;
  bool s_empty_warning = false;  // h < 0 at every sampled point
  bool time_varying = false;
  double tol = 1e-9;

  const Sample& witness() const { return samples.at(argmin_index); }
  std::string to_json() const;
  std::string samples_csv() const;  // columns: x..., [t,] h, Lfh, margin
};

/// Samples L_f h(x) + mu(h(x)) over the full box and combines the pointwise
/// inequality with the mu classification.
CertificationReport check_mbf(const BarrierProblem& prob, double tol = 1e-9);

/// Time-varying variant: dh/dt + L_f h >= -mu(t, h) over t-grid x space-grid.
/// mu classification uses the sampled mu(t,0) <= 0 condition plus the
/// declared-Lipschitz flag (uniqueness is not decidable from samples).
CertificationReport check_tmbf(const BarrierProblem& prob, double t_end, int t_grid,
                               double tol = 1e-9);

struct NagumoResult {
  bool pass = false;
  std::optional<Sample> witness;  // failing boundary sample
  std::vector<Sample> band_samples;
  double min_grad_norm = 0.0;
  bool regularity_flag = false;  // raised when min ||grad h|| < 1e-6 on the band
  double band_used = 0.0;
  bool widened = false;
};

/// Checks L_f h >= -tol on the sampled band |h| <= band. Widens the band
/// once (x10) when empty, then throws EmptyBoundaryError.
NagumoResult nagumo_boundary_check(const BarrierProblem& prob, double band = 1e-3,
                                   double tol = 1e-9);

enum class QuotientTrend { Vanishing, BoundedAway, Inconclusive };
const char* to_string(QuotientTrend t);

struct QuotientRow {
  std::vector<double> x;
  std::vector<double> quotients;  // one per eps
  QuotientTrend trend = QuotientTrend::Inconclusive;
};

struct QuotientTable {
  std::vector<double> eps_sequence;
  std::vector<QuotientRow> rows;
  std::string to_csv() const;
};

/// Distance-quotient cross-check rho(x + eps f(x), S)/eps at boundary points.
/// S-distance is estimated from the grid points with h >= 0, refined by
/// bisecting h along segments toward the nearest candidates.
QuotientTable distance_quotient_check(const BarrierProblem& prob,
                                      const std::vector<std::vector<double>>& boundary_points,
                                      std::vector<double> eps_sequence = {});

struct GammaReconstruction {
  std::vector<double> w;
  std::vector<std::optional<double>> gamma;  // empty level band => nullopt
  double band = 0.0;
  double max_grid_pitch = 0.0;
  double modulus_of_continuity = 0.0;  // max |dGamma| / |dw| between non-empty neighbours

  /// Piecewise-linear -Gamma as a classification candidate. The sign
  /// threshold is widened to the reconstruction error scale
  /// 2*(band + max_grid_pitch); the compactness hypothesis behind the
  /// construction is assumed, not verified.
  minfunc::MuCandidate comparison_candidate() const;
  std::string to_csv() const;
};

/// Sampled tightest comparison construction:
/// Gamma(w) = inf { L_f h(x) : x in grid, |h(x) - w| <= band }.
GammaReconstruction gamma_construct(const BarrierProblem& prob, const std::vector<double>& w_grid,
                                    double band);

enum class StabilityLevel { AsymptoticCertificate, StabilityCertificate, None };
const char* to_string(StabilityLevel level);

struct StabilityResult {
  StabilityLevel level = StabilityLevel::None;
  double delta = 0.0;
  std::string caveat;  // the class-K sandwich obligation, surfaced to the caller
};

/// Sampled sign classification of mu on [-delta, 0).
StabilityResult stability_classify(const minfunc::MuCandidate& mu, double delta);

}  // namespace invkit::certify
