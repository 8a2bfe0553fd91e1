#pragma once

#include <optional>
#include <string>
#include <vector>

#include "invariantkit/scalar.hpp"

namespace invkit::minfunc {

struct DeclaredProperties {
  bool locally_lipschitz = false;
  bool divergent_integral = false;
  std::string note;  // provenance of the assertion
};

/// A candidate comparison function mu together with the probe configuration
/// used by the sampled sign checks.
struct MuCandidate {
  ScalarFn mu;
  std::string source;  // expression text or a description of the callable
  std::optional<DeclaredProperties> declared;
  double probe_radius = 1.0;  // probe interval [-k, 0]
  int sample_count = 10001;   // samples per swept window
  double zero_tol = 1e-12;    // sign-test threshold

  static MuCandidate from_expression(expr::ExprFunction fn);
  static MuCandidate from_source(const std::string& text);  // single variable "w"
};

enum class Status { Minimal, NotMinimal, Inconclusive };
enum class MinimalCase { None, Case1, Case2, Case3, Case4, Corollary1 };
enum class Confidence { Exact, Sampled };

enum class DivergenceVerdict { Divergent, Convergent, Inconclusive };

/// Partial improper integrals I_j = integral of 1/mu over [-eps, -eta_j],
/// eta_j = eps * 2^-j, plus the verdict drawn from the increment tail.
struct DivergenceDiagnostic {
  DivergenceVerdict verdict = DivergenceVerdict::Inconclusive;
  double eps = 0.0;
  std::vector<double> etas;
  std::vector<double> partial_integrals;
  std::vector<double> increments;
};

struct SignWitnesses {
  double eps;
  double w_positive;
  double w_negative;
};

struct MinimalityVerdict {
  Status status = Status::Inconclusive;
  MinimalCase which_case = MinimalCase::None;
  Confidence confidence = Confidence::Sampled;
  double mu_at_zero = 0.0;
  std::optional<double> case2_epsilon;
  std::vector<SignWitnesses> case3_witnesses;  // one per shrinking eps
  std::optional<DivergenceDiagnostic> divergence;
  std::string reason;

  std::string to_json() const;
};

const char* to_string(Status s);
const char* to_string(MinimalCase c);
const char* to_string(Confidence c);
const char* to_string(DivergenceVerdict v);

/// Decision cascade over the four cases of the minimality characterization,
/// with the locally-Lipschitz shortcut. Sampled verdicts are semi-decisions.
MinimalityVerdict classify(const MuCandidate& cand);

/// Numeric nonintegrability test for 1/mu near w = 0^- via adaptive Simpson
/// on dyadic shells. Throws SignViolationError when mu <= 0 is sampled
/// inside the integration range.
DivergenceDiagnostic divergence_test(const ScalarFn& mu, double eps, int eta_sequence_len = 40);

}  // namespace invkit::minfunc
