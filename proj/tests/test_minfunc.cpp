#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "invariantkit/minfunc.hpp"

using namespace invkit;
using namespace invkit::minfunc;

TEST_CASE("counterexample mu = 3 cbrt(w)^2 is not minimal") {
  const auto v = classify(MuCandidate::from_source("3*cbrt(w)^2"));
  CHECK(v.status == Status::NotMinimal);
  CHECK(v.confidence == Confidence::Sampled);
  REQUIRE(v.divergence.has_value());
  CHECK(v.divergence->verdict == DivergenceVerdict::Convergent);
}

TEST_CASE("declared locally Lipschitz linear mu short-circuits") {
  for (double c : {0.0, 1.0, 2.0}) {
    auto cand = MuCandidate::from_source(format_double(c) + "*w");
    cand.declared = DeclaredProperties{true, false, "linear"};
    const auto v = classify(cand);
    CHECK(v.status == Status::Minimal);
    CHECK(v.which_case == MinimalCase::Corollary1);
    CHECK(v.confidence == Confidence::Exact);
  }
}

TEST_CASE("bump-example mu is minimal through case 4") {
  // w ln(-w) on negatives, encoded with abs/max so mu(0) evaluates to 0
  const auto v = classify(MuCandidate::from_source("-abs(w)*ln(max(abs(w),1e-300))"));
  CHECK(v.status == Status::Minimal);
  CHECK(v.which_case == MinimalCase::Case4);
  REQUIRE(v.divergence.has_value());
  CHECK(v.divergence->verdict == DivergenceVerdict::Divergent);
}

TEST_CASE("minimal but not a uniqueness function: -w^(2/3)") {
  const auto v = classify(MuCandidate::from_source("-cbrt(w)^2"));
  CHECK(v.status == Status::Minimal);
  CHECK(v.which_case == MinimalCase::Case2);
  REQUIRE(v.case2_epsilon.has_value());
}

TEST_CASE("case 1: mu(0) < 0, regardless of behavior elsewhere") {
  for (const char* src : {"w - 1", "-1 + w^2", "w^2 - 1e-6", "abs(w) - 0.5"}) {
    const auto v = classify(MuCandidate::from_source(src));
    CHECK(v.status == Status::Minimal);
    CHECK(v.which_case == MinimalCase::Case1);
    CHECK(v.confidence == Confidence::Exact);
  }
}

TEST_CASE("necessity: mu(0) > 0 is never minimal") {
  const auto v = classify(MuCandidate::from_source("w + 1"));
  CHECK(v.status == Status::NotMinimal);
  CHECK(v.confidence == Confidence::Exact);
}

TEST_CASE("extended class K functions are minimal via case 2") {
  for (const char* src : {"w", "w^3", "w + 0.5*w^3", "2*w"}) {
    const auto v = classify(MuCandidate::from_source(src));
    CHECK(v.status == Status::Minimal);
    CHECK(v.which_case == MinimalCase::Case2);
  }
}

TEST_CASE("negated class K functions are minimal via case 4") {
  for (const char* src : {"-w", "-w^3", "-w - 0.5*w^3"}) {
    const auto v = classify(MuCandidate::from_source(src));
    CHECK(v.status == Status::Minimal);
    CHECK(v.which_case == MinimalCase::Case4);
  }
}

TEST_CASE("case 3: sign changes accumulating at the origin") {
  MuCandidate cand;
  cand.source = "w*sin(1/w)";
  cand.mu = [](double w) { return w == 0.0 ? 0.0 : w * std::sin(1.0 / w); };
  const auto v = classify(cand);
  CHECK(v.status == Status::Minimal);
  CHECK(v.which_case == MinimalCase::Case3);
  CHECK_FALSE(v.case3_witnesses.empty());
  for (const auto& w : v.case3_witnesses) {
    CHECK(w.w_positive >= -w.eps);
    CHECK(w.w_negative >= -w.eps);
  }
}

TEST_CASE("divergence test: harmonic tail diverges with constant increments") {
  const auto diag = divergence_test(to_scalar_fn(expr::parse("-w", {"w"})), 1.0);
  CHECK(diag.verdict == DivergenceVerdict::Divergent);
  for (std::size_t j = diag.increments.size() - 5; j < diag.increments.size(); ++j)
    CHECK(diag.increments[j] == doctest::Approx(std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("divergence test: w^(2/3) reciprocal integral converges") {
  const auto diag = divergence_test(to_scalar_fn(expr::parse("cbrt(w)^2", {"w"})), 1.0);
  CHECK(diag.verdict == DivergenceVerdict::Convergent);
  // closed-form oracle: antiderivative of w^(-2/3) on negatives is 3 cbrt(w)
  for (std::size_t j = 0; j < diag.etas.size(); ++j) {
    const double oracle = 3.0 * (std::cbrt(1.0) - std::cbrt(diag.etas[j]));
    CHECK(diag.partial_integrals[j] == doctest::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("divergence test: w ln(-w) partial integrals track -ln|ln(-w)|") {
  const auto mu = to_scalar_fn(expr::parse("w*ln(-w)", {"w"}));
  const double eps = 0.5;
  const auto diag = divergence_test(mu, eps);
  CHECK(diag.verdict == DivergenceVerdict::Divergent);
  for (std::size_t j = 0; j < diag.etas.size(); ++j) {
    const double oracle =
        std::log(std::abs(std::log(diag.etas[j]))) - std::log(std::abs(std::log(eps)));
    CHECK(std::abs(diag.partial_integrals[j] - oracle) <= 1e-6);
  }
}

TEST_CASE("divergence test: cubic blow-up diverges fast") {
  const auto diag = divergence_test(to_scalar_fn(expr::parse("-w^3", {"w"})), 1.0);
  CHECK(diag.verdict == DivergenceVerdict::Divergent);
}

TEST_CASE("sign violation aborts the quadrature") {
  CHECK_THROWS_AS(divergence_test(to_scalar_fn(expr::parse("w", {"w"})), 1.0),
                  SignViolationError);
}

TEST_CASE("declared divergence overrides the numeric semi-decision") {
  auto cand = MuCandidate::from_source("cbrt(w)^2");
  cand.declared = DeclaredProperties{false, true, "asserted for the override test"};
  const auto v = classify(cand);
  CHECK(v.status == Status::Minimal);
  CHECK(v.which_case == MinimalCase::Case4);
  CHECK(v.confidence == Confidence::Exact);
}

TEST_CASE("identically zero mu is minimal") {
  const auto v = classify(MuCandidate::from_source("0*w"));
  CHECK(v.status == Status::Minimal);
  CHECK(v.which_case == MinimalCase::Case2);
}

TEST_CASE("deterministic verdicts") {
  const auto a = classify(MuCandidate::from_source("3*cbrt(w)^2"));
  const auto b = classify(MuCandidate::from_source("3*cbrt(w)^2"));
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("verdict serializes to the documented JSON shape") {
  const auto v = classify(MuCandidate::from_source("w - 1"));
  const auto j = v.to_json();
  CHECK(j.find("\"status\":\"minimal\"") != std::string::npos);
  CHECK(j.find("\"case\":\"case1\"") != std::string::npos);
  CHECK(j.find("\"confidence\":\"exact\"") != std::string::npos);
  CHECK(j.find("\"evidence\"") != std::string::npos);
}
