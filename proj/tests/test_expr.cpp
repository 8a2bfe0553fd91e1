#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <random>

#include "invariantkit/expr.hpp"

using namespace invkit;
using expr::parse;

namespace {

double eval1(const std::string& src, double x, const std::string& var = "x") {
  const double pt[1] = {x};
  return parse(src, {var}).eval(pt);
}

}  // namespace

TEST_CASE("basic evaluation") {
  CHECK(eval1("-x1", 2.0, "x1") == -2.0);
  CHECK(eval1("3*cbrt(w)^2", 8.0, "w") == doctest::Approx(12.0));
  const double pt[2] = {3.0, -2.0};
  CHECK(parse("x1*x2", {"x1", "x2"}).eval(pt) == -6.0);
  CHECK(eval1("abs(x1)", -3.0, "x1") == 3.0);
  CHECK(eval1("2^-3", 1.0) == doctest::Approx(0.125));
  CHECK(eval1("-x^2", 3.0) == -9.0);          // unary minus binds looser than ^
  CHECK(eval1("2^3^2", 1.0) == 512.0);        // right associative
  CHECK(eval1("min(x, 2*x)", -1.0) == -2.0);
  CHECK(eval1("max(x, 0)", -1.0) == 0.0);
  CHECK(eval1("sqrt(x)", 9.0) == 3.0);
}

TEST_CASE("exp(-1/x) against the series oracle") {
  // reference value of e^{-1} via the Taylor series of exp
  double target = 0.0;
  double term = 1.0;
  for (int k = 1; k <= 25; ++k) {
    target += term;
    term *= -1.0 / k;
  }
  CHECK(eval1("exp(-1/x)", 1.0) == doctest::Approx(target).epsilon(1e-15));
  CHECK(eval1("exp(-1/x)", 1.0) == doctest::Approx(0.36787944117144233));
}

TEST_CASE("cbrt odd extension") {
  CHECK(eval1("cbrt(x)", -8.0) == -2.0);
  for (double a : {0.0, 0.5, 1.0, 7.0, 123.456}) {
    CHECK(eval1("cbrt(x)", -a) == doctest::Approx(-eval1("cbrt(x)", a)));
  }
}

TEST_CASE("domain errors carry the offending subexpression") {
  CHECK_THROWS_AS(eval1("ln(w)", 0.0, "w"), DomainError);
  CHECK_THROWS_AS(eval1("1/x", 0.0), DomainError);
  CHECK_THROWS_AS(eval1("x^0.5", -1.0), DomainError);   // negative base, use cbrt
  CHECK_THROWS_AS(eval1("(0*x)^-1", 1.0), DomainError); // 0^negative
  try {
    eval1("1 + ln(x - 2)", 1.0);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(e.subexpression.find("ln") != std::string::npos);
  }
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse("x +", {"x"}), SyntaxError);
  CHECK_THROWS_AS(parse("", {"x"}), SyntaxError);
  CHECK_THROWS_AS(parse("foo(x)", {"x"}), SyntaxError);
  CHECK_THROWS_AS(parse("y + 1", {"x"}), UnknownVariableError);
  CHECK_THROWS_AS(parse("min(x)", {"x"}), SyntaxError);
}

TEST_CASE("gradients: product rule and powers") {
  const double pt[2] = {3.0, -2.0};
  const auto g = parse("x1*x2", {"x1", "x2"}).grad(pt);
  CHECK(g.gradient[0] == -2.0);
  CHECK(g.gradient[1] == 3.0);
  CHECK_FALSE(g.nondifferentiable);

  const double w1[1] = {1.0};
  CHECK(parse("3*cbrt(w)^2", {"w"}).grad(w1).gradient[0] == doctest::Approx(2.0));
}

TEST_CASE("grad agrees with central finite differences") {
  // one deterministic spot check; the acceptance suite sweeps 20 expressions
  const auto fn = parse("x1^3", {"x1"});
  const double x = 2.0;
  const double step = 1e-5;
  const double lo[1] = {x - step};
  const double hi[1] = {x + step};
  const double fd = (fn.eval(hi) - fn.eval(lo)) / (2.0 * step);
  const double pt[1] = {x};
  CHECK(fn.grad(pt).gradient[0] == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("kinks are flagged, one-sided from the positive direction") {
  const double zero[1] = {0.0};
  const auto g = parse("abs(x)", {"x"}).grad(zero);
  CHECK(g.gradient[0] == 1.0);  // |x| grows like +x from above
  CHECK(g.nondifferentiable);

  const auto g2 = parse("abs(-x)", {"x"}).grad(zero);
  CHECK(g2.gradient[0] == 1.0);
  CHECK(g2.nondifferentiable);

  const auto g3 = parse("min(x, 2*x)", {"x"}).grad(zero);
  CHECK(g3.gradient[0] == 1.0);  // directional one-sided derivative
  CHECK(g3.nondifferentiable);

  const double one[1] = {1.0};
  CHECK_FALSE(parse("abs(x)", {"x"}).grad(one).nondifferentiable);
}

TEST_CASE("round trip: parse(print(e)) evaluates identically") {
  // randomized expression trees up to depth 6 over the full grammar
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  std::uniform_int_distribution<int> pick(0, 9);

  std::function<std::string(int)> gen = [&](int depth) -> std::string {
    if (depth <= 0 || pick(rng) == 0) {
      if (pick(rng) < 5) return "x";
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.3f", coef(rng));
      return buf;
    }
    switch (pick(rng)) {
      case 0: return "(" + gen(depth - 1) + " + " + gen(depth - 1) + ")";
      case 1: return "(" + gen(depth - 1) + " - " + gen(depth - 1) + ")";
      case 2: return "(" + gen(depth - 1) + " * " + gen(depth - 1) + ")";
      case 3: return "(" + gen(depth - 1) + " / (2 + abs(" + gen(depth - 1) + ")))";
      case 4: return "abs(" + gen(depth - 1) + ")";
      case 5: return "exp(min(" + gen(depth - 1) + ", 3))";
      case 6: return "cbrt(" + gen(depth - 1) + ")";
      case 7: return "sqrt(abs(" + gen(depth - 1) + "))";
      case 8: return "min(" + gen(depth - 1) + ", " + gen(depth - 1) + ")";
      default: return "max(" + gen(depth - 1) + ", " + gen(depth - 1) + ")";
    }
  };

  std::uniform_real_distribution<double> xs(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto src = gen(6);
    const auto fn = parse(src, {"x"});
    const auto reparsed = parse(fn.print(), {"x"});
    for (int i = 0; i < 20; ++i) {
      const double pt[1] = {xs(rng)};
      const double a = fn.eval(pt);
      const double b = reparsed.eval(pt);
      CHECK(a == b);  // bit-identical
    }
  }
}

TEST_CASE("deterministic evaluation") {
  const auto fn = parse("exp(x) * cbrt(x - 0.5) / (1 + x^2)", {"x"});
  const double pt[1] = {0.7};
  const double first = fn.eval(pt);
  for (int i = 0; i < 10; ++i) CHECK(fn.eval(pt) == first);
}

TEST_CASE("vector expressions share a variable list") {
  const auto f = expr::parse_vector({"-x1 + x2", "x1 - x2"}, {"x1", "x2"});
  CHECK(f.rows() == 2);
  const double pt[2] = {1.0, 2.0};
  const auto v = f.eval(pt);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == -1.0);

  const auto A = expr::parse_matrix({{"1", "0"}, {"0", "x1"}}, {"x1"});
  CHECK(A.rows() == 2);
  CHECK(A.cols() == 2);
}

TEST_CASE("varying exponent uses the logarithmic derivative") {
  const double pt[1] = {2.0};
  const auto g = parse("x^x", {"x"}).grad(pt);
  CHECK(g.value == doctest::Approx(4.0));
  CHECK(g.gradient[0] == doctest::Approx(4.0 * (std::log(2.0) + 1.0)));
}
