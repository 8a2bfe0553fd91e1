#pragma once

#include <functional>
#include <utility>

#include "invariantkit/expr.hpp"

namespace invkit {

/// Scalar function of one real variable. Wraps either a parsed expression or
/// a sampled reconstruction (see certify::gamma_construct).
using ScalarFn = std::function<double(double)>;

/// Adapter for a single-variable expression.
inline ScalarFn to_scalar_fn(expr::ExprFunction fn) {
  if (fn.arity() != 1) throw Error("scalar function must have exactly one free variable");
  return [fn = std::move(fn)](double w) {
    const double point[1] = {w};
    return fn.eval(point);
  };
}

}  // namespace invkit
