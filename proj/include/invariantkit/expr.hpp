#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "invariantkit/errors.hpp"

namespace invkit::expr {

// Node kinds of the flat syntax tree. Nodes are stored in evaluation
// (post) order, so a single forward pass computes the value.
enum class NodeKind : std::uint8_t {
  Number,
  Variable,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Abs,
  Exp,
  Ln,
  Sqrt,
  Cbrt,
  Min,
  Max,
};

struct Node {
  NodeKind kind;
  double number = 0.0;  // Number
  int var = -1;         // Variable
  int lhs = -1;         // operand indices into the node vector
  int rhs = -1;
};

struct GradResult {
  double value = 0.0;
  std::vector<double> gradient;
  // True when a one-sided derivative was taken at an abs/min/max kink (or a
  // cbrt vertical tangent). Not fatal; the caller decides.
  bool nondifferentiable = false;
};

/// A parsed scalar expression over a fixed, ordered variable list.
/// Immutable after parse(); eval/grad are re-entrant.
class ExprFunction {
 public:
  ExprFunction() = default;

  const std::string& source() const { return source_; }
  const std::vector<std::string>& variables() const { return variables_; }
  std::size_t arity() const { return variables_.size(); }

  double eval(std::span<const double> point) const;
  GradResult grad(std::span<const double> point) const;
  /// Derivative along a single seeded direction (forward-mode dual pass).
  GradResult directional(std::span<const double> point, std::span<const double> seed) const;

  /// Fully parenthesized text form; parse(print()) evaluates identically.
  std::string print() const;

  bool has_variable(const std::string& name) const;
  int variable_index(const std::string& name) const;

  friend ExprFunction parse(const std::string& source, const std::vector<std::string>& variables);

 private:
  std::string print_node(int index) const;

  std::string source_;
  std::vector<std::string> variables_;
  std::vector<Node> nodes_;  // post order, root last
};

ExprFunction parse(const std::string& source, const std::vector<std::string>& variables);

/// Component-wise vector (or k x m matrix) of expressions sharing one
/// variable list. Matrix entries are stored row-major.
class VectorExprFunction {
 public:
  VectorExprFunction() = default;
  VectorExprFunction(std::vector<ExprFunction> components, int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return components_.size(); }
  const ExprFunction& component(int i) const { return components_.at(static_cast<std::size_t>(i)); }
  const ExprFunction& at(int r, int c) const {
    return components_.at(static_cast<std::size_t>(r * cols_ + c));
  }
  const std::vector<std::string>& variables() const { return variables_; }

  /// Row-major values of every component at `point`.
  std::vector<double> eval(std::span<const double> point) const;

 private:
  std::vector<ExprFunction> components_;
  std::vector<std::string> variables_;
  int rows_ = 0;
  int cols_ = 0;
};

VectorExprFunction parse_vector(const std::vector<std::string>& sources,
                                const std::vector<std::string>& variables);
VectorExprFunction parse_matrix(const std::vector<std::vector<std::string>>& sources,
                                const std::vector<std::string>& variables);

}  // namespace invkit::expr
