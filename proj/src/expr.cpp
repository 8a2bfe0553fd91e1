#include "invariantkit/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace invkit::expr {

namespace {

// Forward-mode dual number: value + derivative along one seeded direction.
struct Dual {
  double v = 0.0;
  double d = 0.0;
};

bool is_integral(double x) {
  return std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9.007199254740992e15;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Parser: recursive descent, emits nodes in post order.
//
//   expr    := term (('+'|'-') term)*
//   term    := unary (('*'|'/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          (right associative)
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
// ---------------------------------------------------------------------------
class Parser {
 public:
  Parser(const std::string& src, const std::vector<std::string>& variables)
      : src_(src), variables_(variables) {}

  std::vector<Node> run() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "empty expression");
    parse_expr();
    skip_ws();
    if (pos_ < src_.size())
      throw SyntaxError(pos_, std::string("unexpected character '") + src_[pos_] + "'");
    return std::move(nodes_);
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) throw SyntaxError(pos_, std::string("expected '") + c + "'");
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  int emit(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        int rhs = parse_term();
        lhs = emit({NodeKind::Add, 0.0, -1, lhs, rhs});
      } else if (accept('-')) {
        int rhs = parse_term();
        lhs = emit({NodeKind::Sub, 0.0, -1, lhs, rhs});
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        int rhs = parse_unary();
        lhs = emit({NodeKind::Mul, 0.0, -1, lhs, rhs});
      } else if (accept('/')) {
        int rhs = parse_unary();
        lhs = emit({NodeKind::Div, 0.0, -1, lhs, rhs});
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    if (accept('-')) {
      int operand = parse_unary();
      return emit({NodeKind::Neg, 0.0, -1, operand, -1});
    }
    return parse_power();
  }

  int parse_power() {
    int base = parse_primary();
    if (accept('^')) {
      int exponent = parse_unary();  // right associative, allows 2^-3
      return emit({NodeKind::Pow, 0.0, -1, base, exponent});
    }
    return base;
  }

  int parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "unexpected end of input");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      int inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
    throw SyntaxError(pos_, std::string("unexpected character '") + c + "'");
  }

  int parse_number() {
    const char* begin = src_.c_str() + pos_;
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end == begin) throw SyntaxError(pos_, "malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    return emit({NodeKind::Number, value, -1, -1, -1});
  }

  int parse_name() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string name = src_.substr(start, pos_ - start);
    if (peek() == '(') return parse_call(name, start);
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      if (variables_[i] == name)
        return emit({NodeKind::Variable, 0.0, static_cast<int>(i), -1, -1});
    }
    throw UnknownVariableError(name);
  }

  int parse_call(const std::string& name, std::size_t name_pos) {
    NodeKind kind;
    int argc;
    if (name == "abs") {
      kind = NodeKind::Abs;
      argc = 1;
    } else if (name == "exp") {
      kind = NodeKind::Exp;
      argc = 1;
    } else if (name == "ln") {
      kind = NodeKind::Ln;
      argc = 1;
    } else if (name == "sqrt") {
      kind = NodeKind::Sqrt;
      argc = 1;
    } else if (name == "cbrt") {
      kind = NodeKind::Cbrt;
      argc = 1;
    } else if (name == "min") {
      kind = NodeKind::Min;
      argc = 2;
    } else if (name == "max") {
      kind = NodeKind::Max;
      argc = 2;
    } else {
      throw SyntaxError(name_pos, "unknown function '" + name + "'");
    }
    expect('(');
    int a = parse_expr();
    int b = -1;
    if (argc == 2) {
      expect(',');
      b = parse_expr();
    }
    expect(')');
    return emit({kind, 0.0, -1, a, b});
  }

  const std::string& src_;
  const std::vector<std::string>& variables_;
  std::size_t pos_ = 0;
  std::vector<Node> nodes_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

// Walks the post-order node list once. Domain checks report the offending
// subexpression through `printer`.
template <typename Printer>
struct Evaluator {
  const std::vector<Node>& nodes;
  const Printer& printer;
  bool* kink = nullptr;  // set when a one-sided derivative is taken

  void flag_kink() const {
    if (kink != nullptr) *kink = true;
  }

  Dual eval_node(int i, const Dual* vals) const {
    const Node& n = nodes[static_cast<std::size_t>(i)];
    const Dual a = n.lhs >= 0 ? vals[n.lhs] : Dual{};
    const Dual b = n.rhs >= 0 ? vals[n.rhs] : Dual{};
    switch (n.kind) {
      case NodeKind::Number:
      case NodeKind::Variable:
        return {};  // handled by the caller
      case NodeKind::Neg:
        return {-a.v, -a.d};
      case NodeKind::Add:
        return {a.v + b.v, a.d + b.d};
      case NodeKind::Sub:
        return {a.v - b.v, a.d - b.d};
      case NodeKind::Mul:
        return {a.v * b.v, a.d * b.v + a.v * b.d};
      case NodeKind::Div:
        if (b.v == 0.0) throw DomainError("division by zero", printer(i));
        return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
      case NodeKind::Pow:
        return pow_node(i, a, b);
      case NodeKind::Abs: {
        if (a.v > 0.0) return {a.v, a.d};
        if (a.v < 0.0) return {-a.v, -a.d};
        // one-sided from the positive direction: directional derivative |a.d|
        if (a.d != 0.0) flag_kink();
        return {0.0, std::abs(a.d)};
      }
      case NodeKind::Exp: {
        double e = std::exp(a.v);
        return {e, e * a.d};
      }
      case NodeKind::Ln:
        if (a.v <= 0.0) throw DomainError("ln of non-positive value", printer(i));
        return {std::log(a.v), a.d / a.v};
      case NodeKind::Sqrt: {
        if (a.v < 0.0) throw DomainError("sqrt of negative value", printer(i));
        double s = std::sqrt(a.v);
        if (a.v == 0.0) {
          if (a.d != 0.0) flag_kink();
          return {0.0, a.d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()};
        }
        return {s, a.d / (2.0 * s)};
      }
      case NodeKind::Cbrt: {
        double c = std::cbrt(a.v);  // odd extension, cbrt(-8) = -2
        if (a.v == 0.0) {
          if (a.d != 0.0) flag_kink();  // vertical tangent
          return {0.0, a.d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()};
        }
        return {c, a.d / (3.0 * c * c)};
      }
      case NodeKind::Min: {
        if (a.v < b.v) return a;
        if (b.v < a.v) return b;
        if (a.d != b.d) flag_kink();
        return {a.v, std::min(a.d, b.d)};  // one-sided from the positive direction
      }
      case NodeKind::Max: {
        if (a.v > b.v) return a;
        if (b.v > a.v) return b;
        if (a.d != b.d) flag_kink();
        return {a.v, std::max(a.d, b.d)};
      }
    }
    return {};
  }

  Dual pow_node(int i, Dual a, Dual b) const {
    if (a.v < 0.0 && !is_integral(b.v))
      throw DomainError("negative base with non-integer exponent (use cbrt)", printer(i));
    if (a.v == 0.0 && b.v < 0.0) throw DomainError("zero base with negative exponent", printer(i));
    double v = std::pow(a.v, b.v);
    double d;
    if (b.d == 0.0) {
      // constant exponent along this direction: d = b * a^(b-1) * a'
      if (a.d == 0.0 || b.v == 0.0)
        d = 0.0;
      else
        d = b.v * std::pow(a.v, b.v - 1.0) * a.d;
    } else {
      if (a.v <= 0.0)
        throw DomainError("non-positive base with varying exponent", printer(i));
      d = v * (b.d * std::log(a.v) + b.v * a.d / a.v);
    }
    return {v, d};
  }
};

}  // namespace

double ExprFunction::eval(std::span<const double> point) const {
  if (point.size() != variables_.size())
    throw Error("eval: point has " + std::to_string(point.size()) + " entries, expected " +
                std::to_string(variables_.size()));
  auto printer = [this](int i) { return print_node(i); };
  Evaluator<decltype(printer)> ev{nodes_, printer, nullptr};
  std::vector<Dual> vals(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.kind == NodeKind::Number)
      vals[i] = {n.number, 0.0};
    else if (n.kind == NodeKind::Variable)
      vals[i] = {point[static_cast<std::size_t>(n.var)], 0.0};
    else
      vals[i] = ev.eval_node(static_cast<int>(i), vals.data());
  }
  return vals.back().v;
}

GradResult ExprFunction::directional(std::span<const double> point,
                                     std::span<const double> seed) const {
  if (point.size() != variables_.size() || seed.size() != variables_.size())
    throw Error("directional: point/seed size mismatch");
  auto printer = [this](int i) { return print_node(i); };
  bool kink = false;
  Evaluator<decltype(printer)> ev{nodes_, printer, &kink};
  std::vector<Dual> vals(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.kind == NodeKind::Number)
      vals[i] = {n.number, 0.0};
    else if (n.kind == NodeKind::Variable)
      vals[i] = {point[static_cast<std::size_t>(n.var)], seed[static_cast<std::size_t>(n.var)]};
    else
      vals[i] = ev.eval_node(static_cast<int>(i), vals.data());
  }
  GradResult r;
  r.value = vals.back().v;
  r.gradient = {vals.back().d};
  r.nondifferentiable = kink;
  return r;
}

GradResult ExprFunction::grad(std::span<const double> point) const {
  GradResult r;
  r.gradient.resize(variables_.size(), 0.0);
  std::vector<double> seed(variables_.size(), 0.0);
  for (std::size_t k = 0; k < variables_.size(); ++k) {
    seed[k] = 1.0;
    GradResult one = directional(point, seed);
    seed[k] = 0.0;
    r.value = one.value;
    r.gradient[k] = one.gradient[0];
    r.nondifferentiable = r.nondifferentiable || one.nondifferentiable;
  }
  if (variables_.empty()) r.value = eval(point);
  return r;
}

std::string ExprFunction::print() const { return print_node(static_cast<int>(nodes_.size()) - 1); }

std::string ExprFunction::print_node(int index) const {
  const Node& n = nodes_[static_cast<std::size_t>(index)];
  switch (n.kind) {
    case NodeKind::Number:
      return format_double(n.number);
    case NodeKind::Variable:
      return variables_[static_cast<std::size_t>(n.var)];
    case NodeKind::Neg:
      return "(-" + print_node(n.lhs) + ")";
    case NodeKind::Add:
      return "(" + print_node(n.lhs) + " + " + print_node(n.rhs) + ")";
    case NodeKind::Sub:
      return "(" + print_node(n.lhs) + " - " + print_node(n.rhs) + ")";
    case NodeKind::Mul:
      return "(" + print_node(n.lhs) + " * " + print_node(n.rhs) + ")";
    case NodeKind::Div:
      return "(" + print_node(n.lhs) + " / " + print_node(n.rhs) + ")";
    case NodeKind::Pow:
      return "(" + print_node(n.lhs) + " ^ " + print_node(n.rhs) + ")";
    case NodeKind::Abs:
      return "abs(" + print_node(n.lhs) + ")";
    case NodeKind::Exp:
      return "exp(" + print_node(n.lhs) + ")";
    case NodeKind::Ln:
      return "ln(" + print_node(n.lhs) + ")";
    case NodeKind::Sqrt:
      return "sqrt(" + print_node(n.lhs) + ")";
    case NodeKind::Cbrt:
      return "cbrt(" + print_node(n.lhs) + ")";
    case NodeKind::Min:
      return "min(" + print_node(n.lhs) + ", " + print_node(n.rhs) + ")";
    case NodeKind::Max:
      return "max(" + print_node(n.lhs) + ", " + print_node(n.rhs) + ")";
  }
  return {};
}

bool ExprFunction::has_variable(const std::string& name) const {
  return variable_index(name) >= 0;
}

int ExprFunction::variable_index(const std::string& name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i)
    if (variables_[i] == name) return static_cast<int>(i);
  return -1;
}

ExprFunction parse(const std::string& source, const std::vector<std::string>& variables) {
  ExprFunction fn;
  fn.source_ = source;
  fn.variables_ = variables;
  fn.nodes_ = Parser(source, variables).run();
  return fn;
}

// ---------------------------------------------------------------------------
// VectorExprFunction
// ---------------------------------------------------------------------------

VectorExprFunction::VectorExprFunction(std::vector<ExprFunction> components, int rows, int cols)
    : components_(std::move(components)), rows_(rows), cols_(cols) {
  if (components_.empty() || static_cast<int>(components_.size()) != rows_ * cols_)
    throw Error("VectorExprFunction: component count does not match the declared shape");
  variables_ = components_.front().variables();
  for (const auto& c : components_)
    if (c.variables() != variables_)
      throw Error("VectorExprFunction: all components must share one variable list");
}

std::vector<double> VectorExprFunction::eval(std::span<const double> point) const {
  std::vector<double> out(components_.size());
  for (std::size_t i = 0; i < components_.size(); ++i) out[i] = components_[i].eval(point);
  return out;
}

VectorExprFunction parse_vector(const std::vector<std::string>& sources,
                                const std::vector<std::string>& variables) {
  std::vector<ExprFunction> comps;
  comps.reserve(sources.size());
  for (const auto& s : sources) comps.push_back(parse(s, variables));
  return VectorExprFunction(std::move(comps), static_cast<int>(sources.size()), 1);
}

VectorExprFunction parse_matrix(const std::vector<std::vector<std::string>>& sources,
                                const std::vector<std::string>& variables) {
  if (sources.empty()) throw Error("parse_matrix: empty row list");
  const int cols = static_cast<int>(sources.front().size());
  std::vector<ExprFunction> comps;
  for (const auto& row : sources) {
    if (static_cast<int>(row.size()) != cols) throw Error("parse_matrix: ragged rows");
    for (const auto& s : row) comps.push_back(parse(s, variables));
  }
  return VectorExprFunction(std::move(comps), static_cast<int>(sources.size()), cols);
}

}  // namespace invkit::expr
