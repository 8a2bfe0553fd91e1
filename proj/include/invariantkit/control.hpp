#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "invariantkit/certify.hpp"
#include "invariantkit/expr.hpp"
#include "invariantkit/minfunc.hpp"

namespace invkit::control {

/// Control-affine barrier problem dx/dt = f(x) + g(x) u with affine input
/// constraints U(x) = {u : A(x) u <= b(x)} and nominal controller k_nom.
/// Sizes are bounded (m <= 8, k <= 16) by the exact active-set enumeration.
struct ControlProblem {
  expr::VectorExprFunction f;      // n x 1
  expr::VectorExprFunction g;      // n x m
  expr::ExprFunction h;
  minfunc::MuCandidate mu;
  expr::VectorExprFunction A;      // k x m
  expr::VectorExprFunction b;      // k x 1
  expr::VectorExprFunction k_nom;  // m x 1
  certify::Box domain;
  std::vector<int> grid;
  std::vector<std::string> state;

  int n() const { return f.rows(); }
  int m() const { return g.cols(); }
  int k() const { return A.rows(); }
  void validate() const;
};

enum class RowKind { InputConstraint, Barrier };

/// Stacked viable-control system K(x) = {u : G u <= d} with provenance.
struct ConstraintSystem {
  Eigen::MatrixXd G;  // (k+1) x m, barrier row last
  Eigen::VectorXd d;
  std::vector<RowKind> row_kind;
  double h = 0.0;
  double lfh = 0.0;
  double mu_h = 0.0;
  Eigen::RowVectorXd lgh;
};

ConstraintSystem viable_set_row(const ControlProblem& prob, std::span<const double> x);

/// Farkas emptiness certificate: lambda >= 0 supported on `rows`,
/// lambda' G = 0 and lambda' d < 0.
struct FarkasCertificate {
  std::vector<int> rows;
  Eigen::VectorXd lambda;
  double lambda_dot_d = 0.0;
};

/// Exact solution of min ||u - target||^2 s.t. G u <= d by enumeration of
/// active sets (subsets of at most m rows). Ties are broken toward the
/// lexicographically smallest active set.
struct QpSolve {
  bool feasible = false;
  Eigen::VectorXd u;
  double objective = 0.0;
  std::vector<int> active_set;  // rows tight at the optimum (within primal tol)
  double kkt_residual = 0.0;
  bool degenerate_rows = false;  // a rank-deficient active set was resolved by pseudoinverse
  std::optional<FarkasCertificate> certificate;  // set when infeasible
};

QpSolve least_distance(const Eigen::MatrixXd& G, const Eigen::VectorXd& d,
                       const Eigen::VectorXd& target, double primal_tol = 1e-9);

/// Exact value of max c'u s.t. A u <= b via dual basis enumeration.
struct LinearMaxResult {
  bool feasible = false;
  bool unbounded = false;
  double value = 0.0;
};

LinearMaxResult linear_max(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& c);

struct SafeControlResult {
  bool feasible = false;
  Eigen::VectorXd u;
  std::vector<int> active_set;
  double objective = 0.0;
  bool strict_interior_nonempty = false;
  // barrier row values at x
  double h = 0.0;
  double lfh = 0.0;
  double mu_h = 0.0;
  Eigen::RowVectorXd lgh;
  double kkt_residual = 0.0;
  bool degenerate_rows = false;
  std::optional<FarkasCertificate> infeasibility;

  std::string to_json() const;
};

/// QP safety filter: the element of K(x) closest to k_nom(x).
SafeControlResult qp_filter(const ControlProblem& prob, std::span<const double> x);

/// Chebyshev-margin test for the strict interior K_I(x); true when a point
/// satisfies every row with margin greater than `slack`.
bool strict_interior_nonempty(const ControlProblem& prob, std::span<const double> x,
                              double slack = 1e-9);

struct ContinuityRecord {
  std::vector<double> x;
  bool feasible = false;
  Eigen::VectorXd u;
  std::vector<int> active_set;
  double jump_quotient = 0.0;  // vs previous feasible record
  bool strict_interior = false;
};

struct ContinuityScan {
  std::vector<ContinuityRecord> records;
  double max_jump_quotient = 0.0;
  std::size_t interior_failures = 0;
  std::size_t infeasible_points = 0;
  std::string to_csv() const;  // x..., u..., active_set, jump_quotient
};

ContinuityScan continuity_scan(const ControlProblem& prob,
                               const std::vector<std::vector<double>>& path);

struct ControlCertificationReport {
  certify::CertificationReport base;
  std::size_t unbounded_points = 0;       // sup over U(x) = +inf (condition trivial)
  std::size_t empty_input_points = 0;     // U(x) sampled empty
  std::size_t strict_interior_failures = 0;
  std::optional<std::vector<double>> first_interior_failure;
  std::string to_json() const;
};

/// Pointwise sup_{u in U(x)} [L_f h + L_g h u] >= -mu(h) over the grid,
/// combined with the mu classification and the strict-interior report.
ControlCertificationReport check_mcbf(const ControlProblem& prob, double tol = 1e-9);

}  // namespace invkit::control
