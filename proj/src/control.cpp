#include "invariantkit/control.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "invariantkit/utils.hpp"
#include "json.hpp"

namespace invkit::control {

namespace {

constexpr double kDualTol = 1e-10;
constexpr double kTieTol = 1e-12;

std::vector<int> mask_rows(std::uint32_t mask) {
  std::vector<int> rows;
  for (int i = 0; mask != 0; ++i, mask >>= 1)
    if (mask & 1u) rows.push_back(i);
  return rows;
}

// Farkas certificate search over subsets of at most m+1 rows: an empty
// polytope has a nonnegative combination of at most m+1 rows summing to
// 0'u <= negative (Helly + minimal support, so a 1-dim null space suffices).
std::optional<FarkasCertificate> find_certificate(const Eigen::MatrixXd& G,
                                                  const Eigen::VectorXd& d) {
  const int rows = static_cast<int>(G.rows());
  const int m = static_cast<int>(G.cols());
  const std::uint32_t top = 1u << rows;
  const double scale = 1.0 + d.cwiseAbs().maxCoeff();
  for (std::uint32_t mask = 1; mask < top; ++mask) {
    const int count = std::popcount(mask);
    if (count > m + 1) continue;
    const auto idx = mask_rows(mask);
    Eigen::MatrixXd GsT(m, count);  // columns are the selected rows
    Eigen::VectorXd ds(count);
    for (int j = 0; j < count; ++j) {
      GsT.col(j) = G.row(idx[static_cast<std::size_t>(j)]).transpose();
      ds(j) = d(idx[static_cast<std::size_t>(j)]);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(GsT, Eigen::ComputeFullV);
    const int rank = static_cast<int>(svd.rank());
    if (count - rank != 1) continue;
    Eigen::VectorXd nu = svd.matrixV().col(count - 1);
    if ((GsT * nu).cwiseAbs().maxCoeff() > 1e-9) continue;
    if (nu.minCoeff() < -1e-12 && nu.maxCoeff() > 1e-12) continue;  // mixed signs
    if (nu.maxCoeff() <= 1e-12) nu = -nu;
    const double value = nu.dot(ds);
    if (value < -1e-10 * scale) {
      FarkasCertificate cert;
      cert.rows = idx;
      cert.lambda = nu / nu.maxCoeff();
      cert.lambda_dot_d = cert.lambda.dot(ds);
      return cert;
    }
  }
  return std::nullopt;
}

}  // namespace

QpSolve least_distance(const Eigen::MatrixXd& G, const Eigen::VectorXd& d,
                       const Eigen::VectorXd& target, double primal_tol) {
  const int rows = static_cast<int>(G.rows());
  const int m = static_cast<int>(G.cols());
  if (rows > 20) throw Error("least_distance: too many rows for exact enumeration");

  QpSolve best;
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<int> best_subset;
  bool best_degenerate = false;
  Eigen::VectorXd best_u;
  Eigen::VectorXd best_lambda;
  std::vector<int> best_rows_used;

  const std::uint32_t top = 1u << rows;
  for (std::uint32_t mask = 0; mask < top; ++mask) {
    const int count = std::popcount(mask);
    if (count > m) continue;

    Eigen::VectorXd u;
    Eigen::VectorXd lambda;
    bool degenerate = false;
    std::vector<int> idx;
    if (count == 0) {
      u = target;
      lambda.resize(0);
    } else {
      idx = mask_rows(mask);
      Eigen::MatrixXd Gs(count, m);
      Eigen::VectorXd ds(count);
      for (int j = 0; j < count; ++j) {
        Gs.row(j) = G.row(idx[static_cast<std::size_t>(j)]);
        ds(j) = d(idx[static_cast<std::size_t>(j)]);
      }
      const Eigen::MatrixXd M = Gs * Gs.transpose();
      const Eigen::VectorXd rhs = Gs * target - ds;
      Eigen::LLT<Eigen::MatrixXd> llt(M);
      if (llt.info() == Eigen::Success) {
        lambda = llt.solve(rhs);
      } else {
        // rank-deficient active set: pseudo-minimum-norm multipliers
        lambda = M.completeOrthogonalDecomposition().solve(rhs);
        degenerate = true;
      }
      u = target - Gs.transpose() * lambda;
      if ((Gs * u - ds).cwiseAbs().maxCoeff() > primal_tol) continue;  // face not attainable
      if (lambda.minCoeff() < -kDualTol) continue;
    }
    if (rows > 0 && (G * u - d).maxCoeff() > primal_tol) continue;

    const double obj = (u - target).squaredNorm();
    const auto subset = count == 0 ? std::vector<int>{} : idx;
    const bool better = obj < best_obj - kTieTol ||
                        (std::abs(obj - best_obj) <= kTieTol && subset < best_subset);
    if (best_obj == std::numeric_limits<double>::infinity() || better) {
      best_obj = obj;
      best_subset = subset;
      best_u = u;
      best_lambda = lambda;
      best_rows_used = subset;
      best_degenerate = degenerate;
    }
  }

  if (best_obj == std::numeric_limits<double>::infinity()) {
    best.feasible = false;
    best.certificate = find_certificate(G, d);
    return best;
  }

  best.feasible = true;
  best.u = best_u;
  best.objective = best_obj;
  best.degenerate_rows = best_degenerate;
  for (int i = 0; i < rows; ++i)
    if (std::abs(G.row(i).dot(best_u) - d(i)) <= primal_tol) best.active_set.push_back(i);

  Eigen::VectorXd grad = best_u - target;
  for (std::size_t j = 0; j < best_rows_used.size(); ++j)
    grad += G.row(best_rows_used[j]).transpose() * best_lambda(static_cast<Eigen::Index>(j));
  best.kkt_residual = best_rows_used.empty() ? (best_u - target).cwiseAbs().maxCoeff()
                                             : grad.cwiseAbs().maxCoeff();
  return best;
}

LinearMaxResult linear_max(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& c) {
  LinearMaxResult res;
  const int rows = static_cast<int>(A.rows());
  const int m = static_cast<int>(A.cols());

  const QpSolve feas = least_distance(A, b, Eigen::VectorXd::Zero(m));
  if (!feas.feasible) return res;
  res.feasible = true;

  if (c.cwiseAbs().maxCoeff() == 0.0) {
    res.value = 0.0;
    return res;
  }

  // Unboundedness: the projection of c onto the recession cone {A v <= 0}
  // is nonzero iff an ascent direction exists (c'p = ||p||^2 > 0).
  const QpSolve proj = least_distance(A, Eigen::VectorXd::Zero(rows), c);
  if (proj.feasible && proj.u.norm() > 1e-8 * (1.0 + c.norm())) {
    res.unbounded = true;
    res.value = std::numeric_limits<double>::infinity();
    return res;
  }

  // Dual vertices: min b's over { lambda >= 0 : A' lambda = c } with basic
  // support of at most m rows; the optimal value equals the primal sup.
  double best = std::numeric_limits<double>::infinity();
  const std::uint32_t top = 1u << rows;
  const double ctol = 1e-9 * (1.0 + c.cwiseAbs().maxCoeff());
  for (std::uint32_t mask = 1; mask < top; ++mask) {
    const int count = std::popcount(mask);
    if (count > m) continue;
    const auto idx = mask_rows(mask);
    Eigen::MatrixXd AsT(m, count);
    Eigen::VectorXd bs(count);
    for (int j = 0; j < count; ++j) {
      AsT.col(j) = A.row(idx[static_cast<std::size_t>(j)]).transpose();
      bs(j) = b(idx[static_cast<std::size_t>(j)]);
    }
    const Eigen::VectorXd lambda = AsT.completeOrthogonalDecomposition().solve(c);
    if ((AsT * lambda - c).cwiseAbs().maxCoeff() > ctol) continue;
    if (lambda.minCoeff() < -kDualTol) continue;
    best = std::min(best, bs.dot(lambda));
  }
  if (best == std::numeric_limits<double>::infinity())
    throw Error("linear_max: no dual basic solution found for a bounded feasible program");
  res.value = best;
  return res;
}

void ControlProblem::validate() const {
  domain.validate();
  const int nn = static_cast<int>(state.size());
  if (nn == 0) throw Error("control problem: empty state");
  if (f.rows() != nn || f.cols() != 1) throw Error("control problem: f must be n x 1");
  if (g.rows() != nn) throw Error("control problem: g must have n rows");
  const int mm = g.cols();
  if (mm < 1 || mm > 8) throw Error("control problem: m must be in [1, 8]");
  if (A.cols() != mm) throw Error("control problem: A must have m columns");
  if (A.rows() > 16) throw Error("control problem: at most 16 input constraints");
  if (b.rows() != A.rows() || b.cols() != 1) throw Error("control problem: b must be k x 1");
  if (k_nom.rows() != mm || k_nom.cols() != 1) throw Error("control problem: k_nom must be m x 1");
  if (domain.dim() != static_cast<std::size_t>(nn) || grid.size() != static_cast<std::size_t>(nn))
    throw Error("control problem: box/grid dimension mismatch");
  for (const auto* vef : {&f, &g, &A, &b, &k_nom}) {
    if (vef->variables() != std::vector<std::string>(state.begin(), state.end()))
      throw Error("control problem: all expressions must take exactly the state variables");
  }
  if (h.variables() != std::vector<std::string>(state.begin(), state.end()))
    throw Error("control problem: h must take exactly the state variables");
}

ConstraintSystem viable_set_row(const ControlProblem& prob, std::span<const double> x) {
  const int nn = prob.n();
  const int mm = prob.m();
  const int kk = prob.k();

  ConstraintSystem sys;
  const auto hg = prob.h.grad(x);
  const auto fv = prob.f.eval(x);
  const auto gv = prob.g.eval(x);  // n x m row-major
  sys.h = hg.value;
  sys.lfh = 0.0;
  for (int a = 0; a < nn; ++a) sys.lfh += hg.gradient[static_cast<std::size_t>(a)] * fv[static_cast<std::size_t>(a)];
  sys.lgh.resize(mm);
  for (int j = 0; j < mm; ++j) {
    double v = 0.0;
    for (int a = 0; a < nn; ++a)
      v += hg.gradient[static_cast<std::size_t>(a)] * gv[static_cast<std::size_t>(a * mm + j)];
    sys.lgh(j) = v;
  }
  sys.mu_h = prob.mu.mu(sys.h);

  const auto Av = prob.A.eval(x);
  const auto bv = prob.b.eval(x);
  sys.G.resize(kk + 1, mm);
  sys.d.resize(kk + 1);
  for (int i = 0; i < kk; ++i) {
    for (int j = 0; j < mm; ++j) sys.G(i, j) = Av[static_cast<std::size_t>(i * mm + j)];
    sys.d(i) = bv[static_cast<std::size_t>(i)];
    sys.row_kind.push_back(RowKind::InputConstraint);
  }
  sys.G.row(kk) = -sys.lgh;
  sys.d(kk) = sys.mu_h + sys.lfh;
  sys.row_kind.push_back(RowKind::Barrier);
  return sys;
}

SafeControlResult qp_filter(const ControlProblem& prob, std::span<const double> x) {
  const ConstraintSystem sys = viable_set_row(prob, x);
  const auto kv = prob.k_nom.eval(x);
  Eigen::VectorXd target(prob.m());
  for (int j = 0; j < prob.m(); ++j) target(j) = kv[static_cast<std::size_t>(j)];

  SafeControlResult res;
  res.h = sys.h;
  res.lfh = sys.lfh;
  res.mu_h = sys.mu_h;
  res.lgh = sys.lgh;

  const QpSolve sol = least_distance(sys.G, sys.d, target);
  res.feasible = sol.feasible;
  if (sol.feasible) {
    res.u = sol.u;
    res.objective = sol.objective;
    res.active_set = sol.active_set;
    res.kkt_residual = sol.kkt_residual;
    res.degenerate_rows = sol.degenerate_rows;
#ifndef NDEBUG
    if (res.kkt_residual > 1e-8) throw Error("qp_filter: KKT stationarity check failed");
#endif
  } else {
    res.infeasibility = sol.certificate;
    if (!res.infeasibility)
      throw Error("qp_filter: infeasible but no emptiness certificate was found");
  }
  res.strict_interior_nonempty = strict_interior_nonempty(prob, x);
  return res;
}

bool strict_interior_nonempty(const ControlProblem& prob, std::span<const double> x,
                              double slack) {
  const ConstraintSystem sys = viable_set_row(prob, x);
  const int rows = static_cast<int>(sys.G.rows());
  Eigen::VectorXd rownorm(rows);
  for (int i = 0; i < rows; ++i) {
    const double nrm = sys.G.row(i).norm();
    rownorm(i) = nrm > 0.0 ? nrm : 1.0;  // zero rows: absolute margin on d
  }
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(prob.m());
  auto feasible_at = [&](double s) {
    return least_distance(sys.G, sys.d - s * rownorm, zero, 1e-12).feasible;
  };
  if (!feasible_at(0.0)) return false;
  double lo = 0.0;
  double hi = std::max(1.0, 4.0 * slack);
  int doublings = 0;
  while (feasible_at(hi)) {
    lo = hi;
    hi *= 4.0;
    if (++doublings > 16) return true;  // unbounded interior margin
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (feasible_at(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo > slack;
}

ContinuityScan continuity_scan(const ControlProblem& prob,
                               const std::vector<std::vector<double>>& path) {
  ContinuityScan scan;
  const ContinuityRecord* prev = nullptr;
  for (const auto& x : path) {
    ContinuityRecord rec;
    rec.x = x;
    const SafeControlResult r = qp_filter(prob, x);
    rec.feasible = r.feasible;
    rec.strict_interior = r.strict_interior_nonempty;
    if (!r.feasible) {
      ++scan.infeasible_points;
    } else {
      rec.u = r.u;
      rec.active_set = r.active_set;
      if (prev != nullptr && prev->feasible) {
        double dx2 = 0.0;
        for (std::size_t a = 0; a < x.size(); ++a) {
          const double dd = x[a] - prev->x[a];
          dx2 += dd * dd;
        }
        const double dx = std::sqrt(dx2);
        if (dx > 0.0) {
          rec.jump_quotient = (rec.u - prev->u).norm() / dx;
          scan.max_jump_quotient = std::max(scan.max_jump_quotient, rec.jump_quotient);
        }
      }
    }
    if (!rec.strict_interior) ++scan.interior_failures;
    scan.records.push_back(std::move(rec));
    prev = &scan.records.back();
  }
  return scan;
}

std::string ContinuityScan::to_csv() const {
  std::ostringstream os;
  const std::size_t n = records.empty() ? 0 : records.front().x.size();
  const Eigen::Index m = records.empty() || records.front().u.size() == 0
                             ? (records.size() > 1 ? records[1].u.size() : 0)
                             : records.front().u.size();
  for (std::size_t a = 0; a < n; ++a) os << "x" << (a + 1) << ",";
  for (Eigen::Index j = 0; j < m; ++j) os << "u" << (j + 1) << ",";
  os << "feasible,strict_interior,active_set,jump_quotient\n";
  for (const auto& rec : records) {
    for (double xv : rec.x) os << format_double(xv) << ",";
    for (Eigen::Index j = 0; j < m; ++j)
      os << (rec.feasible ? format_double(rec.u(j)) : std::string()) << ",";
    os << (rec.feasible ? 1 : 0) << "," << (rec.strict_interior ? 1 : 0) << ",";
    for (std::size_t a = 0; a < rec.active_set.size(); ++a)
      os << (a ? ";" : "") << rec.active_set[a];
    os << "," << format_double(rec.jump_quotient) << "\n";
  }
  return os.str();
}

ControlCertificationReport check_mcbf(const ControlProblem& prob, double tol) {
  prob.validate();
  std::vector<int> counts = prob.grid;
  std::size_t total = 1;
  for (int c : counts) total *= static_cast<std::size_t>(c);

  ControlCertificationReport rep;
  rep.base.tol = tol;
  rep.base.samples.resize(total);
  std::vector<std::uint8_t> unbounded(total, 0);
  std::vector<std::uint8_t> empty_input(total, 0);
  std::vector<std::uint8_t> interior_ok(total, 0);

  parallel_for(total, default_thread_count(), [&](std::size_t i) {
    std::size_t rem = i;
    std::vector<int> idx(counts.size());
    for (std::size_t a = counts.size(); a-- > 0;) {
      idx[a] = static_cast<int>(rem % static_cast<std::size_t>(counts[a]));
      rem /= static_cast<std::size_t>(counts[a]);
    }
    std::vector<double> x(counts.size());
    for (std::size_t a = 0; a < counts.size(); ++a)
      x[a] = grid_coord(prob.domain.lo[a], prob.domain.hi[a], counts[a], idx[a]);

    const ConstraintSystem sys = viable_set_row(prob, x);
    const int kk = prob.k();
    const Eigen::MatrixXd Ax = sys.G.topRows(kk);
    const Eigen::VectorXd bx = sys.d.head(kk);
    const Eigen::VectorXd c = sys.lgh.transpose();

    certify::Sample& s = rep.base.samples[i];
    s.x = x;
    s.h = sys.h;
    s.lfh = sys.lfh;
    const double base_margin = sys.lfh + sys.mu_h;
    if (c.cwiseAbs().maxCoeff() == 0.0) {
      // zero input gain: the condition reduces to the uncontrolled inequality,
      // provided U(x) is nonempty at all
      const QpSolve feas = least_distance(Ax, bx, Eigen::VectorXd::Zero(prob.m()));
      if (!feas.feasible) {
        empty_input[i] = 1;
        s.margin = -std::numeric_limits<double>::infinity();
      } else {
        s.margin = base_margin;
      }
    } else {
      const LinearMaxResult lp = linear_max(Ax, bx, c);
      if (!lp.feasible) {
        empty_input[i] = 1;
        s.margin = -std::numeric_limits<double>::infinity();
      } else if (lp.unbounded) {
        unbounded[i] = 1;
        s.margin = std::numeric_limits<double>::infinity();
      } else {
        s.margin = base_margin + lp.value;
      }
    }
    interior_ok[i] = strict_interior_nonempty(prob, x) ? 1 : 0;
  });

  rep.base.min_margin = std::numeric_limits<double>::infinity();
  rep.base.s_empty_warning = true;
  for (std::size_t i = 0; i < total; ++i) {
    if (rep.base.samples[i].margin < rep.base.min_margin) {
      rep.base.min_margin = rep.base.samples[i].margin;
      rep.base.argmin_index = i;
    }
    if (rep.base.samples[i].h >= 0.0) rep.base.s_empty_warning = false;
    rep.unbounded_points += unbounded[i];
    rep.empty_input_points += empty_input[i];
    if (!interior_ok[i]) {
      ++rep.strict_interior_failures;
      if (!rep.first_interior_failure) rep.first_interior_failure = rep.base.samples[i].x;
    }
  }

  rep.base.mu_verdict = minfunc::classify(prob.mu);
  if (rep.base.min_margin < -tol) {
    rep.base.verdict = certify::Verdict::Violated;
  } else {
    switch (rep.base.mu_verdict->status) {
      case minfunc::Status::Minimal:
        rep.base.verdict = certify::Verdict::Certified;
        break;
      case minfunc::Status::NotMinimal:
        rep.base.verdict = certify::Verdict::MuNotMinimal;
        break;
      case minfunc::Status::Inconclusive:
        rep.base.verdict = certify::Verdict::CertifiedModuloClassification;
        break;
    }
  }
  return rep;
}

std::string SafeControlResult::to_json() const {
  nlohmann::json j;
  j["feasible"] = feasible;
  if (feasible) {
    std::vector<double> uv(u.data(), u.data() + u.size());
    j["u"] = uv;
    j["active_set"] = active_set;
    j["objective"] = objective;
    j["kkt_residual"] = kkt_residual;
    j["degenerate_rows"] = degenerate_rows;
  } else if (infeasibility) {
    std::vector<double> lv(infeasibility->lambda.data(),
                           infeasibility->lambda.data() + infeasibility->lambda.size());
    j["infeasibility"] = {{"rows", infeasibility->rows},
                          {"lambda", lv},
                          {"lambda_dot_d", infeasibility->lambda_dot_d}};
  }
  j["strict_interior_nonempty"] = strict_interior_nonempty;
  std::vector<double> lghv(lgh.data(), lgh.data() + lgh.size());
  j["barrier_row"] = {{"h", h}, {"lfh", lfh}, {"mu_h", mu_h}, {"lgh", lghv}};
  return j.dump();
}

std::string ControlCertificationReport::to_json() const {
  nlohmann::json j = nlohmann::json::parse(base.to_json());
  j["unbounded_points"] = unbounded_points;
  j["empty_input_points"] = empty_input_points;
  j["strict_interior_failures"] = strict_interior_failures;
  if (first_interior_failure) j["first_interior_failure"] = *first_interior_failure;
  return j.dump();
}

}  // namespace invkit::control
