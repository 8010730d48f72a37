#include "xlayer/qp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <optional>
#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "xlayer/error.hpp"

namespace xlayer {

using Eigen::VectorXd;

double QpProblem::objective(const VectorXd& x) const {
  return 0.5 * x.dot(quadratic * x) + linear.dot(x);
}

void QpProblem::validate() const {
  const int n = num_variables();
  auto fail = [](const std::string& what) { throw InvalidArgument("QpProblem: " + what); };
  if (quadratic.rows() != n || quadratic.cols() != n) fail("quadratic form must be n x n");
  if (lower.size() != n) fail("lower bound vector must have n entries");
  if (eq_matrix.rows() != eq_rhs.size() || (eq_matrix.rows() > 0 && eq_matrix.cols() != n)) {
    fail("equality matrix dimensions");
  }
  if (ineq_matrix.rows() != ineq_rhs.size() || (ineq_matrix.rows() > 0 && ineq_matrix.cols() != n)) {
    fail("inequality matrix dimensions");
  }
  const SparseMatrix asym = quadratic - SparseMatrix(quadratic.transpose());
  const double scale = 1.0 + (quadratic.nonZeros() > 0 ? quadratic.coeffs().cwiseAbs().maxCoeff() : 0.0);
  if (asym.nonZeros() > 0 && asym.coeffs().cwiseAbs().maxCoeff() > 1e-12 * scale) fail("quadratic form not symmetric");
  for (int i = 0; i < n; ++i) {
    if (std::isnan(lower[i]) || lower[i] == std::numeric_limits<double>::infinity()) fail("invalid lower bound");
  }
}

namespace {

double inf_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Internal form: G x + s = h, s >= 0 with bound rows appended, after Ruiz
// equilibration. With x = D xs the scaled problem is
//   min 0.5 xs' (k D P D) xs + (k D c)' xs,  Ea A D xs = Ea b,  Eg G D xs <= Eg h.
struct InternalForm {
  SparseMatrix p;
  VectorXd c;
  SparseMatrix g;
  VectorXd h;
  SparseMatrix a;
  VectorXd b;
  VectorXd var_scale;   // D
  VectorXd ineq_scale;  // Eg
  VectorXd eq_scale;    // Ea
  double cost_scale = 1.0;  // k
  int num_general = 0;
  std::vector<int> bound_var;
};

VectorXd column_inf_norms(const SparseMatrix& m) {
  VectorXd out = VectorXd::Zero(m.cols());
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) out[it.col()] = std::max(out[it.col()], std::abs(it.value()));
  }
  return out;
}

VectorXd row_inf_norms(const SparseMatrix& m) {
  VectorXd out = VectorXd::Zero(m.rows());
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) out[it.row()] = std::max(out[it.row()], std::abs(it.value()));
  }
  return out;
}

VectorXd inverse_sqrt_scale(const VectorXd& norms) {
  VectorXd s(norms.size());
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    s[i] = norms[i] > 0.0 ? std::clamp(1.0 / std::sqrt(norms[i]), 1e-4, 1e4) : 1.0;
  }
  return s;
}

InternalForm make_internal(const QpProblem& qp) {
  const int n = qp.num_variables();
  InternalForm f;
  f.num_general = qp.num_inequalities();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(qp.ineq_matrix.nonZeros() + n));
  std::vector<double> rhs;
  rhs.reserve(static_cast<std::size_t>(f.num_general + n));
  for (int k = 0; k < qp.ineq_matrix.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(qp.ineq_matrix, k); it; ++it) {
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  for (int i = 0; i < f.num_general; ++i) rhs.push_back(qp.ineq_rhs[i]);
  int row = f.num_general;
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(qp.lower[j])) {
      trip.emplace_back(row++, j, -1.0);
      rhs.push_back(-qp.lower[j]);
      f.bound_var.push_back(j);
    }
  }
  const int m = row;
  f.g.resize(m, n);
  f.g.setFromTriplets(trip.begin(), trip.end());
  f.h = Eigen::Map<VectorXd>(rhs.data(), m);
  f.p = qp.quadratic;
  f.c = qp.linear;
  const int me = qp.num_equalities();
  if (me > 0) {
    f.a = qp.eq_matrix;
    f.b = qp.eq_rhs;
  } else {
    f.a.resize(0, n);
    f.b.resize(0);
  }

  f.var_scale = VectorXd::Ones(n);
  f.ineq_scale = VectorXd::Ones(m);
  f.eq_scale = VectorXd::Ones(me);
  for (int pass = 0; pass < 15; ++pass) {
    VectorXd col = column_inf_norms(f.p);
    if (me > 0) col = col.cwiseMax(column_inf_norms(f.a));
    if (m > 0) col = col.cwiseMax(column_inf_norms(f.g));
    const VectorXd sv = inverse_sqrt_scale(col);
    const VectorXd sg = m > 0 ? inverse_sqrt_scale(row_inf_norms(f.g)) : VectorXd();
    const VectorXd sa = me > 0 ? inverse_sqrt_scale(row_inf_norms(f.a)) : VectorXd();
    f.p = sv.asDiagonal() * f.p * sv.asDiagonal();
    f.c = sv.cwiseProduct(f.c);
    if (m > 0) {
      f.g = sg.asDiagonal() * f.g * sv.asDiagonal();
      f.h = sg.cwiseProduct(f.h);
      f.ineq_scale = f.ineq_scale.cwiseProduct(sg);
    }
    if (me > 0) {
      f.a = sa.asDiagonal() * f.a * sv.asDiagonal();
      f.b = sa.cwiseProduct(f.b);
      f.eq_scale = f.eq_scale.cwiseProduct(sa);
    }
    f.var_scale = f.var_scale.cwiseProduct(sv);
    double change = (sv.array() - 1.0).abs().maxCoeff();
    if (m > 0) change = std::max(change, (sg.array() - 1.0).abs().maxCoeff());
    if (me > 0) change = std::max(change, (sa.array() - 1.0).abs().maxCoeff());
    if (change < 1e-3) break;
  }
  {
    const VectorXd pc = column_inf_norms(f.p);
    const double mean_p = n > 0 ? pc.sum() / n : 0.0;
    const double sigma = std::max(mean_p, inf_norm(f.c));
    f.cost_scale = sigma > 0.0 ? std::clamp(1.0 / sigma, 1e-4, 1e4) : 1.0;
    f.p *= f.cost_scale;
    f.c *= f.cost_scale;
  }
  return f;
}

// Solves [H + dI, A'; A, -dI] [x; y] = [r1; r2] with iterative refinement
// against the unregularized matrix.
class KktSolver {
 public:
  KktSolver(const SparseMatrix& p, const SparseMatrix& g, const SparseMatrix& a, double reg,
            int refinement)
      : p_(p), g_(g), gt_(g.transpose()), a_(a), reg_(reg), refinement_(refinement) {}

  bool factor(const VectorXd& weights) {
    const int n = static_cast<int>(p_.rows());
    const int me = static_cast<int>(a_.rows());
    h_ = p_ + gt_ * weights.asDiagonal() * g_;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(h_.nonZeros() + a_.nonZeros() + n + me);
    for (int k = 0; k < h_.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(h_, k); it; ++it) {
        if (it.row() >= it.col()) trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      }
    }
    for (int k = 0; k < a_.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(a_, k); it; ++it) {
        trip.emplace_back(n + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      }
    }
    const std::size_t base = trip.size();
    // Escalate the regularization when a pivot breaks down; refinement in
    // solve() works against the unregularized matrix.
    for (double reg = reg_; reg <= 1e-4; reg *= 100.0) {
      trip.resize(base);
      for (int i = 0; i < n; ++i) trip.emplace_back(i, i, reg);
      for (int i = 0; i < me; ++i) trip.emplace_back(n + i, n + i, -reg);
      SparseMatrix kkt(n + me, n + me);
      kkt.setFromTriplets(trip.begin(), trip.end());
      if (!analyzed_) {
        ldlt_.analyzePattern(kkt);
        analyzed_ = true;
      }
      ldlt_.factorize(kkt);
      if (ldlt_.info() == Eigen::Success) return true;
    }
    return false;
  }

  void solve(const VectorXd& r1, const VectorXd& r2, VectorXd& x, VectorXd& y) const {
    const int n = static_cast<int>(p_.rows());
    const int me = static_cast<int>(a_.rows());
    VectorXd rhs(n + me);
    rhs << r1, r2;
    VectorXd sol = ldlt_.solve(rhs);
    for (int step = 0; step < refinement_; ++step) {
      VectorXd res = rhs - apply(sol);
      if (inf_norm(res) <= 1e-15 * (1.0 + inf_norm(rhs))) break;
      sol += ldlt_.solve(res);
    }
    x = sol.head(n);
    y = sol.tail(me);
  }

 private:
  VectorXd apply(const VectorXd& v) const {
    const int n = static_cast<int>(p_.rows());
    const int me = static_cast<int>(a_.rows());
    VectorXd out(n + me);
    out.head(n) = h_ * v.head(n);
    if (me > 0) {
      out.head(n) += a_.transpose() * v.tail(me);
      out.tail(me) = a_ * v.head(n);
    }
    return out;
  }

  const SparseMatrix& p_;
  const SparseMatrix& g_;
  SparseMatrix gt_;
  const SparseMatrix& a_;
  double reg_;
  int refinement_;
  SparseMatrix h_;
  bool analyzed_ = false;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

double max_step(const VectorXd& v, const VectorXd& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

QpSolution finalize(const QpProblem& qp, const InternalForm& f, const VectorXd& xs, const VectorXd& ys,
                    const VectorXd& zs, int iterations, QpStatus status, double pres, double dres, double gap) {
  QpSolution sol;
  sol.x = f.var_scale.cwiseProduct(xs);
  sol.eq_dual = f.eq_scale.cwiseProduct(ys) / f.cost_scale;
  const VectorXd z = f.ineq_scale.cwiseProduct(zs) / f.cost_scale;
  sol.ineq_dual = z.head(f.num_general);
  sol.lower_dual = VectorXd::Zero(qp.num_variables());
  for (std::size_t k = 0; k < f.bound_var.size(); ++k) sol.lower_dual[f.bound_var[k]] = z[f.num_general + static_cast<Eigen::Index>(k)];
  sol.objective = qp.objective(sol.x);
  sol.iterations = iterations;
  sol.status = status;
  sol.primal_residual = pres;
  sol.dual_residual = dres;
  sol.gap = gap;
  return sol;
}

struct Iterate {
  VectorXd x, y, z;
  double pres = 0.0, dres = 0.0, gap = 0.0;
  double merit() const { return std::max({pres, dres, gap}); }
};

// Guesses the active set from the interior iterate (z > s), solves the
// equality-constrained KKT system on it, and keeps the result only if it is
// primal feasible, dual feasible and more accurate than the iterate.
std::optional<Iterate> polish(const InternalForm& f, const VectorXd& x, const VectorXd& s, const VectorXd& z,
                              double merit) {
  const int n = static_cast<int>(f.c.size());
  const int me = static_cast<int>(f.b.size());
  const int m = static_cast<int>(f.h.size());
  std::vector<int> active;
  for (int i = 0; i < m; ++i) {
    if (z[i] > s[i]) active.push_back(i);
  }
  const int k = static_cast<int>(active.size());
  if (k + me > n) return std::nullopt;
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < f.p.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(f.p, c); it; ++it) {
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  for (int c = 0; c < f.a.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(f.a, c); it; ++it) {
      trip.emplace_back(n + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      trip.emplace_back(static_cast<int>(it.col()), n + static_cast<int>(it.row()), it.value());
    }
  }
  std::vector<int> slot(static_cast<std::size_t>(m), -1);
  for (int j = 0; j < k; ++j) slot[active[j]] = j;
  for (int c = 0; c < f.g.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(f.g, c); it; ++it) {
      const int j = slot[it.row()];
      if (j < 0) continue;
      trip.emplace_back(n + me + j, static_cast<int>(it.col()), it.value());
      trip.emplace_back(static_cast<int>(it.col()), n + me + j, it.value());
    }
  }
  SparseMatrix kkt(n + me + k, n + me + k);
  kkt.setFromTriplets(trip.begin(), trip.end());
  VectorXd rhs(n + me + k);
  rhs.head(n) = -f.c;
  rhs.segment(n, me) = f.b;
  for (int j = 0; j < k; ++j) rhs[n + me + j] = f.h[active[j]];
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(kkt);
  if (lu.info() != Eigen::Success) return std::nullopt;
  VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !sol.allFinite()) return std::nullopt;
  for (int step = 0; step < 2; ++step) sol += lu.solve(VectorXd(rhs - kkt * sol));
  if (!sol.allFinite()) return std::nullopt;

  Iterate out;
  out.x = sol.head(n);
  out.y = sol.segment(n, me);
  out.z = VectorXd::Zero(m);
  for (int j = 0; j < k; ++j) out.z[active[j]] = sol[n + me + j];
  if (k > 0 && out.z.minCoeff() < 0.0) return std::nullopt;
  const VectorXd px = f.p * out.x;
  VectorXd rd = px + f.c + f.g.transpose() * out.z;
  if (me > 0) rd += f.a.transpose() * out.y;
  const double viol = m > 0 ? (f.g * out.x - f.h).maxCoeff() : 0.0;
  const double eq = me > 0 ? inf_norm(f.a * out.x - f.b) : 0.0;
  out.pres = std::max(eq / (1.0 + inf_norm(f.b)), std::max(viol, 0.0) / (1.0 + inf_norm(f.h)));
  out.dres = inf_norm(rd) / (1.0 + std::max(inf_norm(f.c), inf_norm(px)));
  out.gap = 0.0;
  if (out.merit() >= merit) return std::nullopt;
  return out;
}

}  // namespace

QpSolution solve_qp(const QpProblem& qp, const QpOptions& options) {
  qp.validate();
  const InternalForm f = make_internal(qp);
  const int n = qp.num_variables();
  const int m = static_cast<int>(f.h.size());
  const int me = static_cast<int>(f.b.size());
  const VectorXd& c = f.c;
  const SparseMatrix& p = f.p;

  KktSolver kkt(p, f.g, f.a, options.regularization, options.refinement_steps);

  VectorXd x(n), y(me), z(m), s(m);
  if (m == 0) {
    if (!kkt.factor(VectorXd::Zero(0))) throw SolverError(SolverFailure::kNumerical, "solve_qp: KKT factorization failed");
    kkt.solve(-c, f.b, x, y);
    const double dres = inf_norm(p * x + c + f.a.transpose() * y);
    const double pres = me > 0 ? inf_norm(f.a * x - f.b) : 0.0;
    if (pres > 1e-6 * (1.0 + inf_norm(f.b))) {
      throw SolverError(SolverFailure::kInfeasible, "solve_qp: equality constraints inconsistent");
    }
    if (dres > 1e-6 * (1.0 + inf_norm(c))) {
      throw SolverError(SolverFailure::kUnbounded, "solve_qp: objective unbounded on the equality set");
    }
    return finalize(qp, f, x, y, z, 1, QpStatus::kOptimal, pres, dres, 0.0);
  }

  // Initial point from the W = I system.
  if (!kkt.factor(VectorXd::Ones(m))) throw SolverError(SolverFailure::kNumerical, "solve_qp: KKT factorization failed");
  kkt.solve(-c + f.g.transpose() * f.h, f.b, x, y);
  s = f.h - f.g * x;
  {
    VectorXd xd, yd;
    kkt.solve(-c, VectorXd::Zero(me), xd, yd);
    z = f.g * xd;
  }
  {
    const double ms = -s.minCoeff();
    if (ms >= 0.0) s.array() += 1.0 + ms;
    const double mz = -z.minCoeff();
    if (mz >= 0.0) z.array() += 1.0 + mz;
  }

  const double cnorm = inf_norm(c);
  const double bnorm = inf_norm(f.b);
  const double hnorm = inf_norm(f.h);
  double pres = 0.0, dres = 0.0, gap = 0.0;
  double best_merit = std::numeric_limits<double>::infinity();
  VectorXd best_x = x, best_y = y, best_z = z;
  double best_pres = 0, best_dres = 0, best_gap = 0;
  int iter = 0;

  for (; iter < options.max_iterations; ++iter) {
    const VectorXd px = p * x;
    VectorXd rd = px + c + f.g.transpose() * z;
    if (me > 0) rd += f.a.transpose() * y;
    const VectorXd rp = me > 0 ? VectorXd(f.a * x - f.b) : VectorXd::Zero(0);
    const VectorXd rg = f.g * x + s - f.h;
    const double mu = s.dot(z) / m;
    const double pobj = 0.5 * x.dot(px) + c.dot(x);

    pres = std::max(inf_norm(rp) / (1.0 + bnorm), inf_norm(rg) / (1.0 + hnorm));
    dres = inf_norm(rd) / (1.0 + std::max(cnorm, inf_norm(px)));
    gap = s.dot(z) / (1.0 + std::abs(pobj));

    const double merit = std::max({pres, dres, gap});
    if (merit < best_merit) {
      best_merit = merit;
      best_x = x;
      best_y = y;
      best_z = z;
      best_pres = pres;
      best_dres = dres;
      best_gap = gap;
    }
    if (pres <= options.tol && dres <= options.tol && gap <= options.tol) {
      if (auto p = polish(f, x, s, z, merit)) {
        return finalize(qp, f, p->x, p->y, p->z, iter, QpStatus::kOptimal, p->pres, p->dres, p->gap);
      }
      return finalize(qp, f, x, y, z, iter, QpStatus::kOptimal, pres, dres, gap);
    }
    if (!x.allFinite() || !z.allFinite() || !s.allFinite()) break;
    if (inf_norm(x) > 1e13) {
      throw SolverError(SolverFailure::kUnbounded, "solve_qp: iterates diverge (unbounded objective)");
    }
    if (inf_norm(z) > 1e13 && pres > 1e-6) {
      throw SolverError(SolverFailure::kInfeasible, "solve_qp: dual iterates diverge (primal infeasible)");
    }

    const VectorXd w = z.cwiseQuotient(s);
    if (!kkt.factor(w)) break;

    auto direction = [&](const VectorXd& rsz, VectorXd& dx, VectorXd& dy, VectorXd& ds, VectorXd& dz) {
      const VectorXd t = w.cwiseProduct(rg) - rsz.cwiseQuotient(s);
      kkt.solve(-rd - f.g.transpose() * t, -rp, dx, dy);
      const VectorXd gdx = f.g * dx;
      dz = w.cwiseProduct(rg + gdx) - rsz.cwiseQuotient(s);
      ds = -rg - gdx;
    };

    VectorXd dx, dy, ds, dz;
    const VectorXd sz = s.cwiseProduct(z);
    direction(sz, dx, dy, ds, dz);
    const double alpha_aff = std::min(max_step(s, ds), max_step(z, dz));
    const double mu_aff = (s + alpha_aff * ds).dot(z + alpha_aff * dz) / m;
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

    const VectorXd rsz = sz + ds.cwiseProduct(dz) - VectorXd::Constant(m, sigma * mu);
    direction(rsz, dx, dy, ds, dz);
    const double alpha = std::min(1.0, 0.99 * std::min(max_step(s, ds), max_step(z, dz)));

    x += alpha * dx;
    y += alpha * dy;
    s += alpha * ds;
    z += alpha * dz;
    // Keep strictly interior in the face of rounding.
    s = s.cwiseMax(1e-300);
    z = z.cwiseMax(1e-300);
  }

  if (m > 0 && best_merit < 1e-3) {
    const VectorXd best_s = (f.h - f.g * best_x).cwiseMax(0.0);
    if (auto p = polish(f, best_x, best_s, best_z, best_merit)) {
      const QpStatus st = p->merit() <= options.tol ? QpStatus::kOptimal : QpStatus::kInaccurate;
      if (p->merit() <= std::max(1e-6, std::sqrt(options.tol))) {
        return finalize(qp, f, p->x, p->y, p->z, iter, st, p->pres, p->dres, p->gap);
      }
    }
  }
  const double loose = std::max(1e-6, std::sqrt(options.tol));
  if (best_pres <= loose && best_dres <= loose && best_gap <= loose) {
    return finalize(qp, f, best_x, best_y, best_z, iter, QpStatus::kInaccurate, best_pres, best_dres, best_gap);
  }
  std::ostringstream msg;
  msg << "solve_qp: no convergence after " << iter << " iterations (primal " << best_pres << ", dual " << best_dres
      << ", gap " << best_gap << ")";
  if (best_pres > loose) throw SolverError(SolverFailure::kInfeasible, msg.str());
  throw SolverError(SolverFailure::kNotConverged, msg.str());
}

KktResiduals kkt_residuals(const QpProblem& qp, const QpSolution& sol) {
  KktResiduals r;
  const VectorXd& x = sol.x;
  if (qp.num_equalities() > 0) r.equality = inf_norm(qp.eq_matrix * x - qp.eq_rhs);
  double ineq = 0.0, comp = 0.0, sign = 0.0;
  if (qp.num_inequalities() > 0) {
    const VectorXd slack = qp.ineq_rhs - qp.ineq_matrix * x;
    ineq = std::max(ineq, -slack.minCoeff());
    for (int i = 0; i < qp.num_inequalities(); ++i) {
      comp = std::max(comp, std::abs(sol.ineq_dual[i] * slack[i]));
      sign = std::max(sign, -sol.ineq_dual[i]);
    }
  }
  for (int j = 0; j < qp.num_variables(); ++j) {
    if (!std::isfinite(qp.lower[j])) continue;
    const double slack = x[j] - qp.lower[j];
    ineq = std::max(ineq, -slack);
    comp = std::max(comp, std::abs(sol.lower_dual[j] * slack));
    sign = std::max(sign, -sol.lower_dual[j]);
  }
  r.inequality = std::max(0.0, ineq);
  r.complementarity = comp;
  r.dual_sign = std::max(0.0, sign);
  VectorXd grad = qp.quadratic * x + qp.linear - sol.lower_dual;
  if (qp.num_equalities() > 0) grad += qp.eq_matrix.transpose() * sol.eq_dual;
  if (qp.num_inequalities() > 0) grad += qp.ineq_matrix.transpose() * sol.ineq_dual;
  r.stationarity = inf_norm(grad);
  return r;
}

int QpBuilder::add_variable(double lower) {
  lower_.push_back(lower);
  linear_.push_back(0.0);
  return static_cast<int>(lower_.size()) - 1;
}

int QpBuilder::add_variables(int count, double lower) {
  const int first = num_variables();
  for (int i = 0; i < count; ++i) add_variable(lower);
  return first;
}

void QpBuilder::add_quadratic(int i, int j, double value) {
  quadratic_.emplace_back(i, j, value);
  if (i != j) quadratic_.emplace_back(j, i, value);
}

void QpBuilder::add_linear(int i, double value) { linear_.at(static_cast<std::size_t>(i)) += value; }

int QpBuilder::add_equality(std::span<const Term> terms, double rhs) {
  const int row = static_cast<int>(eq_rhs_.size());
  for (const Term& t : terms) eq_.emplace_back(row, t.var, t.coeff);
  eq_rhs_.push_back(rhs);
  return row;
}

int QpBuilder::add_inequality(std::span<const Term> terms, double rhs) {
  const int row = static_cast<int>(ineq_rhs_.size());
  for (const Term& t : terms) ineq_.emplace_back(row, t.var, t.coeff);
  ineq_rhs_.push_back(rhs);
  return row;
}

QpProblem QpBuilder::build() const {
  const int n = num_variables();
  QpProblem qp;
  qp.quadratic.resize(n, n);
  qp.quadratic.setFromTriplets(quadratic_.begin(), quadratic_.end());
  qp.linear = Eigen::Map<const VectorXd>(linear_.data(), n);
  qp.lower = Eigen::Map<const VectorXd>(lower_.data(), n);
  qp.eq_matrix.resize(static_cast<Eigen::Index>(eq_rhs_.size()), n);
  qp.eq_matrix.setFromTriplets(eq_.begin(), eq_.end());
  qp.eq_rhs = Eigen::Map<const VectorXd>(eq_rhs_.data(), static_cast<Eigen::Index>(eq_rhs_.size()));
  qp.ineq_matrix.resize(static_cast<Eigen::Index>(ineq_rhs_.size()), n);
  qp.ineq_matrix.setFromTriplets(ineq_.begin(), ineq_.end());
  qp.ineq_rhs = Eigen::Map<const VectorXd>(ineq_rhs_.data(), static_cast<Eigen::Index>(ineq_rhs_.size()));
  return qp;
}

}  // namespace xlayer
