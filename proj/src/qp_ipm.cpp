// Mehrotra predictor-corrector interior-point method for
//   minimize 1/2 z'Pz + q'z  s.t.  Az + s = b, s >= 0
// with multipliers y >= 0. Newton systems are reduced to the normal equations
// (P + A' S^{-1} Y A) dz = rhs and solved by NormalEquations.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "backends.hpp"
#include "normal_equations.hpp"

namespace shapelasso::detail {

namespace {

constexpr double kTarget = 1e-10;      // internal convergence target (relative)
constexpr double kStepFraction = 0.995;
constexpr int kDefaultMaxIter = 200;
constexpr int kStallWindow = 3;  // iterations without dual progress once the gap has closed

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
  }
  return alpha;
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

}  // namespace

QpSolution solve_ipm(const QpProblem& p, const Tolerances& tol) {
  const auto start = std::chrono::steady_clock::now();
  const auto m = p.num_vars();
  const auto r = p.num_constraints();
  const int max_iter = tol.max_iter > 0 ? tol.max_iter : kDefaultMaxIter;

  QpSolution out;
  out.backend = "ipm";

  Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
  if (r == 0) {
    // Unconstrained: a single regularized Newton step from zero (plus refinement).
    NormalEquations ne(p);
    ne.factor(Eigen::VectorXd::Zero(0), 1e-12);
    z = ne.solve_refined(-p.q, 3);
    out.z = z;
    out.duals = Eigen::VectorXd::Zero(0);
    out.iterations = 1;
    finalize_solution(p, out);
    out.status = out.stationarity <= tol.eps_kkt ? QpStatus::optimal : QpStatus::max_iter;
    out.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  }

  const double b_norm = inf_norm(p.b);
  const double q_norm = inf_norm(p.q);
  Eigen::VectorXd s = (p.b - p.A * z).cwiseMax(1.0);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(r);

  NormalEquations ne(p);
  // Kept well below the ridge on P so one refinement step recovers the unregularized step.
  const double reg = 1e-12 * std::max(1.0, q_norm);

  int it = 0;
  bool infeasible = false;
  double best_dual = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (; it < max_iter; ++it) {
    const Eigen::VectorXd Az = p.A * z;
    const Eigen::VectorXd Pz = p.P * z;
    const Eigen::VectorXd Aty = p.A.transpose() * y;
    const Eigen::VectorXd rd = Pz + p.q + Aty;
    const Eigen::VectorXd rp = Az + s - p.b;
    const double mu = s.dot(y) / static_cast<double>(r);

    // Convergence: componentwise relative dual residual, scaled primal residual, small gap.
    double dual_rel = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double scale = 1.0 + std::abs(Pz(j)) + std::abs(p.q(j)) + std::abs(Aty(j));
      dual_rel = std::max(dual_rel, std::abs(rd(j)) / scale);
    }
    const double primal_rel = inf_norm(rp) / (1.0 + std::max({b_norm, inf_norm(Az), inf_norm(s)}));
    const double obj = 0.5 * z.dot(Pz) + p.q.dot(z);
    const double gap_rel = s.dot(y) / (1.0 + std::abs(obj));
    if (dual_rel <= kTarget && primal_rel <= kTarget && gap_rel <= kTarget) break;
    // Once complementarity has closed, the dual residual can sit at a rounding
    // floor above the target; further steps only drive mu to underflow.
    if (primal_rel <= kTarget && gap_rel <= 1e-3 * kTarget) {
      if (dual_rel < 0.9 * best_dual) stalled = 0;
      else if (++stalled >= kStallWindow) break;
    }
    best_dual = std::min(best_dual, dual_rel);

    // Farkas certificate for {Az <= b} empty: y >= 0, A'y = 0, b'y < 0.
    const double y_norm = inf_norm(y);
    if (y_norm > 1e6) {
      const Eigen::VectorXd yh = y / y_norm;
      const double by = p.b.dot(yh);
      if (by < -1e-8 && inf_norm(p.A.transpose() * yh) <= 1e-8 * std::max(1.0, -by) * 1e2) {
        infeasible = true;
        break;
      }
    }

    const Eigen::VectorXd w = y.cwiseQuotient(s);
    ne.factor(w, reg);

    auto newton = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dz, Eigen::VectorXd& ds, Eigen::VectorXd& dy) {
      const Eigen::VectorXd rc_over_s = rc.cwiseQuotient(s);
      const Eigen::VectorXd rhs = -rd - p.A.transpose() * (w.cwiseProduct(rp) - rc_over_s);
      dz = ne.solve_refined(rhs, 1);
      dy = w.cwiseProduct(p.A * dz + rp) - rc_over_s;
      ds = -(rc + s.cwiseProduct(dy)).cwiseQuotient(y);
    };

    Eigen::VectorXd dz, ds, dy;
    // Predictor (affine scaling).
    const Eigen::VectorXd sy = s.cwiseProduct(y);
    newton(sy, dz, ds, dy);
    const double a_aff = std::min(max_step(s, ds), max_step(y, dy));
    const double mu_aff = (s + a_aff * ds).dot(y + a_aff * dy) / static_cast<double>(r);
    const double sigma = std::pow(std::max(0.0, mu_aff) / std::max(mu, std::numeric_limits<double>::min()), 3);

    // Corrector with centering.
    const Eigen::VectorXd rc = sy + ds.cwiseProduct(dy) - Eigen::VectorXd::Constant(r, sigma * mu);
    newton(rc, dz, ds, dy);
    const double alpha = std::min(1.0, kStepFraction * std::min(max_step(s, ds), max_step(y, dy)));

    z += alpha * dz;
    s += alpha * ds;
    y += alpha * dy;
    s = s.cwiseMax(std::numeric_limits<double>::min());
    y = y.cwiseMax(std::numeric_limits<double>::min());
  }

  out.z = z;
  out.duals = y;
  out.iterations = it;
  finalize_solution(p, out);
  if (infeasible) {
    out.status = QpStatus::infeasible;
  } else if (out.primal_residual <= tol.eps_feas && out.stationarity <= tol.eps_kkt) {
    out.status = QpStatus::optimal;
  } else {
    out.status = QpStatus::max_iter;
  }
  out.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace shapelasso::detail
