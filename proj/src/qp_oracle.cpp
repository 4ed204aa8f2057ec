// Dense reference solver used to cross-check the production backends.
//
// Strictly convex problems are solved exactly by the Goldfarb-Idnani dual
// active-set method. Problems with a singular P are handled by proximal-point
// outer iterations (each one strictly convex), followed by an equality-KKT
// solve on the identified active set.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "backends.hpp"
#include "shapelasso/error.hpp"

namespace shapelasso {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DenseQp {
  MatrixXd G;  // PD
  VectorXd a;
  MatrixXd N;  // constraints n_j' x >= d_j, stored as columns
  VectorXd d;
};

struct GiResult {
  VectorXd x;
  VectorXd u;  // multiplier per constraint (>= 0)
  std::vector<int> active;
  bool infeasible = false;
  int iterations = 0;
};

// Goldfarb-Idnani; J and R are recomputed from scratch after every active-set
// change, which is affordable at oracle sizes and avoids update bookkeeping.
GiResult goldfarb_idnani(const DenseQp& qp) {
  const auto m = qp.G.rows();
  const auto r = qp.N.cols();
  GiResult res;
  res.u = VectorXd::Zero(r);

  Eigen::LLT<MatrixXd> llt(qp.G);
  if (llt.info() != Eigen::Success) throw SolverFailure("oracle: Hessian is not positive definite");
  const MatrixXd L = llt.matrixL();

  VectorXd x = llt.solve(-qp.a);
  std::vector<int> active;
  std::vector<double> u;

  const double scale = 1.0 + (qp.N.size() ? qp.N.cwiseAbs().maxCoeff() : 0.0);
  const double feas_tol = 1e-12 * scale * (1.0 + (qp.d.size() ? qp.d.cwiseAbs().maxCoeff() : 0.0));
  std::vector<double> col_norm(static_cast<std::size_t>(r));
  for (Eigen::Index j = 0; j < r; ++j) col_norm[static_cast<std::size_t>(j)] = std::max(qp.N.col(j).norm(), 1e-300);

  const int max_iter = static_cast<int>(50 * (m + r) + 100);
  int it = 0;
  while (it < max_iter) {
    // Step 1: most violated constraint (normalized).
    int p = -1;
    double worst = -feas_tol;
    for (Eigen::Index j = 0; j < r; ++j) {
      if (std::find(active.begin(), active.end(), static_cast<int>(j)) != active.end()) continue;
      const double s = (qp.N.col(j).dot(x) - qp.d(j)) / col_norm[static_cast<std::size_t>(j)];
      if (s < worst) {
        worst = s;
        p = static_cast<int>(j);
      }
    }
    if (p < 0) break;

    std::vector<double> u_plus = u;
    u_plus.push_back(0.0);
    const VectorXd np = qp.N.col(p);

    while (true) {
      ++it;
      if (it > max_iter) break;
      const auto q = static_cast<Eigen::Index>(active.size());
      MatrixXd Q = MatrixXd::Identity(m, m);
      MatrixXd R(q, q);
      if (q > 0) {
        MatrixXd B(m, q);
        for (Eigen::Index k = 0; k < q; ++k) B.col(k) = qp.N.col(active[static_cast<std::size_t>(k)]);
        B = L.triangularView<Eigen::Lower>().solve(B);
        Eigen::HouseholderQR<MatrixXd> qr(B);
        Q = qr.householderQ() * MatrixXd::Identity(m, m);
        R = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
      }
      const MatrixXd J = L.transpose().triangularView<Eigen::Upper>().solve(Q);
      const VectorXd dv = J.transpose() * np;
      const VectorXd z = J.rightCols(m - q) * dv.tail(m - q);
      VectorXd rdir = VectorXd::Zero(q);
      if (q > 0) rdir = R.triangularView<Eigen::Upper>().solve(dv.head(q));

      double t1 = std::numeric_limits<double>::infinity();
      int drop = -1;
      for (Eigen::Index k = 0; k < q; ++k) {
        if (rdir(k) > 1e-14) {
          const double ratio = u_plus[static_cast<std::size_t>(k)] / rdir(k);
          if (ratio < t1) {
            t1 = ratio;
            drop = static_cast<int>(k);
          }
        }
      }
      const double znp = z.dot(np);
      double t2 = std::numeric_limits<double>::infinity();
      if (z.norm() > 1e-12 * (1.0 + np.norm()) && znp > 1e-300) t2 = -(np.dot(x) - qp.d(p)) / znp;
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) {
        res.infeasible = true;
        res.x = x;
        res.iterations = it;
        return res;
      }
      for (Eigen::Index k = 0; k < q; ++k) u_plus[static_cast<std::size_t>(k)] -= t * rdir(k);
      u_plus.back() += t;
      if (std::isfinite(t2)) x += t * z;

      if (std::isfinite(t2) && t2 <= t1) {
        active.push_back(p);
        u = u_plus;
        break;
      }
      active.erase(active.begin() + drop);
      u_plus.erase(u_plus.begin() + drop);
    }
  }

  res.x = x;
  res.active = active;
  for (std::size_t k = 0; k < active.size(); ++k) res.u(active[k]) = std::max(0.0, u[k]);
  res.iterations = it;
  return res;
}

// Equality-constrained solve on a working set: [P A_W'; A_W 0][z; y] = [-q; b_W].
std::optional<std::pair<VectorXd, VectorXd>> solve_on_working_set(const MatrixXd& P, const VectorXd& q,
                                                                  const MatrixXd& A, const VectorXd& b,
                                                                  const std::vector<int>& working) {
  const auto m = P.rows();
  const auto w = static_cast<Eigen::Index>(working.size());
  MatrixXd K = MatrixXd::Zero(m + w, m + w);
  VectorXd rhs(m + w);
  K.topLeftCorner(m, m) = P;
  rhs.head(m) = -q;
  for (Eigen::Index k = 0; k < w; ++k) {
    const auto row = working[static_cast<std::size_t>(k)];
    K.block(m + k, 0, 1, m) = A.row(row);
    K.block(0, m + k, m, 1) = A.row(row).transpose();
    rhs(m + k) = b(row);
  }
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(K);
  const VectorXd sol = cod.solve(rhs);
  if (!sol.allFinite() || (K * sol - rhs).lpNorm<Eigen::Infinity>() > 1e-8 * (1.0 + rhs.lpNorm<Eigen::Infinity>()))
    return std::nullopt;
  return std::make_pair(VectorXd(sol.head(m)), VectorXd(sol.tail(w)));
}

}  // namespace

QpSolution oracle_solve(const QpProblem& p) {
  p.validate();
  if (p.num_vars() > kOracleMaxVars || p.num_constraints() > kOracleMaxConstraints) {
    throw InvalidInput("oracle_solve refuses instances with more than " + std::to_string(kOracleMaxVars) +
                       " variables or " + std::to_string(kOracleMaxConstraints) + " constraints");
  }
  const auto start = std::chrono::steady_clock::now();
  const auto m = p.num_vars();
  const auto r = p.num_constraints();
  const MatrixXd P = MatrixXd(p.P);
  const MatrixXd A = MatrixXd(p.A);

  QpSolution out;
  out.backend = "oracle";

  DenseQp qp;
  qp.N = -A.transpose();
  qp.d = -p.b;

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(P);
  const double max_eig = m ? std::max(eig.eigenvalues().maxCoeff(), 0.0) : 0.0;
  const double min_eig = m ? eig.eigenvalues().minCoeff() : 0.0;
  const bool strictly_convex = m > 0 && min_eig > 1e-9 * std::max(1.0, max_eig);

  GiResult gi;
  int total_iter = 0;
  if (strictly_convex) {
    qp.G = P;
    qp.a = p.q;
    gi = goldfarb_idnani(qp);
    total_iter = gi.iterations;
  } else {
    const double eps = 1e-2 * std::max(1.0, max_eig);
    qp.G = P + eps * MatrixXd::Identity(m, m);
    VectorXd center = VectorXd::Zero(m);
    for (int outer = 0; outer < 5000; ++outer) {
      qp.a = p.q - eps * center;
      gi = goldfarb_idnani(qp);
      total_iter += gi.iterations;
      if (gi.infeasible) break;
      const double step = (gi.x - center).lpNorm<Eigen::Infinity>();
      center = gi.x;
      if (step <= 1e-13 * (1.0 + center.lpNorm<Eigen::Infinity>())) break;
    }
    gi.x = center;
  }

  out.iterations = total_iter;
  if (gi.infeasible) {
    out.status = QpStatus::infeasible;
    out.z = gi.x.size() == m ? gi.x : VectorXd::Zero(m);
    out.duals = VectorXd::Zero(r);
    detail::finalize_solution(p, out);
    out.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  }

  out.z = gi.x;
  out.duals = gi.u;
  // Polish on the identified working set; keep it only if it is primal and dual feasible.
  if (auto polished = solve_on_working_set(P, p.q, A, p.b, gi.active)) {
    const auto& [z, y] = *polished;
    const double viol = r ? std::max(0.0, (A * z - p.b).maxCoeff()) : 0.0;
    if (viol <= 1e-10 * (1.0 + p.b.lpNorm<Eigen::Infinity>()) && (y.size() == 0 || y.minCoeff() >= -1e-9) &&
        p.objective(z) <= p.objective(out.z) + 1e-12 * (1.0 + std::abs(p.objective(out.z)))) {
      out.z = z;
      out.duals = VectorXd::Zero(r);
      for (std::size_t k = 0; k < gi.active.size(); ++k) out.duals(gi.active[k]) = std::max(0.0, y(static_cast<Eigen::Index>(k)));
    }
  }
  detail::finalize_solution(p, out);
  out.status = out.primal_residual <= 1e-8 ? QpStatus::optimal : QpStatus::max_iter;
  out.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace shapelasso
