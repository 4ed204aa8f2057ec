// Operator-splitting (ADMM) backend in the style of OSQP: one factorization of
// P + sigma*I + rho*A'A per rho value, over-relaxed iterations, projection of
// the constraint copy onto {v <= b}, and step-based infeasibility detection.

#include <algorithm>
#include <chrono>
#include <cmath>

#include "backends.hpp"
#include "normal_equations.hpp"

namespace shapelasso::detail {

namespace {

constexpr double kSigma = 1e-6;
constexpr double kAlpha = 1.6;
constexpr double kRhoInit = 0.1;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr int kCheckEvery = 10;
constexpr int kAdaptEvery = 50;
constexpr int kDefaultMaxIter = 200000;
constexpr double kInfeasTol = 1e-7;

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

}  // namespace

QpSolution solve_admm(const QpProblem& p, const Tolerances& tol) {
  const auto start = std::chrono::steady_clock::now();
  const auto m = p.num_vars();
  const auto r = p.num_constraints();
  const int max_iter = tol.max_iter > 0 ? tol.max_iter : kDefaultMaxIter;

  QpSolution out;
  out.backend = "admm";

  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd zc = Eigen::VectorXd::Zero(r);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(r);
  double rho = kRhoInit;

  NormalEquations ne(p);
  ne.factor(Eigen::VectorXd::Constant(r, rho), kSigma);

  int it = 0;
  bool infeasible = false;
  bool done = false;
  for (; it < max_iter && !done; ++it) {
    const Eigen::VectorXd rhs = kSigma * x - p.q + p.A.transpose() * (rho * zc - y);
    const Eigen::VectorXd xt = ne.solve(rhs);
    const Eigen::VectorXd zt = p.A * xt;
    x = kAlpha * xt + (1.0 - kAlpha) * x;
    const Eigen::VectorXd zr = kAlpha * zt + (1.0 - kAlpha) * zc;
    const Eigen::VectorXd zc_new = (zr + y / rho).cwiseMin(p.b);
    const Eigen::VectorXd y_new = y + rho * (zr - zc_new);
    const Eigen::VectorXd dy = y_new - y;
    zc = zc_new;
    y = y_new;

    if ((it + 1) % kCheckEvery != 0) continue;

    const Eigen::VectorXd Ax = p.A * x;
    const double primal = r ? std::max(0.0, (Ax - p.b).maxCoeff()) : 0.0;
    const double stationarity = relative_stationarity(p, x, y);
    if (primal <= tol.eps_feas && stationarity <= tol.eps_kkt) {
      done = true;
      break;
    }

    const double dy_norm = inf_norm(dy);
    if (dy_norm > 0.0) {
      const double aty = inf_norm(p.A.transpose() * dy);
      const double by = p.b.dot(dy.cwiseMax(0.0));
      if (aty <= kInfeasTol * dy_norm && by < -kInfeasTol * dy_norm && dy.minCoeff() >= -kInfeasTol * dy_norm) {
        infeasible = true;
        break;
      }
    }

    if ((it + 1) % kAdaptEvery == 0) {
      const Eigen::VectorXd Px = p.P * x;
      const Eigen::VectorXd Aty = p.A.transpose() * y;
      const double r_prim = inf_norm(Ax - zc) / std::max({inf_norm(Ax), inf_norm(zc), 1e-12});
      const double r_dual =
          inf_norm(Px + p.q + Aty) / std::max({inf_norm(Px), inf_norm(Aty), inf_norm(p.q), 1e-12});
      const double rho_new = std::clamp(rho * std::sqrt(r_prim / std::max(r_dual, 1e-300)), kRhoMin, kRhoMax);
      if (rho_new > 5.0 * rho || rho_new < rho / 5.0) {
        rho = rho_new;
        ne.factor(Eigen::VectorXd::Constant(r, rho), kSigma);
      }
    }
  }

  out.z = x;
  out.duals = y;
  out.iterations = it;
  finalize_solution(p, out);
  if (infeasible) out.status = QpStatus::infeasible;
  else if (out.primal_residual <= tol.eps_feas && out.stationarity <= tol.eps_kkt) out.status = QpStatus::optimal;
  else out.status = QpStatus::max_iter;
  out.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace shapelasso::detail
