#include <algorithm>
#include <cmath>
#include <limits>

#include "backends.hpp"
#include "shapelasso/error.hpp"

namespace shapelasso {

namespace detail {

double relative_stationarity(const QpProblem& p, const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
  const Eigen::VectorXd Pz = p.P * z;
  const Eigen::VectorXd Aty = p.A.transpose() * y;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    const double g = Pz(j) + p.q(j) + Aty(j);
    worst = std::max(worst, std::abs(g) / (1.0 + std::abs(Pz(j)) + std::abs(p.q(j)) + std::abs(Aty(j))));
  }
  return worst;
}

void finalize_solution(const QpProblem& p, QpSolution& s) {
  if (!s.z.allFinite() || !s.duals.allFinite()) {
    // Breakdown; report it as an unconverged solve rather than letting NaN through.
    s.objective = std::numeric_limits<double>::quiet_NaN();
    s.primal_residual = s.stationarity = std::numeric_limits<double>::infinity();
    return;
  }
  s.objective = p.objective(s.z);
  s.primal_residual = 0.0;
  if (p.num_constraints() > 0) {
    s.primal_residual = std::max(0.0, (p.A * s.z - p.b).maxCoeff());
  }
  s.stationarity = relative_stationarity(p, s.z, s.duals);
}

}  // namespace detail

QpSolution solve(const QpProblem& p, const Tolerances& tol, Backend backend) {
  p.validate();
  if (!(tol.eps_feas > 0.0) || !(tol.eps_kkt > 0.0)) throw InvalidInput("solver tolerances must be positive");

  auto run = [&](const QpProblem& prob) {
    switch (backend) {
      case Backend::ipm: return detail::solve_ipm(prob, tol);
      case Backend::admm: return detail::solve_admm(prob, tol);
      case Backend::external: return detail::solve_external(prob, tol);
    }
    throw InvalidInput("unknown backend");
  };

  if (!tol.equilibrate || p.num_constraints() == 0) return run(p);

  // Row equilibration: scale each constraint to unit max-norm, then map duals back.
  Eigen::VectorXd row_max = Eigen::VectorXd::Zero(p.num_constraints());
  for (Eigen::Index j = 0; j < p.A.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(p.A, j); it; ++it)
      row_max(it.row()) = std::max(row_max(it.row()), std::abs(it.value()));
  const Eigen::VectorXd d = row_max.cwiseMax(1e-300).cwiseInverse();
  QpProblem scaled = p;
  scaled.A = d.asDiagonal() * p.A;
  scaled.b = d.cwiseProduct(p.b);
  QpSolution s = run(scaled);
  if (s.duals.size() == d.size()) s.duals = s.duals.cwiseProduct(d);
  detail::finalize_solution(p, s);
  return s;
}

}  // namespace shapelasso
