#pragma once

#include "shapelasso/qp.hpp"

namespace shapelasso::detail {

QpSolution solve_ipm(const QpProblem& p, const Tolerances& tol);
QpSolution solve_admm(const QpProblem& p, const Tolerances& tol);
QpSolution solve_external(const QpProblem& p, const Tolerances& tol);

/// Fills objective, primal_residual and stationarity from z and duals.
void finalize_solution(const QpProblem& p, QpSolution& s);

/// Relative stationarity: componentwise |Pz + q + A'y| / (1 + |Pz| + |q| + |A'y|), max over components.
double relative_stationarity(const QpProblem& p, const Eigen::VectorXd& z, const Eigen::VectorXd& y);

}  // namespace shapelasso::detail
