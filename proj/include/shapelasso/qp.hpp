#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <string>
#include <vector>

namespace shapelasso {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct Slice {
  Eigen::Index offset = 0;
  Eigen::Index size = 0;
};

/// Where each estimator quantity lives inside the QP variable vector z.
struct VarLayout {
  Slice theta;
  Slice xi;                    ///< row-major n x |xi_columns| block
  Slice epigraph;              ///< auxiliary bound variables (t), possibly empty
  std::vector<int> xi_columns; ///< original input index of each xi column
  /// Optional structure hint: independent block id per variable, -1 for the
  /// coupled tail. Rows of A may touch at most one block. Empty = no hint.
  std::vector<int> block_of;
};

/// minimize 1/2 z'Pz + q'z  subject to  A z <= b.
struct QpProblem {
  SparseMatrix P;
  Eigen::VectorXd q;
  SparseMatrix A;
  Eigen::VectorXd b;
  VarLayout layout;

  Eigen::Index num_vars() const { return q.size(); }
  Eigen::Index num_constraints() const { return b.size(); }
  double objective(const Eigen::VectorXd& z) const;
  /// Throws InvalidInput when dimensions, symmetry, PSD-diagonal or row
  /// non-emptiness invariants fail.
  void validate() const;
};

enum class QpStatus { optimal, max_iter, infeasible };

std::string to_string(QpStatus s);

struct QpSolution {
  Eigen::VectorXd z;
  Eigen::VectorXd duals;  ///< multipliers of A z <= b (>= 0)
  double objective = 0.0;
  double primal_residual = 0.0;  ///< max(A z - b)_+
  double stationarity = 0.0;     ///< relative ||P z + q + A' y||_inf
  QpStatus status = QpStatus::max_iter;
  int iterations = 0;
  double solve_time = 0.0;  ///< seconds
  std::string backend;
};

struct Tolerances {
  double eps_feas = 1e-6;
  double eps_kkt = 1e-6;
  int max_iter = 0;  ///< 0 selects the backend default
  bool equilibrate = false;
};

enum class Backend { ipm, admm, external };

/// Accepts "builtin"/"ipm", "admm", "external".
Backend backend_from_string(const std::string& name);
std::string to_string(Backend b);
/// SHAPELASSO_BACKEND if set, else the interior-point backend.
Backend default_backend();

QpSolution solve(const QpProblem& p, const Tolerances& tol = {}, Backend backend = default_backend());

struct KktResiduals {
  double stationarity = 0.0;     ///< ||P z + q + A' y||_inf
  double primal = 0.0;           ///< ||(A z - b)_+||_inf
  double complementarity = 0.0;  ///< max_r |y_r (b - A z)_r|, plus any negative y_r
};

KktResiduals kkt_residuals(const QpProblem& p, const Eigen::VectorXd& z, const Eigen::VectorXd& duals);

/// Dense reference solver for small instances (num_vars <= 40, num_constraints <= 200).
QpSolution oracle_solve(const QpProblem& p);

inline constexpr Eigen::Index kOracleMaxVars = 40;
inline constexpr Eigen::Index kOracleMaxConstraints = 200;

/// Coordinate-triplet text interchange format (see README).
void write_problem(std::ostream& os, const QpProblem& p);
QpProblem read_problem(std::istream& is);

/// Solution file written by external adapters: status line, then z and duals.
void write_solution(std::ostream& os, const QpSolution& s);
QpSolution read_solution(std::istream& is);

}  // namespace shapelasso
