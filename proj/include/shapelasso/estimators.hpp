#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "shapelasso/core_model.hpp"
#include "shapelasso/qp.hpp"

namespace shapelasso {

enum class Family { cnls, lasso1, lasso2, slasso, aslasso, relaxed_slasso, relaxed_aslasso };

std::string to_string(Family f);
Family family_from_string(const std::string& name);
bool is_relaxed(Family f);
bool is_adaptive(Family f);
/// Families whose penalty is the column-wise l1/linf norm.
bool is_structured(Family f);

/// Initial estimator used for adaptive weights.
enum class WeightsInit { cnls, slasso };

std::string to_string(WeightsInit w);
WeightsInit weights_init_from_string(const std::string& name);

/// Diagonal added to P on the subgradient and auxiliary variables. Keeps every
/// program strictly convex, so the returned xi is the (near) minimum-norm one.
inline constexpr double kDefaultRidge = 1e-8;
/// Weight given to a variable whose initial subgradient column is zero.
inline constexpr double kWeightCap = 1e8;

struct SolverOptions {
  Tolerances tol;
  Backend backend = default_backend();
  double ridge = kDefaultRidge;
};

struct FitSpec {
  Family family = Family::cnls;
  double lambda = 0.0;
  double gamma = 1.0;
  double c_bound = std::numeric_limits<double>::infinity();
  std::optional<Vector> weights;  ///< adaptive weights; computed from weights_init when absent
  bool monotone = false;
  std::optional<double> zero_tau;  ///< default_zero_tau(xi) when absent
  WeightsInit weights_init = WeightsInit::cnls;
  bool standardize = false;  ///< z-score X and y before fitting; predictions stay in original units
  SolverOptions solver;

  void validate(Eigen::Index d) const;
};

struct SolverSummary {
  std::string backend;
  QpStatus status = QpStatus::optimal;
  int iterations = 0;
  int solves = 0;
  double solve_time = 0.0;
  double primal_residual = 0.0;
  double stationarity = 0.0;
  double objective = 0.0;
};

struct FitResult {
  MaxAffineModel model;
  ActiveSet active_set;
  FitSpec spec;
  double sse = 0.0;            ///< sum of squared residuals in original units, unpenalized
  double penalty_value = 0.0;  ///< value of the (weighted) norm, without lambda
  SolverSummary solver;
  std::optional<ActiveSet> stage1_active_set;  ///< relaxed families only
  std::optional<Vector> weights;               ///< weights actually used (adaptive families)
  std::vector<std::string> warnings;
};

// ---- QP construction -------------------------------------------------------

enum class PenaltyKind {
  none,            ///< plain least squares
  group_linf,      ///< lambda * sum_k w_k max_i |xi_i^k|
  elementwise_l1,  ///< lambda * sum_i ||xi_i||_1
  row_l1_bound,    ///< ||xi_i||_1 <= c for every i
};

struct ProblemSpec {
  PenaltyKind penalty = PenaltyKind::none;
  double lambda = 0.0;
  Vector weights;  ///< one per entry of `columns` (group_linf); empty = all ones
  double c_bound = std::numeric_limits<double>::infinity();
  bool monotone = false;
  std::vector<int> columns;  ///< input columns that get a subgradient; others are fixed at zero
  double ridge = kDefaultRidge;
};

/// Rows theta_i - theta_j + xi_i'(x_j - x_i) <= 0 for all ordered pairs i != j,
/// over variables [theta (n); xi (n x d, row-major)].
SparseMatrix build_convexity_constraints(const Matrix& X);

/// Builds the QP for one penalized fit on (X, y) in the given coordinates.
QpProblem build_problem(const Matrix& X, const Vector& y, const ProblemSpec& spec);

/// Solves a problem from build_problem and returns theta and the n x d subgradient
/// matrix (zero outside spec.columns). Throws SolverFailure unless optimal.
struct QpFit {
  Vector theta;
  Matrix xi;
  QpSolution solution;
};
QpFit solve_problem(const Matrix& X, const Vector& y, const ProblemSpec& spec, const SolverOptions& opts);

// ---- estimators ------------------------------------------------------------

double lambda_max(const Dataset& data);

/// w_k = 1 / ||column k||_2; columns with norm <= tau get kWeightCap.
/// tau defaults to default_zero_tau(initial).
Vector compute_adaptive_weights(const SubgradientMatrix& initial, std::optional<double> tau = std::nullopt);

/// Initial subgradients for adaptive weights, computed in the coordinates the
/// fit will use (standardized when spec.standardize).
Vector initial_adaptive_weights(const Dataset& data, const FitSpec& spec);

FitResult fit_cnls(const Dataset& data, bool monotone, const SolverOptions& opts = {});
FitResult fit_slasso(const Dataset& data, double lambda, const std::optional<Vector>& weights, bool monotone,
                     const SolverOptions& opts = {});
FitResult fit_lasso1(const Dataset& data, double lambda, bool monotone, const SolverOptions& opts = {});
FitResult fit_lasso2(const Dataset& data, double c_bound, bool monotone, const SolverOptions& opts = {});
FitResult fit_relaxed(const Dataset& data, double lambda, double gamma, const std::optional<Vector>& weights,
                      bool monotone, const SolverOptions& opts = {});

/// General entry point: dispatches on spec.family, handles adaptive weights and
/// standardization.
FitResult fit(const Dataset& data, const FitSpec& spec);

/// Relaxed fits for several gammas sharing one stage-1 solve. Result i uses gammas[i].
std::vector<FitResult> fit_relaxed_path(const Dataset& data, const FitSpec& spec, const std::vector<double>& gammas);

nlohmann::json to_json(const FitResult& r);

}  // namespace shapelasso
