#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "shapelasso/estimators.hpp"

namespace shapelasso {

/// Candidate tuning values. For lasso2 the `lambdas` entries are bounds c.
/// `gammas` is used only by relaxed families.
struct TuningGrid {
  std::vector<double> lambdas;
  std::vector<double> gammas{1.0};

  /// Nonincreasing, finite, >= 0 lambdas; gammas in [0, 1].
  void validate() const;
};

/// count values log-spaced from hi down to hi * min_frac (hi itself first).
std::vector<double> log_grid(double hi, double min_frac, int count);
/// count equally spaced values from hi down to lo.
std::vector<double> linear_grid(double lo, double hi, int count);
/// count equally spaced values from 1 down to 0.
std::vector<double> gamma_grid(int count);

struct GridOptions {
  int lambdas = 50;
  int gammas = 11;
  double min_frac = 1e-3;
};

/// Default grid for a family on a dataset: log-spaced from lambda_max (in the
/// coordinates the fit uses). Adaptive families divide lambda_max by the
/// smallest positive weight. For lasso2 the top value is the largest row
/// l1 norm of the CNLS subgradients instead.
TuningGrid default_grid(const Dataset& data, const FitSpec& spec, const GridOptions& opt = {});

struct CvCell {
  double lambda = 0.0;
  double gamma = 1.0;
  std::vector<double> fold_losses;  ///< NaN where the fold fit failed
  double mean_loss = 0.0;           ///< over successful folds
  int failed_folds = 0;
  bool valid = false;
};

struct CvReport {
  Family family = Family::cnls;
  std::vector<CvCell> cells;  ///< lambda-major: cell = lambda_index * |gammas| + gamma_index
  std::size_t chosen = 0;
  double lambda_star = 0.0;
  double gamma_star = 1.0;
  int folds = 0;
  std::uint64_t seed = 0;
  bool holdout = false;
  std::vector<int> fold_of;  ///< fold id per training row (k-fold mode)
  FitResult refit;
};

struct CvOptions {
  int folds = 5;
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Deterministic fold ids: seeded uniform permutation split into k contiguous blocks.
std::vector<int> fold_assignment(Eigen::Index n, int k, std::uint64_t seed);

/// k-fold CV over the grid using held-out mean squared error, then refits the
/// chosen cell on all of `data`. Ties go to larger lambda, then smaller gamma.
CvReport k_fold_cv(const Dataset& data, const FitSpec& base, const TuningGrid& grid, const CvOptions& opt);

/// Same selection rule scored on a separate validation set.
CvReport holdout_cv(const Dataset& train, const Dataset& validation, const FitSpec& base, const TuningGrid& grid,
                    int jobs = 1);

/// sum (f(x) - f0(x))^2 / sum f0(x)^2 over the rows of test_X.
double prediction_error(const MaxAffineModel& model, const Matrix& test_X,
                        const std::function<double(const Eigen::Ref<const Vector>&)>& f0);
double prediction_error(const Vector& fitted, const Vector& f0_values);
/// Mean squared error against test_y.
double test_error(const MaxAffineModel& model, const Matrix& test_X, const Vector& test_y);
/// Harmonic mean of precision and recall; 0 for an empty selection.
double f_score(const ActiveSet& selected, const ActiveSet& truth);
std::size_t nonzeros_count(const ActiveSet& selected);

/// One row per cell with the per-fold losses as columns.
void write_cv_report_csv(std::ostream& os, const CvReport& r);
/// One row per cell per fold.
void write_cv_folds_csv(std::ostream& os, const CvReport& r);
nlohmann::json to_json(const CvReport& r);

}  // namespace shapelasso
