#include "shapelasso/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "shapelasso/data_io.hpp"
#include "shapelasso/error.hpp"
#include "parallel.hpp"

namespace shapelasso {

void TuningGrid::validate() const {
  if (lambdas.empty()) throw InvalidInput("tuning grid has no lambda values");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!std::isfinite(lambdas[i]) || lambdas[i] < 0.0) throw InvalidInput("grid lambdas must be finite and >= 0");
    if (i > 0 && lambdas[i] > lambdas[i - 1]) throw InvalidInput("grid lambdas must be nonincreasing");
  }
  if (gammas.empty()) throw InvalidInput("tuning grid has no gamma values");
  for (double g : gammas)
    if (!(g >= 0.0 && g <= 1.0)) throw InvalidInput("grid gammas must lie in [0, 1]");
}

std::vector<double> log_grid(double hi, double min_frac, int count) {
  if (count < 1) throw InvalidInput("grid size must be >= 1");
  if (!(hi >= 0.0) || !(min_frac > 0.0 && min_frac <= 1.0)) throw InvalidInput("invalid log grid bounds");
  std::vector<double> g(static_cast<std::size_t>(count), hi);
  if (count == 1 || hi == 0.0) return g;
  const double step = std::log(min_frac) / (count - 1);
  for (int i = 1; i < count; ++i) g[static_cast<std::size_t>(i)] = hi * std::exp(step * i);
  g.back() = hi * min_frac;
  return g;
}

std::vector<double> linear_grid(double lo, double hi, int count) {
  if (count < 1) throw InvalidInput("grid size must be >= 1");
  if (!(lo <= hi)) throw InvalidInput("linear grid needs lo <= hi");
  std::vector<double> g(static_cast<std::size_t>(count), hi);
  for (int i = 1; i < count; ++i) g[static_cast<std::size_t>(i)] = hi - (hi - lo) * i / (count - 1);
  return g;
}

std::vector<double> gamma_grid(int count) { return linear_grid(0.0, 1.0, count); }

TuningGrid default_grid(const Dataset& data, const FitSpec& spec, const GridOptions& opt) {
  TuningGrid g;
  if (spec.family == Family::lasso2) {
    FitSpec cnls = spec;
    cnls.family = Family::cnls;
    const FitResult r = fit(data, cnls);
    const Matrix& xi = r.model.xi.values();
    const double top = xi.rows() ? xi.rowwise().lpNorm<1>().maxCoeff() : 0.0;
    g.lambdas = log_grid(top, opt.min_frac, opt.lambdas);
  } else if (spec.family == Family::cnls) {
    g.lambdas = {0.0};
  } else {
    double top = spec.standardize ? lambda_max(standardize_apply(standardize_fit(data), data)) : lambda_max(data);
    if (is_adaptive(spec.family)) {
      // Weighted penalties are at least min(w) times the unweighted one, so
      // lambda_max / min(w) still gives the empty model. Zero weights never do.
      const Vector w = spec.weights ? *spec.weights : initial_adaptive_weights(data, spec);
      double wmin = std::numeric_limits<double>::infinity();
      for (double v : w)
        if (v > 0.0) wmin = std::min(wmin, v);
      if (std::isfinite(wmin)) top /= wmin;
    }
    g.lambdas = log_grid(top, opt.min_frac, opt.lambdas);
  }
  g.gammas = is_relaxed(spec.family) ? gamma_grid(opt.gammas) : std::vector<double>{1.0};
  return g;
}

std::vector<int> fold_assignment(Eigen::Index n, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidInput("number of folds must be >= 2");
  if (n < k) throw InvalidInput("need at least as many observations as folds");
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<Eigen::Index> pick(0, i);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
  }
  std::vector<int> fold(static_cast<std::size_t>(n));
  Eigen::Index pos = 0;
  for (int f = 0; f < k; ++f) {
    const Eigen::Index size = n / k + (f < n % k ? 1 : 0);
    for (Eigen::Index j = 0; j < size; ++j) fold[static_cast<std::size_t>(perm[static_cast<std::size_t>(pos++)])] = f;
  }
  return fold;
}

using detail::parallel_for;

namespace {

FitSpec cell_spec(const FitSpec& base, double lambda, double gamma) {
  FitSpec s = base;
  if (s.family == Family::lasso2) s.c_bound = lambda;
  else s.lambda = lambda;
  s.gamma = gamma;
  return s;
}

// Losses for every cell on one train/validation split. Relaxed families share
// the stage-1 solve across gammas.
void score_split(const Dataset& train, const Dataset& valid, const FitSpec& base, const TuningGrid& grid,
                 std::size_t li, std::vector<double>& losses) {
  const double lambda = grid.lambdas[li];
  const std::size_t ng = grid.gammas.size();
  auto loss_of = [&](const FitResult& r) { return test_error(r.model, valid.X(), valid.y()); };
  try {
    if (is_relaxed(base.family)) {
      const auto fits = fit_relaxed_path(train, cell_spec(base, lambda, 1.0), grid.gammas);
      for (std::size_t gi = 0; gi < ng; ++gi) losses[li * ng + gi] = loss_of(fits[gi]);
    } else {
      const double loss = loss_of(fit(train, cell_spec(base, lambda, grid.gammas.front())));
      for (std::size_t gi = 0; gi < ng; ++gi) losses[li * ng + gi] = loss;
    }
  } catch (const SolverFailure&) {
    for (std::size_t gi = 0; gi < ng; ++gi) losses[li * ng + gi] = std::numeric_limits<double>::quiet_NaN();
  }
}

FitSpec with_fold_weights(const Dataset& train, const FitSpec& base) {
  FitSpec s = base;
  if (is_adaptive(base.family) && !base.weights) s.weights = initial_adaptive_weights(train, base);
  return s;
}

CvReport select(const Dataset& data, const FitSpec& base, const TuningGrid& grid,
                const std::vector<std::vector<double>>& fold_losses) {
  CvReport r;
  r.family = base.family;
  const std::size_t ng = grid.gammas.size();
  const std::size_t cells = grid.lambdas.size() * ng;
  const int folds = static_cast<int>(fold_losses.size());
  r.folds = folds;
  for (std::size_t c = 0; c < cells; ++c) {
    CvCell cell;
    cell.lambda = grid.lambdas[c / ng];
    cell.gamma = grid.gammas[c % ng];
    double sum = 0.0;
    int ok = 0;
    for (int f = 0; f < folds; ++f) {
      const double l = fold_losses[static_cast<std::size_t>(f)][c];
      cell.fold_losses.push_back(l);
      if (std::isfinite(l)) {
        sum += l;
        ++ok;
      }
    }
    cell.failed_folds = folds - ok;
    cell.valid = ok > 0;
    cell.mean_loss = cell.valid ? sum / ok : std::numeric_limits<double>::quiet_NaN();
    r.cells.push_back(std::move(cell));
  }
  bool found = false;
  for (std::size_t c = 0; c < cells; ++c) {
    const auto& cell = r.cells[c];
    if (!cell.valid) continue;
    if (!found) {
      r.chosen = c;
      found = true;
      continue;
    }
    const auto& best = r.cells[r.chosen];
    const bool better = cell.mean_loss < best.mean_loss ||
                        (cell.mean_loss == best.mean_loss &&
                         (cell.lambda > best.lambda || (cell.lambda == best.lambda && cell.gamma < best.gamma)));
    if (better) r.chosen = c;
  }
  if (!found) throw SolverFailure("cross-validation failed: every grid cell failed on every fold");
  r.lambda_star = r.cells[r.chosen].lambda;
  r.gamma_star = r.cells[r.chosen].gamma;
  r.refit = fit(data, cell_spec(base, r.lambda_star, r.gamma_star));
  return r;
}

}  // namespace

CvReport k_fold_cv(const Dataset& data, const FitSpec& base, const TuningGrid& grid, const CvOptions& opt) {
  grid.validate();
  base.validate(data.d());
  const int k = opt.folds;
  const std::vector<int> fold = fold_assignment(data.n(), k, opt.seed);

  std::vector<Dataset> trains, valids;
  for (int f = 0; f < k; ++f) {
    std::vector<Eigen::Index> tr, va;
    for (Eigen::Index i = 0; i < data.n(); ++i) (fold[static_cast<std::size_t>(i)] == f ? va : tr).push_back(i);
    trains.push_back(data.rows(tr));
    valids.push_back(data.rows(va));
  }
  std::vector<FitSpec> specs(static_cast<std::size_t>(k), base);
  parallel_for(static_cast<std::size_t>(k), opt.jobs,
               [&](std::size_t f) { specs[f] = with_fold_weights(trains[f], base); });

  const std::size_t nl = grid.lambdas.size();
  const std::size_t cells = nl * grid.gammas.size();
  std::vector<std::vector<double>> losses(static_cast<std::size_t>(k), std::vector<double>(cells));
  parallel_for(static_cast<std::size_t>(k) * nl, opt.jobs, [&](std::size_t task) {
    const std::size_t f = task / nl;
    score_split(trains[f], valids[f], specs[f], grid, task % nl, losses[f]);
  });

  CvReport r = select(data, base, grid, losses);
  r.seed = opt.seed;
  r.fold_of = fold;
  return r;
}

CvReport holdout_cv(const Dataset& train, const Dataset& validation, const FitSpec& base, const TuningGrid& grid,
                    int jobs) {
  grid.validate();
  base.validate(train.d());
  if (validation.d() != train.d()) throw InvalidInput("validation set has a different number of columns");
  const FitSpec spec = with_fold_weights(train, base);
  const std::size_t nl = grid.lambdas.size();
  std::vector<std::vector<double>> losses(1, std::vector<double>(nl * grid.gammas.size()));
  parallel_for(nl, jobs, [&](std::size_t li) { score_split(train, validation, spec, grid, li, losses[0]); });
  CvReport r = select(train, base, grid, losses);
  r.holdout = true;
  return r;
}

// ---- metrics -----------------------------------------------------------------

double prediction_error(const Vector& fitted, const Vector& f0_values) {
  if (fitted.size() != f0_values.size()) throw InvalidInput("prediction_error: length mismatch");
  const double denom = f0_values.squaredNorm();
  if (!(denom > 0.0)) throw InvalidInput("prediction_error: true function is zero on every test row");
  return (fitted - f0_values).squaredNorm() / denom;
}

double prediction_error(const MaxAffineModel& model, const Matrix& test_X,
                        const std::function<double(const Eigen::Ref<const Vector>&)>& f0) {
  Vector truth(test_X.rows());
  for (Eigen::Index i = 0; i < test_X.rows(); ++i) truth(i) = f0(test_X.row(i).transpose());
  return prediction_error(predict_rows(model, test_X), truth);
}

double test_error(const MaxAffineModel& model, const Matrix& test_X, const Vector& test_y) {
  if (test_X.rows() != test_y.size()) throw InvalidInput("test_error: length mismatch");
  if (test_y.size() == 0) throw InvalidInput("test_error: empty test set");
  return (predict_rows(model, test_X) - test_y).squaredNorm() / static_cast<double>(test_y.size());
}

double f_score(const ActiveSet& selected, const ActiveSet& truth) {
  if (truth.empty()) throw InvalidInput("f_score: true support must be nonempty");
  if (selected.empty()) return 0.0;
  std::size_t hits = 0;
  for (int k : selected.indices()) hits += truth.contains(k) ? 1 : 0;
  if (hits == 0) return 0.0;
  const double precision = static_cast<double>(hits) / static_cast<double>(selected.size());
  const double recall = static_cast<double>(hits) / static_cast<double>(truth.size());
  return 2.0 / (1.0 / recall + 1.0 / precision);
}

std::size_t nonzeros_count(const ActiveSet& selected) { return selected.size(); }

// ---- output ------------------------------------------------------------------

void write_cv_report_csv(std::ostream& os, const CvReport& r) {
  os << "cell,lambda,gamma,mean_loss,valid,failed_folds";
  for (int f = 0; f < r.folds; ++f) os << ",fold" << (f + 1) << "_loss";
  os << ",chosen\n";
  for (std::size_t c = 0; c < r.cells.size(); ++c) {
    const auto& cell = r.cells[c];
    os << c << ',' << format_double(cell.lambda) << ',' << format_double(cell.gamma) << ','
       << format_double(cell.mean_loss) << ',' << (cell.valid ? 1 : 0) << ',' << cell.failed_folds;
    for (double l : cell.fold_losses) os << ',' << format_double(l);
    os << ',' << (c == r.chosen ? 1 : 0) << '\n';
  }
}

void write_cv_folds_csv(std::ostream& os, const CvReport& r) {
  os << "cell,lambda,gamma,fold,loss\n";
  for (std::size_t c = 0; c < r.cells.size(); ++c) {
    const auto& cell = r.cells[c];
    for (std::size_t f = 0; f < cell.fold_losses.size(); ++f)
      os << c << ',' << format_double(cell.lambda) << ',' << format_double(cell.gamma) << ',' << (f + 1) << ','
         << format_double(cell.fold_losses[f]) << '\n';
  }
}

nlohmann::json to_json(const CvReport& r) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["family"] = to_string(r.family);
  j["mode"] = r.holdout ? "holdout" : "kfold";
  j["folds"] = r.folds;
  j["seed"] = r.seed;
  j["chosen_cell"] = r.chosen;
  j["lambda_star"] = r.lambda_star;
  j["gamma_star"] = r.gamma_star;
  auto cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    auto losses = nlohmann::json::array();
    for (double l : c.fold_losses) losses.push_back(std::isfinite(l) ? nlohmann::json(l) : nlohmann::json(nullptr));
    cells.push_back({{"lambda", c.lambda},
                     {"gamma", c.gamma},
                     {"mean_loss", c.valid ? nlohmann::json(c.mean_loss) : nlohmann::json(nullptr)},
                     {"valid", c.valid},
                     {"failed_folds", c.failed_folds},
                     {"fold_losses", losses}});
  }
  j["cells"] = cells;
  j["fold_of"] = r.fold_of;
  j["refit"] = to_json(r.refit);
  return j;
}

}  // namespace shapelasso
