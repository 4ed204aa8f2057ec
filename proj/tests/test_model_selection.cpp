#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <numeric>
#include <sstream>

#include "shapelasso/data_io.hpp"
#include "shapelasso/error.hpp"
#include "shapelasso/model_selection.hpp"

using namespace shapelasso;

namespace {

Dataset small_data(std::uint64_t seed, int n = 30, int d = 3) {
  SyntheticConfig c;
  c.n = n;
  c.d = d;
  c.s = 1;
  c.seed = seed;
  c.test_n = 1;
  return generate(c).train;
}

}  // namespace

TEST_CASE("grids") {
  const auto g = log_grid(100.0, 1e-3, 50);
  REQUIRE(g.size() == 50);
  CHECK(g.front() == 100.0);
  CHECK(g.back() == doctest::Approx(0.1));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] < g[i - 1]);
  CHECK(g[1] / g[0] == doctest::Approx(g[2] / g[1]));

  const auto gam = gamma_grid(11);
  REQUIRE(gam.size() == 11);
  CHECK(gam.front() == 1.0);
  CHECK(gam.back() == 0.0);
  CHECK(gam[5] == doctest::Approx(0.5));

  const auto lin = linear_grid(1.0, 100.0, 4);
  CHECK(lin == std::vector<double>{100.0, 67.0, 34.0, 1.0});

  TuningGrid t;
  t.lambdas = {3, 2, 2, 1};
  CHECK_NOTHROW(t.validate());
  t.lambdas = {1, 2};
  CHECK_THROWS_AS(t.validate(), InvalidInput);
  t.lambdas = {1};
  t.gammas = {1.2};
  CHECK_THROWS_AS(t.validate(), InvalidInput);
}

TEST_CASE("default grids per family") {
  const Dataset data = small_data(1);
  FitSpec spec;
  spec.family = Family::slasso;
  const auto g = default_grid(data, spec);
  CHECK(g.lambdas.size() == 50);
  CHECK(g.lambdas.front() == doctest::Approx(lambda_max(data)));
  CHECK(g.gammas == std::vector<double>{1.0});

  spec.family = Family::relaxed_aslasso;
  CHECK(default_grid(data, spec).gammas.size() == 11);

  spec.family = Family::aslasso;
  const Vector w = initial_adaptive_weights(data, spec);
  const auto ga = default_grid(data, spec);
  CHECK(ga.lambdas.front() == doctest::Approx(lambda_max(data) / w.minCoeff()));
  spec.lambda = ga.lambdas.front();
  CHECK(fit(data, spec).active_set.empty());

  spec.family = Family::cnls;
  CHECK(default_grid(data, spec).lambdas == std::vector<double>{0.0});

  spec.family = Family::lasso2;
  const auto c = default_grid(data, spec);
  const auto cnls = fit_cnls(data, false);
  double top = 0;
  for (Eigen::Index i = 0; i < data.n(); ++i) top = std::max(top, cnls.model.xi.values().row(i).lpNorm<1>());
  CHECK(c.lambdas.front() == doctest::Approx(top).epsilon(1e-4));
}

TEST_CASE("fold assignment") {
  const auto f = fold_assignment(23, 5, 42);
  REQUIRE(f.size() == 23);
  std::vector<int> counts(5, 0);
  for (int v : f) counts.at(static_cast<std::size_t>(v))++;
  for (int c : counts) CHECK((c == 4 || c == 5));
  CHECK(f == fold_assignment(23, 5, 42));
  CHECK(f != fold_assignment(23, 5, 43));
  CHECK_THROWS_AS(fold_assignment(3, 5, 0), InvalidInput);
  CHECK_THROWS_AS(fold_assignment(10, 1, 0), InvalidInput);
}

TEST_CASE("single-cell cv refits cnls") {
  const Dataset data = small_data(2);
  FitSpec spec;
  spec.family = Family::slasso;
  TuningGrid g;
  g.lambdas = {0.0};
  CvOptions o;
  o.seed = 3;
  const auto r = k_fold_cv(data, spec, g, o);
  CHECK(r.cells.size() == 1);
  CHECK(r.chosen == 0);
  CHECK(r.lambda_star == 0.0);
  const auto cnls = fit_cnls(data, false);
  CHECK((r.refit.model.theta - cnls.model.theta).lpNorm<Eigen::Infinity>() < 1e-5);
  CHECK(r.cells[0].fold_losses.size() == 5);
  CHECK(r.cells[0].valid);
}

TEST_CASE("duplicate grid values tie toward the first occurrence") {
  const Dataset data = small_data(4);
  FitSpec spec;
  spec.family = Family::slasso;
  const double lm = lambda_max(data);
  TuningGrid g;
  g.lambdas = {0.05 * lm, 0.05 * lm, 0.05 * lm};
  CvOptions o;
  const auto r = k_fold_cv(data, spec, g, o);
  CHECK(r.cells[0].mean_loss == r.cells[1].mean_loss);
  CHECK(r.cells[1].mean_loss == r.cells[2].mean_loss);
  CHECK(r.chosen == 0);
}

TEST_CASE("cv chooses the minimum and is deterministic") {
  const Dataset data = small_data(5, 25, 3);
  FitSpec spec;
  spec.family = Family::relaxed_slasso;
  TuningGrid g;
  g.lambdas = log_grid(lambda_max(data), 1e-2, 4);
  g.gammas = {1.0, 0.5, 0.0};
  CvOptions o;
  o.seed = 11;
  const auto a = k_fold_cv(data, spec, g, o);
  CHECK(a.cells.size() == 12);
  for (const auto& c : a.cells) {
    if (c.valid) CHECK(a.cells[a.chosen].mean_loss <= c.mean_loss);
  }
  CHECK(a.lambda_star == a.cells[a.chosen].lambda);
  CHECK(a.gamma_star == a.cells[a.chosen].gamma);

  o.jobs = 3;
  const auto b = k_fold_cv(data, spec, g, o);
  std::ostringstream sa, sb;
  write_cv_report_csv(sa, a);
  write_cv_report_csv(sb, b);
  CHECK(sa.str() == sb.str());
  std::ostringstream fa;
  write_cv_folds_csv(fa, a);
  const std::string folds = fa.str();
  CHECK(std::count(folds.begin(), folds.end(), '\n') == 1 + 12 * 5);
}

TEST_CASE("holdout cv") {
  SyntheticConfig c;
  c.n = 25;
  c.d = 2;
  c.s = 1;
  c.test_n = 25;
  const auto g = generate(c);
  FitSpec spec;
  spec.family = Family::slasso;
  TuningGrid grid;
  grid.lambdas = log_grid(lambda_max(g.train), 1e-2, 3);
  const auto r = holdout_cv(g.train, g.test, spec, grid);
  CHECK(r.holdout);
  CHECK(r.cells.size() == 3);
  const auto refit = fit(g.train, [&] {
    FitSpec s = spec;
    s.lambda = r.lambda_star;
    return s;
  }());
  CHECK(r.cells[r.chosen].mean_loss == doctest::Approx(test_error(refit.model, g.test.X(), g.test.y())));
}

TEST_CASE("prediction error examples") {
  Vector f0(3);
  f0 << 1, -2, 3;
  CHECK(prediction_error(f0, f0) == 0.0);
  CHECK(prediction_error(Vector::Zero(3), f0) == doctest::Approx(1.0));
  CHECK(prediction_error(Vector(2 * f0), f0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(prediction_error(f0, Vector::Zero(3)), InvalidInput);
}

TEST_CASE("test error examples") {
  MaxAffineModel zero;
  zero.theta = Vector::Zero(1);
  zero.xi = SubgradientMatrix(Matrix::Zero(1, 1));
  zero.anchors = Matrix::Zero(1, 1);
  Matrix X(2, 1);
  X << 0.5, -0.5;
  Vector y(2);
  y << 1, -1;
  CHECK(test_error(zero, X, y) == doctest::Approx(1.0));
  CHECK(test_error(zero, X, Vector::Zero(2)) == 0.0);
}

TEST_CASE("noise raises expected test error by its variance") {
  // Perfect predictor f = f0 = x; y = f0 + N(0, sigma^2) so E[test error] = sigma^2.
  MaxAffineModel id;
  id.theta = Vector::Zero(1);
  id.xi = SubgradientMatrix(Matrix::Ones(1, 1));
  id.anchors = Matrix::Zero(1, 1);
  const double sigma = 0.7;
  std::mt19937_64 rng(77);
  std::normal_distribution<double> nd;
  double total = 0.0;
  const int reps = 200, n = 500;
  for (int r = 0; r < reps; ++r) {
    Matrix X(n, 1);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = nd(rng);
      y(i) = X(i, 0) + sigma * nd(rng);
    }
    total += test_error(id, X, y);
  }
  CHECK(total / reps == doctest::Approx(sigma * sigma).epsilon(0.02));
}

TEST_CASE("f-score and nonzeros") {
  const ActiveSet truth({2, 8});
  CHECK(f_score(truth, truth) == 1.0);
  std::vector<int> all(10);
  std::iota(all.begin(), all.end(), 0);
  CHECK(f_score(ActiveSet(all), truth) == doctest::Approx(1.0 / 3.0));
  CHECK(f_score(ActiveSet(all), ActiveSet({0, 1, 2, 3})) == doctest::Approx(4.0 / 7.0));
  CHECK(f_score(ActiveSet(), truth) == 0.0);
  CHECK(f_score(ActiveSet({0, 1}), truth) == 0.0);
  CHECK_THROWS_AS(f_score(truth, ActiveSet()), InvalidInput);

  CHECK(nonzeros_count(ActiveSet()) == 0);
  CHECK(nonzeros_count(ActiveSet(all)) == 10);
  CHECK(nonzeros_count(support_of(SubgradientMatrix(Matrix::Ones(3, 4)), std::numeric_limits<double>::infinity())) == 0);
}
