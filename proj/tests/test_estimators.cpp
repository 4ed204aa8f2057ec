#include <doctest.h>

#include <random>

#include "shapelasso/data_io.hpp"
#include "shapelasso/error.hpp"
#include "shapelasso/estimators.hpp"

using namespace shapelasso;

namespace {

Dataset toy(std::initializer_list<double> xs, std::initializer_list<double> ys) {
  Matrix X(static_cast<Eigen::Index>(xs.size()), 1);
  Vector y(static_cast<Eigen::Index>(ys.size()));
  Eigen::Index i = 0;
  for (double v : xs) X(i++, 0) = v;
  i = 0;
  for (double v : ys) y(i++) = v;
  return Dataset(X, y);
}

Dataset synthetic_train(int n, int d, std::uint64_t seed) {
  SyntheticConfig c;
  c.n = n;
  c.d = d;
  c.s = std::min(2, d);
  c.seed = seed;
  c.test_n = 1;
  return generate(c).train;
}

Matrix xi_of(const FitResult& r) { return r.model.xi.values(); }

}  // namespace

TEST_CASE("convexity constraint rows") {
  CHECK(build_convexity_constraints(Matrix::Zero(1, 2)).rows() == 0);
  CHECK(build_convexity_constraints(Matrix::Zero(2, 2)).rows() == 2);
  const SparseMatrix A = build_convexity_constraints(Matrix::Random(10, 3));
  CHECK(A.rows() == 90);
  CHECK(A.cols() == 10 + 30);
}

TEST_CASE("cnls examples") {
  SUBCASE("two points interpolate") {
    const auto r = fit_cnls(toy({0, 1}, {0, 1}), false);
    CHECK(r.sse < 1e-10);
    CHECK(std::abs(r.model.theta(0)) < 1e-6);
    CHECK(r.model.theta(1) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("three points, middle bump") {
    const Dataset data = toy({0, 1, 2}, {0, 1, 0});
    const auto r = fit_cnls(data, false);
    for (int i = 0; i < 3; ++i) CHECK(r.model.theta(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    CHECK(r.sse == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK(r.penalty_value == 0.0);

    // Independent check: the active-set oracle on the same program.
    const QpProblem p = build_problem(data.X(), data.y(), ProblemSpec{});
    const QpSolution o = oracle_solve(p);
    REQUIRE(o.status == QpStatus::optimal);
    for (int i = 0; i < 3; ++i) CHECK(o.z(i) == doctest::Approx(r.model.theta(i)).epsilon(1e-6));
  }
  SUBCASE("convex data is interpolated") {
    const auto r = fit_cnls(toy({0, 1, 2}, {0, 0, 1}), false);
    CHECK(r.sse < 1e-10);
  }
}

TEST_CASE("lambda_max examples") {
  Matrix I = Matrix::Identity(2, 2);
  Vector y(2);
  y << 1, -1;
  CHECK(lambda_max(Dataset(I, y)) == doctest::Approx(2.0));
  CHECK(lambda_max(Dataset(I, Vector::Zero(2))) == 0.0);
  Matrix X(2, 2);
  X << 1, 0, 2, 0;
  CHECK(lambda_max(Dataset(X, y)) == doctest::Approx(1.0));
}

TEST_CASE("adaptive weights") {
  Matrix m(2, 2);
  m << 2, 0.5, 0, 0;
  const Vector w = compute_adaptive_weights(SubgradientMatrix(m));
  CHECK(w(0) == doctest::Approx(0.5));
  CHECK(w(1) == doctest::Approx(2.0));

  Matrix z(3, 2);
  z << 1, 0, 0, 0, 0, 0;
  CHECK(compute_adaptive_weights(SubgradientMatrix(z))(1) == kWeightCap);

  Matrix unit(1, 3);
  unit << 1, -1, 1;
  CHECK(compute_adaptive_weights(SubgradientMatrix(unit)) == Vector::Ones(3));
}

TEST_CASE("unit weights give the slasso program") {
  const Dataset data = synthetic_train(12, 3, 5);
  ProblemSpec a;
  a.penalty = PenaltyKind::group_linf;
  a.lambda = 0.7;
  a.columns = {0, 1, 2};
  ProblemSpec b = a;
  b.weights = Vector::Ones(3);
  const QpProblem pa = build_problem(data.X(), data.y(), a), pb = build_problem(data.X(), data.y(), b);
  CHECK(Matrix(pa.P) == Matrix(pb.P));
  CHECK(pa.q == pb.q);
  CHECK(Matrix(pa.A) == Matrix(pb.A));
  CHECK(pa.b == pb.b);
}

TEST_CASE("zero penalty reproduces cnls") {
  const Dataset data = synthetic_train(20, 3, 11);
  const auto cnls = fit_cnls(data, false);
  const auto sl = fit_slasso(data, 0.0, std::nullopt, false);
  const auto l1 = fit_lasso1(data, 0.0, false);
  const auto l2 = fit_lasso2(data, std::numeric_limits<double>::infinity(), false);
  const auto l2big = fit_lasso2(data, 1e6, false);
  for (const auto* r : {&sl, &l1, &l2, &l2big}) {
    CHECK((r->model.theta - cnls.model.theta).lpNorm<Eigen::Infinity>() < 1e-5);
  }
}

TEST_CASE("large lambda gives the constant-mean model") {
  const Dataset data = synthetic_train(15, 3, 3);
  const double lmax = lambda_max(data);
  const double mean = data.y().mean();
  for (const auto& r : {fit_slasso(data, lmax, std::nullopt, false), fit_slasso(data, 10 * lmax, std::nullopt, false),
                        fit_lasso1(data, 10 * lmax, false), fit_lasso2(data, 0.0, false)}) {
    CHECK(r.active_set.empty());
    CHECK((r.model.theta.array() - mean).abs().maxCoeff() < 1e-5);
  }

  // The constant-mean point is optimal for the small program, as certified by the oracle.
  const Dataset tiny = synthetic_train(5, 2, 8);
  ProblemSpec spec;
  spec.penalty = PenaltyKind::group_linf;
  spec.lambda = lambda_max(tiny);
  spec.columns = {0, 1};
  const QpSolution o = oracle_solve(build_problem(tiny.X(), tiny.y(), spec));
  REQUIRE(o.status == QpStatus::optimal);
  for (int i = 0; i < 5; ++i) CHECK(o.z(i) == doctest::Approx(tiny.y().mean()).epsilon(1e-6));
  for (int j = 5; j < 15; ++j) CHECK(std::abs(o.z(j)) < 1e-6);
}

TEST_CASE("lasso1 epigraph is tight") {
  const Dataset data = synthetic_train(25, 4, 21);
  const auto r = fit_lasso1(data, 0.05 * lambda_max(data), false);
  CHECK(r.penalty_value == doctest::Approx(l1_lq_norm(r.model.xi, NormOrder::l1)).epsilon(1e-8));
  CHECK(r.penalty_value > 0.0);
  // The solver objective includes lambda times every epigraph variable.
  const double half_sse = 0.5 * r.sse;
  CHECK(r.solver.objective + 0.5 * data.y().squaredNorm() ==
        doctest::Approx(half_sse + r.spec.lambda * r.penalty_value).epsilon(1e-6));
}

TEST_CASE("lasso2 respects the row bound") {
  const Dataset data = synthetic_train(20, 3, 4);
  const auto r = fit_lasso2(data, 0.5, false);
  const Matrix xi = xi_of(r);
  for (Eigen::Index i = 0; i < xi.rows(); ++i) CHECK(xi.row(i).lpNorm<1>() <= 0.5 + 1e-6);
  CHECK(r.penalty_value <= 0.5 + 1e-6);
}

TEST_CASE("fitted models satisfy convexity") {
  const Dataset data = synthetic_train(30, 4, 99);
  const double lmax = lambda_max(data);
  for (Family f : {Family::cnls, Family::lasso1, Family::lasso2, Family::slasso, Family::aslasso,
                   Family::relaxed_slasso, Family::relaxed_aslasso}) {
    FitSpec spec;
    spec.family = f;
    spec.lambda = f == Family::lasso2 ? 1.0 : 0.01 * lmax;
    spec.c_bound = 1.0;
    spec.gamma = 0.5;
    const auto r = fit(data, spec);
    INFO(to_string(f));
    CHECK(max_convexity_violation(r.model) <= 1e-6);
    const Vector fitted = predict_rows(r.model, data.X());
    CHECK((fitted - r.model.theta).lpNorm<Eigen::Infinity>() <= 1e-6);
  }
}

TEST_CASE("monotone fits are nondecreasing") {
  const Dataset data = synthetic_train(25, 3, 13);
  for (Family f : {Family::cnls, Family::slasso, Family::lasso1}) {
    FitSpec spec;
    spec.family = f;
    spec.lambda = 0.01 * lambda_max(data);
    spec.monotone = true;
    const auto r = fit(data, spec);
    CHECK(r.model.xi.values().minCoeff() >= -1e-6);
    Vector x = data.X().colwise().mean().transpose();
    for (Eigen::Index k = 0; k < 3; ++k) {
      double prev = -std::numeric_limits<double>::infinity();
      for (int g = 0; g < 10; ++g) {
        x(k) = -2.0 + 4.0 * g / 9.0;
        const double v = predict(r.model, x);
        CHECK(v >= prev - 1e-9);
        prev = v;
      }
      x(k) = data.X().col(k).mean();
    }
  }
}

TEST_CASE("relaxed limits") {
  const Dataset data = synthetic_train(30, 5, 17);
  const double lambda = 0.05 * lambda_max(data);
  const auto sl = fit_slasso(data, lambda, std::nullopt, false);
  REQUIRE(!sl.active_set.empty());

  SUBCASE("gamma = 1 is slasso") {
    const auto r = fit_relaxed(data, lambda, 1.0, std::nullopt, false);
    CHECK(r.stage1_active_set.value() == sl.active_set);
    CHECK((r.model.theta - sl.model.theta).lpNorm<Eigen::Infinity>() < 1e-5);
  }
  SUBCASE("gamma = 0 is cnls on the selected columns") {
    const auto r = fit_relaxed(data, lambda, 0.0, std::nullopt, false);
    std::vector<Eigen::Index> cols(sl.active_set.indices().begin(), sl.active_set.indices().end());
    Matrix Xm(data.n(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) Xm.col(static_cast<Eigen::Index>(j)) = data.X().col(cols[j]);
    const auto cnls = fit_cnls(Dataset(Xm, data.y()), false);
    CHECK((r.model.theta - cnls.model.theta).lpNorm<Eigen::Infinity>() < 1e-5);
    for (Eigen::Index k = 0; k < data.d(); ++k)
      if (!sl.active_set.contains(static_cast<int>(k))) CHECK(xi_of(r).col(k).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("path matches individual fits") {
    FitSpec spec;
    spec.family = Family::relaxed_slasso;
    spec.lambda = lambda;
    const auto path = fit_relaxed_path(data, spec, {1.0, 0.5, 0.0});
    REQUIRE(path.size() == 3);
    const auto half = fit_relaxed(data, lambda, 0.5, std::nullopt, false);
    CHECK((path[1].model.theta - half.model.theta).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("relaxed with an empty stage-1 support") {
  const Dataset data = synthetic_train(12, 2, 6);
  const auto r = fit_relaxed(data, 10 * lambda_max(data), 0.5, std::nullopt, false);
  CHECK(r.active_set.empty());
  CHECK((r.model.theta.array() - data.y().mean()).abs().maxCoeff() < 1e-9);
  CHECK(!r.warnings.empty());
}

TEST_CASE("single observation") {
  Matrix X(1, 2);
  X << 1, 2;
  Vector y(1);
  y << 3;
  const auto r = fit(Dataset(X, y), FitSpec{});
  CHECK(r.model.theta(0) == 3.0);
  CHECK(r.active_set.empty());
}

TEST_CASE("standardized fits predict in original units") {
  const Dataset data = synthetic_train(20, 3, 31);
  FitSpec spec;
  spec.family = Family::cnls;
  spec.standardize = true;
  const auto r = fit(data, spec);
  REQUIRE(r.model.standardization.has_value());
  const auto raw = fit_cnls(data, false);
  // CNLS is equivariant under affine maps of x and y.
  CHECK((predict_rows(r.model, data.X()) - raw.model.theta).lpNorm<Eigen::Infinity>() < 1e-5);
  CHECK(r.sse == doctest::Approx(raw.sse).epsilon(1e-5));
}

TEST_CASE("fit spec validation") {
  FitSpec spec;
  spec.family = Family::slasso;
  spec.lambda = -1;
  CHECK_THROWS_AS(spec.validate(3), InvalidInput);
  spec.lambda = 1;
  spec.gamma = 1.5;
  CHECK_THROWS_AS(spec.validate(3), InvalidInput);
  spec.gamma = 1;
  spec.weights = Vector::Ones(2);
  CHECK_THROWS_AS(spec.validate(3), InvalidInput);
  spec.weights = Vector::Constant(3, -1.0);
  CHECK_THROWS_AS(spec.validate(3), InvalidInput);
  spec.weights.reset();
  CHECK_NOTHROW(spec.validate(3));
  CHECK(family_from_string("lasso") == Family::lasso1);
  CHECK_THROWS_AS(family_from_string("ridge"), InvalidInput);
}

TEST_CASE("fits are deterministic") {
  const Dataset data = synthetic_train(20, 3, 2);
  FitSpec spec;
  spec.family = Family::aslasso;
  spec.lambda = 0.05 * lambda_max(data);
  const auto a = fit(data, spec), b = fit(data, spec);
  CHECK(a.model.theta == b.model.theta);
  CHECK(a.model.xi.values() == b.model.xi.values());
  auto ja = to_json(a), jb = to_json(b);
  ja["solver"].erase("solve_time");
  jb["solver"].erase("solve_time");
  CHECK(ja.dump() == jb.dump());
}
