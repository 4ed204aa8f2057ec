#include <doctest.h>

#include <random>

#include "shapelasso/core_model.hpp"
#include "shapelasso/error.hpp"

using namespace shapelasso;

namespace {

Matrix random_matrix(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> N;
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = N(rng);
  return m;
}

MaxAffineModel one_d_model(Vector theta, Vector slopes, Vector anchors) {
  MaxAffineModel m;
  m.theta = std::move(theta);
  m.xi = SubgradientMatrix(Matrix(slopes));
  m.anchors = Matrix(anchors);
  return m;
}

}  // namespace

TEST_CASE("l1_lq_norm examples") {
  CHECK(l1_lq_norm(SubgradientMatrix(Matrix::Zero(3, 2)), NormOrder::linf) == 0.0);
  Matrix m(2, 2);
  m << 1, -2, 3, 0;
  CHECK(l1_lq_norm(SubgradientMatrix(m), NormOrder::linf) == doctest::Approx(5.0));
  CHECK(l1_lq_norm(SubgradientMatrix(m), NormOrder::l1) == doctest::Approx(6.0));
  CHECK(l1_lq_norm(SubgradientMatrix(Matrix::Identity(2, 2)), NormOrder::linf) == doctest::Approx(2.0));
}

TEST_CASE("l1_lq_norm rejects non-finite entries") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(SubgradientMatrix{m}, InvalidInput);
}

TEST_CASE("l1_lq_norm is a norm and ordered in q") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = random_matrix(rng, 5, 3), b = random_matrix(rng, 5, 3);
    for (auto q : {NormOrder::l1, NormOrder::l2, NormOrder::linf}) {
      const double na = l1_lq_norm(SubgradientMatrix(a), q);
      CHECK(l1_lq_norm(SubgradientMatrix(-2.5 * a), q) == doctest::Approx(2.5 * na));
      CHECK(l1_lq_norm(SubgradientMatrix(a + b), q) <= na + l1_lq_norm(SubgradientMatrix(b), q) + 1e-12);
    }
    const SubgradientMatrix s(a);
    CHECK(l1_lq_norm(s, NormOrder::linf) <= l1_lq_norm(s, NormOrder::l2) + 1e-12);
    CHECK(l1_lq_norm(s, NormOrder::l2) <= l1_lq_norm(s, NormOrder::l1) + 1e-12);
  }
}

TEST_CASE("predict examples") {
  const auto single = one_d_model(Vector::Zero(1), Vector::Ones(1), Vector::Zero(1));
  CHECK(predict(single, Vector::Constant(1, 2.0)) == doctest::Approx(2.0));

  Vector slopes(2);
  slopes << -1, 1;
  const auto vee = one_d_model(Vector::Zero(2), slopes, Vector::Zero(2));
  CHECK(predict(vee, Vector::Constant(1, 3.0)) == doctest::Approx(3.0));
  CHECK_THROWS_AS(predict(vee, Vector::Zero(2)), InvalidInput);
}

TEST_CASE("predict is convex in x") {
  std::mt19937_64 rng(3);
  MaxAffineModel m;
  m.anchors = random_matrix(rng, 8, 2);
  m.xi = SubgradientMatrix(random_matrix(rng, 8, 2));
  m.theta = random_matrix(rng, 8, 1).col(0);
  std::uniform_real_distribution<double> U;
  for (int t = 0; t < 200; ++t) {
    const Vector x = random_matrix(rng, 2, 1).col(0), x2 = random_matrix(rng, 2, 1).col(0);
    const double a = U(rng);
    CHECK(predict(m, a * x + (1 - a) * x2) <= a * predict(m, x) + (1 - a) * predict(m, x2) + 1e-10);
  }
}

TEST_CASE("support_of examples and monotonicity") {
  CHECK(support_of(SubgradientMatrix(Matrix::Zero(3, 3)), 1e-6).empty());
  Matrix m = Matrix::Zero(2, 3);
  m(0, 0) = 0.5;
  m(1, 1) = 1e-9;
  m(1, 2) = -2.0;
  CHECK(support_of(SubgradientMatrix(m), 1e-6) == ActiveSet({0, 2}));
  CHECK(support_of(SubgradientMatrix(m), std::numeric_limits<double>::infinity()).empty());
  const auto loose = support_of(SubgradientMatrix(m), 1e-12), tight = support_of(SubgradientMatrix(m), 1.0);
  for (int k : tight.indices()) CHECK(loose.contains(k));
}

TEST_CASE("Dataset invariants") {
  CHECK_THROWS_AS(Dataset(Matrix(0, 1), Vector(0)), InvalidInput);
  CHECK_THROWS_AS(Dataset(Matrix::Zero(2, 1), Vector::Zero(3)), InvalidInput);
  CHECK_THROWS_AS(Dataset(Matrix::Zero(2, 2), Vector::Zero(2), {"a", "a"}), InvalidInput);
  CHECK_THROWS_AS(Dataset(Matrix::Zero(2, 2), Vector::Zero(2), {"a"}), InvalidInput);
  Matrix X = Matrix::Zero(2, 1);
  X(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Dataset(X, Vector::Zero(2)), InvalidInput);
}

TEST_CASE("model json round trip keeps full precision") {
  std::mt19937_64 rng(11);
  MaxAffineModel m;
  m.anchors = random_matrix(rng, 4, 2);
  m.xi = SubgradientMatrix(random_matrix(rng, 4, 2));
  m.theta = random_matrix(rng, 4, 1).col(0);
  m.feature_names = {"a", "b"};
  Standardization s;
  s.x_mean = Vector::Constant(2, 0.1);
  s.x_scale = Vector::Constant(2, 3.0);
  s.y_mean = 1.0 / 3.0;
  s.y_scale = 2.0;
  m.standardization = s;
  const auto back = model_from_json(nlohmann::json::parse(to_json(m).dump()));
  CHECK(back.theta == m.theta);
  CHECK(back.xi.values() == m.xi.values());
  CHECK(back.anchors == m.anchors);
  CHECK(back.standardization->y_mean == s.y_mean);
  const Vector x = Vector::Constant(2, 0.7);
  CHECK(predict(back, x) == predict(m, x));
}
