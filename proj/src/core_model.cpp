#include "shapelasso/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "shapelasso/error.hpp"

namespace shapelasso {

namespace {

bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

std::vector<double> to_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json matrix_rows(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index k = 0; k < m.cols(); ++k) r[static_cast<std::size_t>(k)] = m(i, k);
    rows.push_back(r);
  }
  return rows;
}

Matrix matrix_from_rows(const nlohmann::json& j, Eigen::Index cols_hint) {
  const auto n = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = n > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : cols_hint;
  Matrix m(n, cols);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw InvalidInput("ragged matrix in model document");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  return m;
}

}  // namespace

Dataset::Dataset(Matrix X, Vector y, std::vector<std::string> feature_names)
    : X_(std::move(X)), y_(std::move(y)), names_(std::move(feature_names)) {
  if (X_.rows() < 1 || X_.cols() < 1) throw InvalidInput("dataset needs n >= 1 and d >= 1");
  if (y_.size() != X_.rows()) throw InvalidInput("response length does not match number of rows");
  if (!all_finite(X_)) throw InvalidInput("inputs contain non-finite values");
  if (!y_.allFinite()) throw InvalidInput("response contains non-finite values");
  if (!names_.empty()) {
    if (static_cast<Eigen::Index>(names_.size()) != X_.cols())
      throw InvalidInput("feature_names must have one entry per column");
    std::set<std::string> uniq(names_.begin(), names_.end());
    if (uniq.size() != names_.size()) throw InvalidInput("feature_names must be distinct");
  }
}

Dataset Dataset::rows(const std::vector<Eigen::Index>& idx) const {
  Matrix X(static_cast<Eigen::Index>(idx.size()), d());
  Vector y(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    X.row(static_cast<Eigen::Index>(r)) = X_.row(idx[r]);
    y(static_cast<Eigen::Index>(r)) = y_(idx[r]);
  }
  return Dataset(std::move(X), std::move(y), names_);
}

SubgradientMatrix::SubgradientMatrix(Matrix values) : values_(std::move(values)) {
  if (!all_finite(values_)) throw InvalidInput("subgradient matrix contains non-finite values");
}

ActiveSet::ActiveSet(std::vector<int> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  if (!indices_.empty() && indices_.front() < 0) throw InvalidInput("active set indices must be >= 0");
}

bool ActiveSet::contains(int k) const { return std::binary_search(indices_.begin(), indices_.end(), k); }

double l1_lq_norm(const SubgradientMatrix& m, NormOrder q) {
  const Matrix& v = m.values();
  double total = 0.0;
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    switch (q) {
      case NormOrder::l1: total += v.col(k).lpNorm<1>(); break;
      case NormOrder::l2: total += v.col(k).norm(); break;
      case NormOrder::linf: total += v.rows() ? v.col(k).lpNorm<Eigen::Infinity>() : 0.0; break;
    }
  }
  return total;
}

double predict(const MaxAffineModel& model, const Eigen::Ref<const Vector>& x) {
  if (x.size() != model.d()) throw InvalidInput("prediction input has wrong dimension");
  if (!x.allFinite()) throw InvalidInput("prediction input contains non-finite values");
  Vector u = x;
  if (model.standardization) {
    const auto& s = *model.standardization;
    u = (x - s.x_mean).cwiseQuotient(s.x_scale);
  }
  const Matrix& xi = model.xi.values();
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < model.n(); ++i) {
    const double v = model.theta(i) + xi.row(i).dot(u.transpose() - model.anchors.row(i));
    best = std::max(best, v);
  }
  if (model.standardization) best = model.standardization->y_mean + model.standardization->y_scale * best;
  return best;
}

Vector predict_rows(const MaxAffineModel& model, const Matrix& X) {
  if (X.cols() != model.d() && X.rows() > 0) throw InvalidInput("prediction input has wrong dimension");
  Vector out(X.rows());
  for (Eigen::Index r = 0; r < X.rows(); ++r) out(r) = predict(model, X.row(r).transpose());
  return out;
}

ActiveSet support_of(const SubgradientMatrix& m, double tau) {
  if (!(tau >= 0.0)) throw InvalidInput("zero threshold must be nonnegative");
  std::vector<int> idx;
  const Matrix& v = m.values();
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    if (v.rows() > 0 && v.col(k).cwiseAbs().maxCoeff() > tau) idx.push_back(static_cast<int>(k));
  }
  return ActiveSet(std::move(idx));
}

double default_zero_tau(const SubgradientMatrix& m) { return 1e-6 * std::max(1.0, m.max_abs()); }

double max_convexity_violation(const MaxAffineModel& model) {
  const Matrix& xi = model.xi.values();
  const Matrix& X = model.anchors;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < model.n(); ++i) {
    const Vector slopes = X * xi.row(i).transpose();
    const double at_i = slopes(i);
    for (Eigen::Index j = 0; j < model.n(); ++j) {
      worst = std::max(worst, model.theta(i) + slopes(j) - at_i - model.theta(j));
    }
  }
  return worst;
}

nlohmann::json to_json(const Standardization& s) {
  return {{"x_mean", to_vec(s.x_mean)},
          {"x_scale", to_vec(s.x_scale)},
          {"y_mean", s.y_mean},
          {"y_scale", s.y_scale},
          {"constant_columns", s.constant_columns}};
}

Standardization standardization_from_json(const nlohmann::json& j) {
  Standardization s;
  s.x_mean = from_vec(j.at("x_mean").get<std::vector<double>>());
  s.x_scale = from_vec(j.at("x_scale").get<std::vector<double>>());
  s.y_mean = j.at("y_mean").get<double>();
  s.y_scale = j.at("y_scale").get<double>();
  if (j.contains("constant_columns")) s.constant_columns = j.at("constant_columns").get<std::vector<int>>();
  if (s.x_mean.size() != s.x_scale.size()) throw InvalidInput("standardization vectors differ in length");
  if ((s.x_scale.array() <= 0.0).any() || !(s.y_scale > 0.0)) throw InvalidInput("standardization scales must be > 0");
  return s;
}

nlohmann::json to_json(const MaxAffineModel& model) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["kind"] = "max_affine_model";
  j["n"] = model.n();
  j["d"] = model.d();
  j["theta"] = to_vec(model.theta);
  j["xi"] = matrix_rows(model.xi.values());
  j["anchors"] = matrix_rows(model.anchors);
  j["feature_names"] = model.feature_names;
  j["standardization"] = model.standardization ? to_json(*model.standardization) : nlohmann::json(nullptr);
  return j;
}

MaxAffineModel model_from_json(const nlohmann::json& j) {
  try {
    MaxAffineModel m;
    const auto d = j.at("d").get<Eigen::Index>();
    m.theta = from_vec(j.at("theta").get<std::vector<double>>());
    m.xi = SubgradientMatrix(matrix_from_rows(j.at("xi"), d));
    m.anchors = matrix_from_rows(j.at("anchors"), d);
    if (j.contains("feature_names")) m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (j.contains("standardization") && !j.at("standardization").is_null())
      m.standardization = standardization_from_json(j.at("standardization"));
    if (m.xi.rows() != m.n() || m.anchors.rows() != m.n() || m.xi.cols() != d || m.anchors.cols() != d)
      throw InvalidInput("model document has inconsistent dimensions");
    if (m.standardization && m.standardization->x_mean.size() != d)
      throw InvalidInput("standardization does not match model dimension");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace shapelasso
