#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace shapelasso {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// n observations of d inputs with a scalar response. Rows of X are the x_i.
class Dataset {
 public:
  Dataset(Matrix X, Vector y, std::vector<std::string> feature_names = {});

  const Matrix& X() const { return X_; }
  const Vector& y() const { return y_; }
  const std::vector<std::string>& feature_names() const { return names_; }
  Eigen::Index n() const { return X_.rows(); }
  Eigen::Index d() const { return X_.cols(); }

  /// Subset of rows, in the order given.
  Dataset rows(const std::vector<Eigen::Index>& idx) const;

 private:
  Matrix X_;
  Vector y_;
  std::vector<std::string> names_;
};

/// The n x d matrix of fitted subgradients; entry (i, k) is the slope of
/// hyperplane i along input k.
class SubgradientMatrix {
 public:
  SubgradientMatrix() = default;
  explicit SubgradientMatrix(Matrix values);

  const Matrix& values() const { return values_; }
  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  double max_abs() const { return values_.size() == 0 ? 0.0 : values_.cwiseAbs().maxCoeff(); }

 private:
  Matrix values_;
};

/// Sorted, 0-based indices of input variables whose subgradient column is nonzero.
class ActiveSet {
 public:
  ActiveSet() = default;
  explicit ActiveSet(std::vector<int> indices);

  const std::vector<int>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(int k) const;
  bool operator==(const ActiveSet&) const = default;

 private:
  std::vector<int> indices_;
};

/// Per-column z-score record. Models fitted on standardized data keep one so
/// that predictions come back in original units.
struct Standardization {
  Vector x_mean;
  Vector x_scale;
  double y_mean = 0.0;
  double y_scale = 1.0;
  std::vector<int> constant_columns;
};

/// Fitted max-affine function f(x) = max_i { theta_i + xi_i^T (x - x_i) }.
struct MaxAffineModel {
  Vector theta;
  SubgradientMatrix xi;
  Matrix anchors;
  std::optional<Standardization> standardization;
  std::vector<std::string> feature_names;

  Eigen::Index n() const { return theta.size(); }
  Eigen::Index d() const { return anchors.cols(); }
};

enum class NormOrder { l1, l2, linf };

/// Sum over columns of the l_q norm of each column.
double l1_lq_norm(const SubgradientMatrix& m, NormOrder q);

/// Evaluates the model at x (original units when the model carries a standardization).
double predict(const MaxAffineModel& model, const Eigen::Ref<const Vector>& x);

/// Row-wise predict over a matrix of inputs.
Vector predict_rows(const MaxAffineModel& model, const Matrix& X);

/// Columns whose largest absolute entry exceeds tau.
ActiveSet support_of(const SubgradientMatrix& m, double tau);

/// Scale-relative zero threshold: 1e-6 * max(1, max |xi|).
double default_zero_tau(const SubgradientMatrix& m);

/// Largest violation of theta_i + xi_i^T (x_j - x_i) <= theta_j over all pairs
/// (computed in the model's internal coordinates).
double max_convexity_violation(const MaxAffineModel& model);

nlohmann::json to_json(const Standardization& s);
Standardization standardization_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MaxAffineModel& model);
MaxAffineModel model_from_json(const nlohmann::json& j);

}  // namespace shapelasso
