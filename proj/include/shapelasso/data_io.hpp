#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shapelasso/core_model.hpp"

namespace shapelasso {

/// Synthetic design: X ~ N(0, Sigma) with Sigma_ij = rho^|i-j|,
/// f0(x) = sum_{k in S*} (x^k)^2, y = f0(x) + N(0, sigma^2).
struct SyntheticConfig {
  int n = 100;
  int d = 10;
  int s = 2;
  double rho = 0.3;
  double snr = 7.0;
  std::uint64_t seed = 0;
  int test_n = 1000;
  std::optional<std::vector<int>> support;  ///< fixed S* (0-based); sampled when absent
  std::optional<double> sigma;              ///< noise sd; calibrated from snr when absent

  void validate() const;
};

/// The test stream is seeded with seed ^ kTestStreamXor.
inline constexpr std::uint64_t kTestStreamXor = 0x9E3779B97F4A7C15ULL;

/// Sum of squares over the support columns.
struct TrueFunction {
  std::vector<int> support;

  double operator()(const Eigen::Ref<const Vector>& x) const;
  Vector evaluate(const Matrix& X) const;
};

struct SyntheticData {
  Dataset train;
  Dataset test;
  ActiveSet truth;
  TrueFunction f0;
  double sigma = 0.0;
  std::vector<std::string> warnings;
};

SyntheticData generate(const SyntheticConfig& config);

nlohmann::json to_json(const SyntheticConfig& c);

/// Reads a comma-separated file with a header row. Empty feature_columns means
/// every column except the response.
Dataset read_csv(const std::filesystem::path& path, const std::string& response_column,
                 const std::vector<std::string>& feature_columns = {});

/// Reads a numeric matrix of the named columns (no response); used for prediction inputs.
Matrix read_csv_matrix(const std::filesystem::path& path, const std::vector<std::string>& columns);

/// Writes response first, then the features. Feature names default to x1..xd.
void write_csv(const std::filesystem::path& path, const Dataset& data, const std::string& response_name = "y");

/// Writes data.csv-style output plus a JSON sidecar describing the synthetic draw.
void write_synthetic(const std::filesystem::path& dir, const SyntheticConfig& config, const SyntheticData& data);

/// Column means and standard deviations (n-1 denominator) of X and y.
/// Constant columns get scale 1 and are listed in constant_columns.
Standardization standardize_fit(const Dataset& data);
Dataset standardize_apply(const Standardization& s, const Dataset& data);
Matrix standardize_x(const Standardization& s, const Matrix& X);
Vector standardize_y(const Standardization& s, const Vector& y);
Vector destandardize_y(const Standardization& s, const Vector& y);

/// Formats a double with round-trip precision.
std::string format_double(double v);

}  // namespace shapelasso
