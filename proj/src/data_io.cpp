#include "shapelasso/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "shapelasso/error.hpp"

namespace shapelasso {

void SyntheticConfig::validate() const {
  if (n < 1) throw InvalidInput("n must be >= 1");
  if (d < 1) throw InvalidInput("d must be >= 1");
  if (s < 1 || s > d) throw InvalidInput("s must satisfy 1 <= s <= d");
  if (!(rho >= 0.0 && rho < 1.0)) throw InvalidInput("rho must lie in [0, 1)");
  if (!(snr > 0.0)) throw InvalidInput("snr must be positive");
  if (test_n < 0) throw InvalidInput("test_n must be >= 0");
  if (sigma && !(*sigma >= 0.0 && std::isfinite(*sigma))) throw InvalidInput("sigma must be finite and >= 0");
  if (support) {
    if (static_cast<int>(support->size()) != s) throw InvalidInput("fixed support must have exactly s entries");
    std::vector<int> sorted = *support;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw InvalidInput("fixed support has duplicate entries");
    for (int k : sorted)
      if (k < 0 || k >= d) throw InvalidInput("fixed support index out of range");
  }
}

double TrueFunction::operator()(const Eigen::Ref<const Vector>& x) const {
  double v = 0.0;
  for (int k : support) v += x(k) * x(k);
  return v;
}

Vector TrueFunction::evaluate(const Matrix& X) const {
  Vector out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = (*this)(X.row(i).transpose());
  return out;
}

namespace {

Matrix draw_design(std::mt19937_64& rng, const Matrix& L, int rows) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = L.rows();
  Matrix Z(rows, d);
  for (int i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < d; ++k) Z(i, k) = normal(rng);
  return Z * L.transpose();
}

Vector draw_noise(std::mt19937_64& rng, double sigma, int rows) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector e(rows);
  for (int i = 0; i < rows; ++i) e(i) = sigma * normal(rng);
  return e;
}

double sample_variance(const Vector& v) {
  if (v.size() < 2) return 0.0;
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
}

std::vector<std::string> default_names(Eigen::Index d) {
  std::vector<std::string> names;
  for (Eigen::Index k = 0; k < d; ++k) names.push_back("x" + std::to_string(k + 1));
  return names;
}

}  // namespace

SyntheticData generate(const SyntheticConfig& config) {
  config.validate();
  const int d = config.d;
  std::vector<std::string> warnings;

  Matrix Sigma(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) Sigma(i, j) = std::pow(config.rho, std::abs(i - j));
  Eigen::LLT<Matrix> llt(Sigma);
  if (llt.info() != Eigen::Success) {
    Sigma.diagonal().array() += 1e-10;
    llt.compute(Sigma);
    warnings.push_back("covariance matrix was not numerically positive definite; diagonal jittered by 1e-10");
    if (llt.info() != Eigen::Success) throw InvalidInput("covariance matrix is not positive definite");
  }
  const Matrix L = llt.matrixL();

  std::mt19937_64 train_rng(config.seed);
  std::mt19937_64 test_rng(config.seed ^ kTestStreamXor);

  std::vector<int> support;
  if (config.support) {
    support = *config.support;
  } else {
    std::vector<int> all(static_cast<std::size_t>(d));
    std::iota(all.begin(), all.end(), 0);
    // Partial Fisher-Yates with explicit index draws keeps the result independent of std::shuffle.
    for (int k = 0; k < config.s; ++k) {
      std::uniform_int_distribution<int> pick(k, d - 1);
      std::swap(all[static_cast<std::size_t>(k)], all[static_cast<std::size_t>(pick(train_rng))]);
    }
    support.assign(all.begin(), all.begin() + config.s);
  }
  std::sort(support.begin(), support.end());
  TrueFunction f0{support};

  const Matrix X = draw_design(train_rng, L, config.n);
  const Vector f_train = f0.evaluate(X);
  const double sigma = config.sigma ? *config.sigma : std::sqrt(sample_variance(f_train) / config.snr);
  const Vector y = f_train + draw_noise(train_rng, sigma, config.n);

  const Matrix Xt = draw_design(test_rng, L, config.test_n);
  const Vector yt = f0.evaluate(Xt) + draw_noise(test_rng, sigma, config.test_n);

  const auto names = default_names(d);
  Dataset train(X, y, names);
  // Dataset requires n >= 1; an empty test request reuses the training design.
  Dataset test = config.test_n > 0 ? Dataset(Xt, yt, names) : train;
  if (config.test_n == 0) warnings.push_back("test_n = 0: test set mirrors the training set");
  SyntheticData out{std::move(train), std::move(test), ActiveSet(support), f0, sigma, warnings};
  return out;
}

nlohmann::json to_json(const SyntheticConfig& c) {
  nlohmann::json j{{"n", c.n}, {"d", c.d}, {"s", c.s}, {"rho", c.rho}, {"snr", c.snr}, {"seed", c.seed},
                   {"test_n", c.test_n}};
  j["support"] = c.support ? nlohmann::json(*c.support) : nlohmann::json(nullptr);
  if (c.sigma) j["sigma"] = *c.sigma;
  return j;
}

// ---- CSV --------------------------------------------------------------------

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

CsvTable read_table(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open CSV file '" + path.string() + "'");
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split_line(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw InvalidInput(path.string() + ":" + std::to_string(line_no) + ": expected " +
                         std::to_string(t.header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(line_no);
  }
  if (!have_header) throw InvalidInput("CSV file '" + path.string() + "' has no header row");
  return t;
}

std::size_t column_index(const CsvTable& t, const std::string& name, const std::filesystem::path& path) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) throw InvalidInput("column '" + name + "' not found in " + path.string());
  return static_cast<std::size_t>(it - t.header.begin());
}

double parse_cell(const std::string& cell, const std::string& column, std::size_t line_no,
                  const std::filesystem::path& path) {
  const std::string where = path.string() + ":" + std::to_string(line_no);
  if (cell.empty()) throw InvalidInput(where + ": missing value in column '" + column + "'");
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw InvalidInput(where + ": non-numeric value '" + cell + "' in column '" + column + "'");
  return v;
}

Matrix extract(const CsvTable& t, const std::vector<std::size_t>& cols, const std::filesystem::path& path) {
  Matrix M(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t k = 0; k < cols.size(); ++k)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          parse_cell(t.rows[i][cols[k]], t.header[cols[k]], t.line_numbers[i], path);
  return M;
}

}  // namespace

Dataset read_csv(const std::filesystem::path& path, const std::string& response_column,
                 const std::vector<std::string>& feature_columns) {
  const CsvTable t = read_table(path);
  const std::size_t resp = column_index(t, response_column, path);
  std::vector<std::size_t> feats;
  std::vector<std::string> names;
  if (feature_columns.empty()) {
    for (std::size_t k = 0; k < t.header.size(); ++k) {
      if (k == resp) continue;
      feats.push_back(k);
      names.push_back(t.header[k]);
    }
  } else {
    for (const auto& name : feature_columns) {
      if (name == response_column) throw InvalidInput("response column '" + name + "' also listed as a feature");
      feats.push_back(column_index(t, name, path));
      names.push_back(name);
    }
  }
  if (feats.empty()) throw InvalidInput("no feature columns in " + path.string());
  if (t.rows.empty()) throw InvalidInput("CSV file '" + path.string() + "' has no data rows");
  const Matrix X = extract(t, feats, path);
  const Matrix Y = extract(t, {resp}, path);
  return Dataset(X, Y.col(0), names);
}

Matrix read_csv_matrix(const std::filesystem::path& path, const std::vector<std::string>& columns) {
  const CsvTable t = read_table(path);
  std::vector<std::size_t> cols;
  for (const auto& name : columns) cols.push_back(column_index(t, name, path));
  return extract(t, cols, path);
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_csv(const std::filesystem::path& path, const Dataset& data, const std::string& response_name) {
  std::ofstream os(path);
  if (!os) throw InvalidInput("cannot write '" + path.string() + "'");
  const auto names = data.feature_names().empty() ? default_names(data.d()) : data.feature_names();
  os << response_name;
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    os << format_double(data.y()(i));
    for (Eigen::Index k = 0; k < data.d(); ++k) os << ',' << format_double(data.X()(i, k));
    os << '\n';
  }
}

void write_synthetic(const std::filesystem::path& dir, const SyntheticConfig& config, const SyntheticData& data) {
  std::filesystem::create_directories(dir);
  write_csv(dir / "train.csv", data.train);
  write_csv(dir / "test.csv", data.test);
  nlohmann::json j;
  j["schema_version"] = 1;
  j["config"] = to_json(config);
  j["support"] = data.truth.indices();
  j["sigma"] = data.sigma;
  j["f0"] = "sum of squares over support columns";
  j["warnings"] = data.warnings;
  std::ofstream os(dir / "synthetic.json");
  os << j.dump(2) << '\n';
}

// ---- standardization ---------------------------------------------------------

Standardization standardize_fit(const Dataset& data) {
  Standardization s;
  const auto n = data.n();
  s.x_mean = data.X().colwise().mean().transpose();
  s.x_scale = Vector::Ones(data.d());
  for (Eigen::Index k = 0; k < data.d(); ++k) {
    double sd = 0.0;
    if (n > 1) sd = std::sqrt((data.X().col(k).array() - s.x_mean(k)).square().sum() / static_cast<double>(n - 1));
    if (sd > 1e-12 * std::max(1.0, std::abs(s.x_mean(k)))) s.x_scale(k) = sd;
    else s.constant_columns.push_back(static_cast<int>(k));
  }
  s.y_mean = data.y().mean();
  double sd = 0.0;
  if (n > 1) sd = std::sqrt((data.y().array() - s.y_mean).square().sum() / static_cast<double>(n - 1));
  s.y_scale = sd > 1e-12 * std::max(1.0, std::abs(s.y_mean)) ? sd : 1.0;
  return s;
}

Matrix standardize_x(const Standardization& s, const Matrix& X) {
  if (X.cols() != s.x_mean.size()) throw InvalidInput("standardize: column count mismatch");
  return (X.rowwise() - s.x_mean.transpose()).array().rowwise() / s.x_scale.transpose().array();
}

Vector standardize_y(const Standardization& s, const Vector& y) { return (y.array() - s.y_mean) / s.y_scale; }

Vector destandardize_y(const Standardization& s, const Vector& y) { return (y.array() * s.y_scale) + s.y_mean; }

Dataset standardize_apply(const Standardization& s, const Dataset& data) {
  return Dataset(standardize_x(s, data.X()), standardize_y(s, data.y()), data.feature_names());
}

}  // namespace shapelasso
