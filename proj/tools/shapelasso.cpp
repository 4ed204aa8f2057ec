// shapelasso command-line front end: fit, cv, simulate, predict, generate.
//
// Exit codes: 0 success, 2 invalid arguments or input, 3 solver failure,
// 1 anything else (I/O errors).

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "shapelasso/data_io.hpp"
#include "shapelasso/error.hpp"
#include "shapelasso/estimators.hpp"
#include "shapelasso/model_selection.hpp"
#include "shapelasso/simulation.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace shapelasso;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitSolver = 3;

// Raised for argument combinations CLI11 cannot express; reported with usage.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("cannot open '" + path.string() + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (is) {
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (is.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(is.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  os << j.dump(2) << '\n';
}

template <class F>
void write_text(const fs::path& path, F&& body) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  body(os);
}

json number_or_inf(double v) { return std::isfinite(v) ? json(v) : json("inf"); }

// ---- shared option groups ---------------------------------------------------

struct DataArgs {
  std::string path;
  std::string response = "y";
  std::vector<std::string> features;

  void add(CLI::App* app) {
    app->add_option("--data", path, "Input CSV with a header row")->required()->check(CLI::ExistingFile);
    app->add_option("--response", response, "Response column name")->capture_default_str();
    app->add_option("--features", features, "Comma-separated feature columns (default: all but the response)")
        ->delimiter(',');
  }
  Dataset load() const { return read_csv(path, response, features); }
  json to_json() const { return {{"data", path}, {"response", response}, {"features", features}}; }
};

struct SpecArgs {
  std::string family = "cnls";
  std::optional<double> lambda;
  double gamma = 1.0;
  std::optional<double> c_bound;
  bool monotone = false;
  std::string weights_init = "cnls";
  bool standardize = false;
  std::string backend;
  double tol_feas = 1e-6;
  double tol_kkt = 1e-6;

  void add(CLI::App* app, bool tuning_values) {
    app->add_option("--family", family, "cnls, lasso1, lasso2, slasso, aslasso, relaxed_slasso, relaxed_aslasso")
        ->capture_default_str();
    if (tuning_values) {
      app->add_option("--lambda", lambda, "Penalty level");
      app->add_option("--gamma", gamma, "Relaxation weight in [0, 1]")->capture_default_str();
      app->add_option("--c-bound", c_bound, "Row l1 bound for lasso2");
    }
    app->add_flag("--monotone", monotone, "Also require nondecreasing fits (xi >= 0)");
    app->add_option("--weights-init", weights_init, "Initial estimator for adaptive weights: cnls or slasso")
        ->capture_default_str();
    app->add_flag("--standardize", standardize, "z-score inputs and response before fitting");
    app->add_option("--backend", backend, "QP backend: builtin (ipm), admm or external; default from SHAPELASSO_BACKEND");
    app->add_option("--tol-feas", tol_feas, "Primal feasibility tolerance")->capture_default_str();
    app->add_option("--tol-kkt", tol_kkt, "Stationarity tolerance")->capture_default_str();
  }

  FitSpec spec() const {
    FitSpec s;
    s.family = family_from_string(family);
    if (lambda) s.lambda = *lambda;
    s.gamma = gamma;
    if (c_bound) s.c_bound = *c_bound;
    s.monotone = monotone;
    s.weights_init = weights_init_from_string(weights_init);
    s.standardize = standardize;
    s.solver.backend = backend.empty() ? default_backend() : backend_from_string(backend);
    s.solver.tol.eps_feas = tol_feas;
    s.solver.tol.eps_kkt = tol_kkt;
    return s;
  }

  json to_json(const FitSpec& s) const {
    return {{"family", shapelasso::to_string(s.family)},
            {"lambda", s.lambda},
            {"gamma", s.gamma},
            {"c_bound", number_or_inf(s.c_bound)},
            {"monotone", s.monotone},
            {"weights_init", shapelasso::to_string(s.weights_init)},
            {"standardize", s.standardize},
            {"backend", shapelasso::to_string(s.solver.backend)},
            {"tol_feas", s.solver.tol.eps_feas},
            {"tol_kkt", s.solver.tol.eps_kkt}};
  }
};

struct GridArgs {
  int lambdas = 50;
  int gammas = 11;
  double min_frac = 1e-3;
  std::vector<double> lambda_list;
  std::vector<double> gamma_list;

  void add(CLI::App* app) {
    app->add_option("--grid-lambdas", lambdas, "Number of log-spaced lambda values")->capture_default_str()->check(
        CLI::PositiveNumber);
    app->add_option("--grid-gammas", gammas, "Number of gamma values (relaxed families)")->capture_default_str()->check(
        CLI::PositiveNumber);
    app->add_option("--lambda-min-frac", min_frac, "Smallest lambda as a fraction of lambda_max")
        ->capture_default_str();
    app->add_option("--lambdas", lambda_list, "Explicit comma-separated lambda grid (bounds c for lasso2)")
        ->delimiter(',');
    app->add_option("--gammas", gamma_list, "Explicit comma-separated gamma grid")->delimiter(',');
  }

  GridOptions options() const { return {lambdas, gammas, min_frac}; }
};

struct Manifest {
  std::string command;
  std::string started = utc_now();
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  json config = json::object();
  json seeds = json::object();
  json inputs = json::array();
  json timing = json::object();

  void input(const fs::path& p) { inputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}}); }

  void write(const fs::path& dir) {
    timing["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json j;
    j["schema_version"] = 1;
    j["command"] = command;
    j["version"] = SHAPELASSO_VERSION;
    j["config"] = config;
    j["seeds"] = seeds;
    j["inputs"] = inputs;
    j["started_at"] = started;
    j["finished_at"] = utc_now();
    j["timing"] = timing;
    write_json(dir / "manifest.json", j);
  }
};

std::vector<std::string> names_of(const ActiveSet& s, const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (int k : s.indices())
    out.push_back(static_cast<std::size_t>(k) < names.size() ? names[static_cast<std::size_t>(k)]
                                                             : "x" + std::to_string(k + 1));
  return out;
}

// solve_time varies run to run, so it goes to the manifest instead of the summary.
json summary_json(const FitResult& r, Manifest& m) {
  json j = to_json(r);
  m.timing["solve_seconds"] = r.solver.solve_time;
  j["solver"].erase("solve_time");
  j["n"] = r.model.n();
  j["d"] = r.model.d();
  j["active_features"] = names_of(r.active_set, r.model.feature_names);
  return j;
}

std::vector<int> zero_based(const std::vector<int>& one_based, const char* flag) {
  std::vector<int> out;
  for (int k : one_based) {
    if (k < 1) throw InvalidInput(std::string(flag) + " takes 1-based column numbers");
    out.push_back(k - 1);
  }
  return out;
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

// ---- fit ----------------------------------------------------------------------

struct FitCmd {
  DataArgs data;
  SpecArgs spec;
  std::string out_dir = ".";
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    data.add(app);
    spec.add(app, true);
    app->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    app->add_option("--seed", seed, "Recorded in the manifest; fitting is deterministic")->capture_default_str();
  }

  int run() {
    Manifest m{"fit"};
    FitSpec s = spec.spec();
    const bool needs_lambda = s.family != Family::cnls && s.family != Family::lasso2;
    if (needs_lambda && !spec.lambda) throw UsageError("--lambda is required for --family " + spec.family);
    if (s.family == Family::lasso2 && !spec.c_bound) throw UsageError("--c-bound is required for --family lasso2");

    const Dataset d = data.load();
    m.input(data.path);
    const FitResult r = fit(d, s);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';

    const fs::path out = prepare_out_dir(out_dir);
    write_json(out / "model.json", to_json(r.model));
    write_json(out / "summary.json", summary_json(r, m));
    m.config = data.to_json();
    m.config["spec"] = spec.to_json(s);
    m.config["out_dir"] = out_dir;
    m.seeds["seed"] = seed;
    m.write(out);
    std::cout << spec.family << ": sse=" << format_double(r.sse) << " nonzeros=" << r.active_set.size() << '\n';
    return 0;
  }
};

// ---- cv -------------------------------------------------------------------------

struct CvCmd {
  DataArgs data;
  SpecArgs spec;
  GridArgs grid;
  int folds = 5;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out_dir = ".";

  void add(CLI::App* app) {
    data.add(app);
    spec.add(app, false);
    grid.add(app);
    app->add_option("--folds", folds, "Number of CV folds")->capture_default_str();
    app->add_option("--seed", seed, "Fold assignment seed")->capture_default_str();
    app->add_option("--jobs", jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  }

  int run() {
    Manifest m{"cv"};
    const FitSpec s = spec.spec();
    const Dataset d = data.load();
    m.input(data.path);

    TuningGrid g = default_grid(d, s, grid.options());
    if (!grid.lambda_list.empty()) g.lambdas = grid.lambda_list;
    if (!grid.gamma_list.empty()) {
      if (!is_relaxed(s.family)) throw UsageError("--gammas applies to relaxed families only");
      g.gammas = grid.gamma_list;
    }

    const CvReport r = k_fold_cv(d, s, g, {folds, seed, jobs});
    for (const auto& w : r.refit.warnings) std::cerr << "warning: " << w << '\n';

    const fs::path out = prepare_out_dir(out_dir);
    write_text(out / "cv_report.csv", [&](std::ostream& os) { write_cv_report_csv(os, r); });
    write_text(out / "cv_folds.csv", [&](std::ostream& os) { write_cv_folds_csv(os, r); });
    json report = to_json(r);
    report["refit"] = summary_json(r.refit, m);
    write_json(out / "cv_report.json", report);
    write_json(out / "model.json", to_json(r.refit.model));
    write_json(out / "summary.json", report["refit"]);

    m.config = data.to_json();
    m.config["spec"] = spec.to_json(s);
    m.config["grid"] = {{"lambdas", g.lambdas}, {"gammas", g.gammas}};
    m.config["folds"] = folds;
    m.config["jobs"] = jobs;
    m.config["out_dir"] = out_dir;
    m.seeds["seed"] = seed;
    m.write(out);
    std::cout << spec.family << ": " << r.cells.size() << " cells, lambda*=" << format_double(r.lambda_star);
    if (is_relaxed(s.family)) std::cout << " gamma*=" << format_double(r.gamma_star);
    std::cout << " nonzeros=" << r.refit.active_set.size() << '\n';
    return 0;
  }
};

// ---- simulate -------------------------------------------------------------------

struct SimulateCmd {
  SpecArgs spec;
  GridArgs grid;
  std::vector<int> n{100}, d{10}, s{2};
  std::vector<double> rho{0.3}, snr{7.0};
  std::vector<std::string> families{"lasso1", "slasso", "aslasso"};
  std::vector<int> support;
  int replications = 1;
  int test_n = 1000;
  std::string tuning = "kfold";
  int folds = 5;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out_dir = ".";
  bool sweep = false;
  bool sweep_total_loss = false;

  void add(CLI::App* app) {
    spec.add(app, false);
    grid.add(app);
    app->add_option("--n", n, "Sample sizes")->delimiter(',')->capture_default_str();
    app->add_option("--d", d, "Input dimensions")->delimiter(',')->capture_default_str();
    app->add_option("--s", s, "Support sizes")->delimiter(',')->capture_default_str();
    app->add_option("--rho", rho, "Design correlations")->delimiter(',')->capture_default_str();
    app->add_option("--snr", snr, "Signal-to-noise ratios")->delimiter(',')->capture_default_str();
    app->add_option("--families", families, "Families to compare")->delimiter(',')->capture_default_str();
    app->add_option("--support", support, "Fixed support, 1-based column numbers (default: sampled)")
        ->delimiter(',');
    app->add_option("--replications", replications, "Replications per setting")->capture_default_str()->check(
        CLI::PositiveNumber);
    app->add_option("--test-n", test_n, "Test sample size")->capture_default_str();
    app->add_option("--tuning", tuning, "kfold, holdout or oracle")->capture_default_str();
    app->add_option("--folds", folds, "Number of CV folds")->capture_default_str();
    app->add_option("--seed", seed, "Base seed; replication r uses seed + r")->capture_default_str();
    app->add_option("--jobs", jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    app->add_flag("--sweep-relaxed", sweep, "Fixed lambda x gamma surface for a relaxed family instead of CV");
    app->add_flag("--sweep-total-loss", sweep_total_loss,
                  "Sweep lambdas apply to the summed loss as given (default: scaled by n)");
  }

  SyntheticConfig first_setting() const {
    SyntheticConfig c;
    c.n = n.at(0);
    c.d = d.at(0);
    c.s = s.at(0);
    c.rho = rho.at(0);
    c.snr = snr.at(0);
    c.seed = seed;
    c.test_n = test_n;
    if (!support.empty()) c.support = zero_based(support, "--support");
    return c;
  }

  int run_sweep(Manifest& m, const fs::path& out) {
    SweepConfig c;
    c.data = first_setting();
    c.base = spec.spec();
    if (spec.family == "cnls") c.base.family = Family::relaxed_slasso;
    c.lambdas = grid.lambda_list;
    c.gammas = grid.gamma_list;
    c.per_observation = !sweep_total_loss;
    c.replications = replications;
    c.jobs = jobs;
    const auto cells = sweep_relaxed(c);
    write_text(out / "sweep_relaxed.csv", [&](std::ostream& os) { write_sweep_csv(os, cells); });
    m.config["sweep"] = {{"family", to_string(c.base.family)},
                         {"setting", to_json(c.data)},
                         {"lambdas", c.lambdas},
                         {"gammas", c.gammas},
                         {"per_observation", c.per_observation},
                         {"replications", replications}};
    std::cout << "sweep: " << cells.size() << " cells\n";
    return 0;
  }

  int run() {
    Manifest m{"simulate"};
    const fs::path out = prepare_out_dir(out_dir);
    m.config["out_dir"] = out_dir;
    m.config["jobs"] = jobs;
    m.seeds["seed"] = seed;
    m.seeds["replication_seeds"] = "seed + r";
    m.seeds["test_stream"] = "seed xor 0x9E3779B97F4A7C15";
    if (sweep) {
      run_sweep(m, out);
      m.write(out);
      return 0;
    }

    SimulationConfig c;
    c.n = n;
    c.d = d;
    c.s = s;
    c.rho = rho;
    c.snr = snr;
    c.families.clear();
    for (const auto& f : families) c.families.push_back(family_from_string(f));
    c.replications = replications;
    c.seed = seed;
    c.test_n = test_n;
    if (!support.empty()) c.support = zero_based(support, "--support");
    c.tuning = tuning_from_string(tuning);
    c.folds = folds;
    c.grid = grid.options();
    if (!grid.lambda_list.empty()) {
      c.fixed_grid = TuningGrid{grid.lambda_list, grid.gamma_list.empty() ? std::vector<double>{1.0} : grid.gamma_list};
    } else if (!grid.gamma_list.empty()) {
      throw UsageError("--gammas for simulate requires --lambdas");
    }
    c.base = spec.spec();
    c.jobs = jobs;

    const auto results = run_simulation(c, [](const ReplicationResult& r) {
      std::cerr << to_string(r.family) << " rep " << r.replication << " snr " << r.snr << ": "
                << (r.ok ? "ok" : "failed: " + r.error) << '\n';
    });
    const auto rows = aggregate(results);
    write_text(out / "mc_results.csv", [&](std::ostream& os) { write_mc_results_csv(os, results); });
    write_text(out / "mc_summary.csv", [&](std::ostream& os) { write_aggregate_csv(os, rows); });
    write_figures_data(out / "figures_data", rows);

    double total = 0.0;
    for (const auto& r : results) total += r.seconds;
    m.timing["replication_seconds_total"] = total;
    m.config["settings"] = {{"n", n}, {"d", d}, {"s", s}, {"rho", rho}, {"snr", snr}};
    m.config["families"] = families;
    m.config["support"] = support;
    m.config["replications"] = replications;
    m.config["test_n"] = test_n;
    m.config["tuning"] = tuning;
    m.config["folds"] = folds;
    m.config["grid"] = {{"lambdas", grid.lambdas},
                        {"gammas", grid.gammas},
                        {"lambda_min_frac", grid.min_frac},
                        {"fixed_lambdas", grid.lambda_list},
                        {"fixed_gammas", grid.gamma_list}};
    m.config["spec"] = spec.to_json(c.base);
    m.write(out);

    for (const auto& row : rows)
      std::cout << to_string(row.family) << " snr=" << row.snr << " n=" << row.count << " pe=" << row.prediction_error
                << " nz=" << row.nonzeros << " f=" << row.f_score << '\n';
    return 0;
  }
};

// ---- predict ----------------------------------------------------------------------

struct PredictCmd {
  std::string model_path;
  std::string data_path;
  std::string out_dir = ".";

  void add(CLI::App* app) {
    app->add_option("--model", model_path, "model.json from fit or cv")->required()->check(CLI::ExistingFile);
    app->add_option("--data", data_path, "CSV holding the model's feature columns")->required()->check(
        CLI::ExistingFile);
    app->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  }

  int run() {
    Manifest m{"predict"};
    json j;
    {
      std::ifstream is(model_path);
      try {
        j = json::parse(is);
      } catch (const json::exception& e) {
        throw InvalidInput("cannot parse '" + model_path + "': " + e.what());
      }
    }
    const MaxAffineModel model = model_from_json(j);
    m.input(model_path);
    m.input(data_path);

    std::vector<std::string> columns = model.feature_names;
    if (columns.empty())
      for (Eigen::Index k = 0; k < model.d(); ++k) columns.push_back("x" + std::to_string(k + 1));

    Vector pred;
    if (fs::file_size(data_path) == 0) {
      pred.resize(0);
    } else {
      const Matrix X = read_csv_matrix(data_path, columns);
      if (X.cols() != model.d()) throw InvalidInput("input has " + std::to_string(X.cols()) + " columns, model expects " +
                                                    std::to_string(model.d()));
      pred = predict_rows(model, X);
    }

    const fs::path out = prepare_out_dir(out_dir);
    write_text(out / "predictions.csv", [&](std::ostream& os) {
      os << "prediction\n";
      for (Eigen::Index i = 0; i < pred.size(); ++i) os << format_double(pred(i)) << '\n';
    });
    m.config = {{"model", model_path}, {"data", data_path}, {"columns", columns}, {"out_dir", out_dir}};
    m.write(out);
    std::cout << pred.size() << " predictions\n";
    return 0;
  }
};

// ---- generate -----------------------------------------------------------------------

struct GenerateCmd {
  SyntheticConfig c;
  std::vector<int> support;
  std::optional<double> sigma;
  std::string out_dir = ".";

  void add(CLI::App* app) {
    app->add_option("--n", c.n, "Training sample size")->capture_default_str();
    app->add_option("--d", c.d, "Input dimension")->capture_default_str();
    app->add_option("--s", c.s, "Support size")->capture_default_str();
    app->add_option("--rho", c.rho, "Design correlation")->capture_default_str();
    app->add_option("--snr", c.snr, "Signal-to-noise ratio")->capture_default_str();
    app->add_option("--sigma", sigma, "Noise sd (overrides --snr)");
    app->add_option("--seed", c.seed, "Seed")->capture_default_str();
    app->add_option("--test-n", c.test_n, "Test sample size")->capture_default_str();
    app->add_option("--support", support, "Fixed support, 1-based column numbers")->delimiter(',');
    app->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  }

  int run() {
    Manifest m{"generate"};
    if (!support.empty()) c.support = zero_based(support, "--support");
    c.sigma = sigma;
    const SyntheticData data = generate(c);
    for (const auto& w : data.warnings) std::cerr << "warning: " << w << '\n';
    const fs::path out = prepare_out_dir(out_dir);
    write_synthetic(out, c, data);
    m.config = to_json(c);
    m.config["out_dir"] = out_dir;
    m.seeds = {{"seed", c.seed}, {"test_stream", "seed xor 0x9E3779B97F4A7C15"}};
    m.write(out);
    std::cout << "support:";
    for (int k : data.truth.indices()) std::cout << ' ' << k + 1;
    std::cout << " sigma=" << format_double(data.sigma) << '\n';
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape-constrained sparse regression: CNLS with structured lasso penalties"};
  app.set_version_flag("--version", SHAPELASSO_VERSION);
  app.require_subcommand(1);

  FitCmd fit_cmd;
  CvCmd cv_cmd;
  SimulateCmd sim_cmd;
  PredictCmd predict_cmd;
  GenerateCmd gen_cmd;
  CLI::App* fit_app = app.add_subcommand("fit", "Fit one estimator and write model.json, summary.json");
  CLI::App* cv_app = app.add_subcommand("cv", "Cross-validate a family over a tuning grid and refit");
  CLI::App* sim_app = app.add_subcommand("simulate", "Monte Carlo comparison on synthetic data");
  CLI::App* predict_app = app.add_subcommand("predict", "Evaluate a saved model on new inputs");
  CLI::App* gen_app = app.add_subcommand("generate", "Write a synthetic train/test draw");
  fit_cmd.add(fit_app);
  cv_cmd.add(cv_app);
  sim_cmd.add(sim_app);
  predict_cmd.add(predict_app);
  gen_cmd.add(gen_app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInvalid;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    if (active == fit_app) return fit_cmd.run();
    if (active == cv_app) return cv_cmd.run();
    if (active == sim_app) return sim_cmd.run();
    if (active == predict_app) return predict_cmd.run();
    return gen_cmd.run();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << active->help();
    return kExitInvalid;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
