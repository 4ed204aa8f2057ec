#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "shapelasso/data_io.hpp"
#include "shapelasso/model_selection.hpp"

namespace shapelasso {

enum class Tuning {
  kfold,    ///< k-fold CV on the training sample
  holdout,  ///< separate validation sample of size n, scored against its y
  oracle,   ///< separate validation sample, scored against f0 (diagnostic only)
};

std::string to_string(Tuning t);
Tuning tuning_from_string(const std::string& name);

/// Validation samples for holdout/oracle tuning use seed ^ kValidationStreamXor.
inline constexpr std::uint64_t kValidationStreamXor = 0xD1B54A32D192ED03ULL;

/// Monte Carlo design: every combination of the listed settings, each with
/// `replications` draws. Replication r uses data seed `seed + r`, shared by all families.
struct SimulationConfig {
  std::vector<int> n{100};
  std::vector<int> d{10};
  std::vector<int> s{2};
  std::vector<double> rho{0.3};
  std::vector<double> snr{7.0};
  std::vector<Family> families{Family::lasso1, Family::slasso, Family::aslasso};
  int replications = 1;
  std::uint64_t seed = 0;
  int test_n = 1000;
  std::optional<std::vector<int>> support;

  Tuning tuning = Tuning::kfold;
  int folds = 5;
  GridOptions grid;
  std::optional<TuningGrid> fixed_grid;  ///< overrides the per-dataset default grid
  FitSpec base;                          ///< monotone, weights_init, standardize, solver
  int jobs = 1;
};

struct ReplicationResult {
  int n = 0, d = 0, s = 0;
  double rho = 0.0, snr = 0.0;
  Family family = Family::cnls;
  int replication = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double lambda_star = 0.0;
  double gamma_star = 1.0;
  double prediction_error = 0.0;
  double test_error = 0.0;
  std::size_t nonzeros = 0;
  double f_score = 0.0;
  double max_violation = 0.0;
  double seconds = 0.0;  ///< wall time; not written to the CSV so reruns stay byte-identical
};

using ProgressFn = std::function<void(const ReplicationResult&)>;

std::vector<ReplicationResult> run_simulation(const SimulationConfig& config, const ProgressFn& progress = {});

/// Runs one replication of one family on an already generated draw.
ReplicationResult run_replication(const SimulationConfig& config, const SyntheticConfig& draw, Family family,
                                  const SyntheticData& data, int replication);

struct AggregateRow {
  int n = 0, d = 0, s = 0;
  double rho = 0.0, snr = 0.0;
  Family family = Family::cnls;
  int count = 0;     ///< successful replications
  int failures = 0;  ///< excluded from the means
  double prediction_error = 0.0;
  double test_error = 0.0;
  double nonzeros = 0.0;
  double f_score = 0.0;
  double prediction_error_sd = 0.0;
};

std::vector<AggregateRow> aggregate(const std::vector<ReplicationResult>& results);

void write_mc_results_csv(std::ostream& os, const std::vector<ReplicationResult>& results);
void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows);
/// One CSV per metric, long format (setting, family, snr, mean) for plotting against SNR.
void write_figures_data(const std::filesystem::path& dir, const std::vector<AggregateRow>& rows);

/// Relaxed-SLasso surface over a fixed lambda x gamma grid (no tuning).
struct SweepConfig {
  SyntheticConfig data;
  std::vector<double> lambdas;  ///< default: 20 log-spaced values in [0.1, 10]
  std::vector<double> gammas;   ///< default: 0.1, 0.2, ..., 1.0
  /// When set, `lambdas` are per-observation values: the fit uses n * lambda,
  /// i.e. the penalty scale of a (1/2n) sum-of-squares loss.
  bool per_observation = true;
  int replications = 1;
  FitSpec base;  ///< family must be relaxed
  int jobs = 1;
};

struct SweepCell {
  double lambda = 0.0;            ///< as listed in the config
  double effective_lambda = 0.0;  ///< value passed to the fit
  double gamma = 1.0;
  int count = 0;
  int failures = 0;
  double prediction_error = 0.0;
  double nonzeros = 0.0;
};

std::vector<SweepCell> sweep_relaxed(const SweepConfig& config);
void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells);

}  // namespace shapelasso
