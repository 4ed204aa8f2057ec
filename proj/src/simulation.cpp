#include "shapelasso/simulation.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <tuple>

#include "parallel.hpp"
#include "shapelasso/error.hpp"

namespace shapelasso {

std::string to_string(Tuning t) {
  switch (t) {
    case Tuning::kfold: return "kfold";
    case Tuning::holdout: return "holdout";
    case Tuning::oracle: return "oracle";
  }
  return "unknown";
}

Tuning tuning_from_string(const std::string& name) {
  if (name == "kfold" || name == "cv") return Tuning::kfold;
  if (name == "holdout") return Tuning::holdout;
  if (name == "oracle") return Tuning::oracle;
  throw InvalidInput("unknown tuning mode '" + name + "' (expected kfold, holdout or oracle)");
}

namespace {

struct Setting {
  int n, d, s;
  double rho, snr;
};

std::vector<Setting> settings_of(const SimulationConfig& c) {
  std::vector<Setting> out;
  for (int n : c.n)
    for (int d : c.d)
      for (int s : c.s)
        for (double rho : c.rho)
          for (double snr : c.snr) out.push_back({n, d, s, rho, snr});
  return out;
}

SyntheticConfig draw_config(const SimulationConfig& c, const Setting& st, int rep) {
  SyntheticConfig g;
  g.n = st.n;
  g.d = st.d;
  g.s = st.s;
  g.rho = st.rho;
  g.snr = st.snr;
  g.seed = c.seed + static_cast<std::uint64_t>(rep);
  g.test_n = c.test_n;
  g.support = c.support;
  return g;
}

// Validation sample from the same design: same support and noise level, independent stream.
Dataset validation_sample(const SyntheticConfig& draw, const SyntheticData& data, bool against_truth) {
  SyntheticConfig v = draw;
  v.seed = draw.seed ^ kValidationStreamXor;
  v.support = data.truth.indices();
  v.sigma = data.sigma;
  v.test_n = 0;
  const SyntheticData vd = generate(v);
  if (!against_truth) return vd.train;
  return Dataset(vd.train.X(), data.f0.evaluate(vd.train.X()), vd.train.feature_names());
}

}  // namespace

ReplicationResult run_replication(const SimulationConfig& config, const SyntheticConfig& draw, Family family,
                                  const SyntheticData& data, int replication) {
  const auto start = std::chrono::steady_clock::now();
  ReplicationResult r;
  r.n = draw.n;
  r.d = draw.d;
  r.s = draw.s;
  r.rho = draw.rho;
  r.snr = draw.snr;
  r.family = family;
  r.replication = replication;
  r.seed = draw.seed;
  try {
    FitSpec spec = config.base;
    spec.family = family;
    const TuningGrid grid = config.fixed_grid ? *config.fixed_grid : default_grid(data.train, spec, config.grid);
    CvReport report;
    if (config.tuning == Tuning::kfold) {
      report = k_fold_cv(data.train, spec, grid, {config.folds, draw.seed, 1});
    } else {
      const Dataset valid = validation_sample(draw, data, config.tuning == Tuning::oracle);
      report = holdout_cv(data.train, valid, spec, grid, 1);
    }
    const FitResult& fit = report.refit;
    r.lambda_star = report.lambda_star;
    r.gamma_star = report.gamma_star;
    r.prediction_error = prediction_error(predict_rows(fit.model, data.test.X()), data.f0.evaluate(data.test.X()));
    r.test_error = test_error(fit.model, data.test.X(), data.test.y());
    r.nonzeros = nonzeros_count(fit.active_set);
    r.f_score = f_score(fit.active_set, data.truth);
    r.max_violation = max_convexity_violation(fit.model);
    r.ok = true;
  } catch (const SolverFailure& e) {
    r.ok = false;
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<ReplicationResult> run_simulation(const SimulationConfig& config, const ProgressFn& progress) {
  if (config.replications < 1) throw InvalidInput("replications must be >= 1");
  if (config.families.empty()) throw InvalidInput("no estimator families selected");
  const auto settings = settings_of(config);
  for (const auto& st : settings) draw_config(config, st, 0).validate();

  const std::size_t reps = static_cast<std::size_t>(config.replications);
  const std::size_t nf = config.families.size();
  const std::size_t tasks = settings.size() * reps;
  std::vector<ReplicationResult> results(tasks * nf);
  std::mutex progress_mutex;
  detail::parallel_for(tasks, config.jobs, [&](std::size_t t) {
    const Setting& st = settings[t / reps];
    const int rep = static_cast<int>(t % reps);
    const SyntheticConfig draw = draw_config(config, st, rep);
    const SyntheticData data = generate(draw);
    for (std::size_t f = 0; f < nf; ++f) {
      ReplicationResult r = run_replication(config, draw, config.families[f], data, rep);
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(r);
      }
      results[t * nf + f] = std::move(r);
    }
  });
  return results;
}

std::vector<AggregateRow> aggregate(const std::vector<ReplicationResult>& results) {
  using Key = std::tuple<int, int, int, double, double, int>;
  std::map<Key, std::size_t> index;
  std::vector<AggregateRow> rows;
  std::vector<std::vector<double>> pe;
  for (const auto& r : results) {
    const Key key{r.n, r.d, r.s, r.rho, r.snr, static_cast<int>(r.family)};
    auto [it, inserted] = index.emplace(key, rows.size());
    if (inserted) {
      AggregateRow row;
      row.n = r.n;
      row.d = r.d;
      row.s = r.s;
      row.rho = r.rho;
      row.snr = r.snr;
      row.family = r.family;
      rows.push_back(row);
      pe.emplace_back();
    }
    AggregateRow& row = rows[it->second];
    if (!r.ok) {
      ++row.failures;
      continue;
    }
    ++row.count;
    row.prediction_error += r.prediction_error;
    row.test_error += r.test_error;
    row.nonzeros += static_cast<double>(r.nonzeros);
    row.f_score += r.f_score;
    pe[it->second].push_back(r.prediction_error);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& row = rows[i];
    if (row.count == 0) {
      row.prediction_error = row.test_error = row.nonzeros = row.f_score = std::nan("");
      continue;
    }
    const double c = row.count;
    row.prediction_error /= c;
    row.test_error /= c;
    row.nonzeros /= c;
    row.f_score /= c;
    double ss = 0.0;
    for (double v : pe[i]) ss += (v - row.prediction_error) * (v - row.prediction_error);
    row.prediction_error_sd = row.count > 1 ? std::sqrt(ss / (c - 1)) : 0.0;
  }
  return rows;
}

void write_mc_results_csv(std::ostream& os, const std::vector<ReplicationResult>& results) {
  os << "n,d,s,rho,snr,family,replication,seed,ok,lambda_star,gamma_star,prediction_error,test_error,nonzeros,"
        "f_score,max_violation,error\n";
  for (const auto& r : results) {
    std::string err = r.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n' || ch == '"') ch = ';';
    os << r.n << ',' << r.d << ',' << r.s << ',' << format_double(r.rho) << ',' << format_double(r.snr) << ','
       << to_string(r.family) << ',' << r.replication << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ','
       << format_double(r.lambda_star) << ',' << format_double(r.gamma_star) << ','
       << format_double(r.prediction_error) << ',' << format_double(r.test_error) << ',' << r.nonzeros << ','
       << format_double(r.f_score) << ',' << format_double(r.max_violation) << ',' << err << '\n';
  }
}

void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
  os << "n,d,s,rho,snr,family,count,failures,prediction_error,prediction_error_sd,test_error,nonzeros,f_score\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.d << ',' << r.s << ',' << format_double(r.rho) << ',' << format_double(r.snr) << ','
       << to_string(r.family) << ',' << r.count << ',' << r.failures << ',' << format_double(r.prediction_error) << ','
       << format_double(r.prediction_error_sd) << ',' << format_double(r.test_error) << ','
       << format_double(r.nonzeros) << ',' << format_double(r.f_score) << '\n';
  }
}

void write_figures_data(const std::filesystem::path& dir, const std::vector<AggregateRow>& rows) {
  std::filesystem::create_directories(dir);
  const std::vector<std::pair<std::string, double AggregateRow::*>> metrics{
      {"prediction_error", &AggregateRow::prediction_error},
      {"test_error", &AggregateRow::test_error},
      {"nonzeros", &AggregateRow::nonzeros},
      {"f_score", &AggregateRow::f_score}};
  for (const auto& [name, member] : metrics) {
    std::ofstream os(dir / (name + "_vs_snr.csv"));
    if (!os) throw InvalidInput("cannot write figure data in " + dir.string());
    os << "n,d,s,rho,family,snr,mean,count\n";
    for (const auto& r : rows)
      os << r.n << ',' << r.d << ',' << r.s << ',' << format_double(r.rho) << ',' << to_string(r.family) << ','
         << format_double(r.snr) << ',' << format_double(r.*member) << ',' << r.count << '\n';
  }
}

std::vector<SweepCell> sweep_relaxed(const SweepConfig& config) {
  if (!is_relaxed(config.base.family)) throw InvalidInput("the sweep needs a relaxed family");
  if (config.replications < 1) throw InvalidInput("replications must be >= 1");
  const std::vector<double> lambdas = config.lambdas.empty() ? log_grid(10.0, 0.01, 20) : config.lambdas;
  std::vector<double> gammas = config.gammas;
  if (gammas.empty())
    for (int i = 1; i <= 10; ++i) gammas.push_back(i / 10.0);
  const std::size_t nl = lambdas.size(), ng = gammas.size();
  const auto reps = static_cast<std::size_t>(config.replications);

  std::vector<SyntheticData> draws;
  std::vector<FitSpec> specs;
  for (std::size_t r = 0; r < reps; ++r) {
    SyntheticConfig c = config.data;
    c.seed = config.data.seed + r;
    draws.push_back(generate(c));
    FitSpec s = config.base;
    if (is_adaptive(s.family) && !s.weights) s.weights = initial_adaptive_weights(draws.back().train, s);
    specs.push_back(s);
  }

  struct Slot {
    bool ok = false;
    std::vector<double> pe, nz;
  };
  std::vector<Slot> slots(reps * nl);
  detail::parallel_for(reps * nl, config.jobs, [&](std::size_t t) {
    const std::size_t r = t / nl, li = t % nl;
    const auto& data = draws[r];
    FitSpec s = specs[r];
    s.lambda = lambdas[li] * (config.per_observation ? static_cast<double>(data.train.n()) : 1.0);
    Slot slot;
    try {
      const auto fits = fit_relaxed_path(data.train, s, gammas);
      const Vector truth = data.f0.evaluate(data.test.X());
      for (const auto& f : fits) {
        slot.pe.push_back(prediction_error(predict_rows(f.model, data.test.X()), truth));
        slot.nz.push_back(static_cast<double>(f.active_set.size()));
      }
      slot.ok = true;
    } catch (const SolverFailure&) {
      slot.ok = false;
    }
    slots[t] = std::move(slot);
  });

  std::vector<SweepCell> cells;
  for (std::size_t li = 0; li < nl; ++li) {
    for (std::size_t gi = 0; gi < ng; ++gi) {
      SweepCell c;
      c.lambda = lambdas[li];
      c.effective_lambda = lambdas[li] * (config.per_observation ? static_cast<double>(config.data.n) : 1.0);
      c.gamma = gammas[gi];
      for (std::size_t r = 0; r < reps; ++r) {
        const Slot& s = slots[r * nl + li];
        if (!s.ok) {
          ++c.failures;
          continue;
        }
        ++c.count;
        c.prediction_error += s.pe[gi];
        c.nonzeros += s.nz[gi];
      }
      if (c.count > 0) {
        c.prediction_error /= c.count;
        c.nonzeros /= c.count;
      }
      cells.push_back(c);
    }
  }
  return cells;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells) {
  os << "lambda,effective_lambda,gamma,count,failures,prediction_error,nonzeros\n";
  for (const auto& c : cells)
    os << format_double(c.lambda) << ',' << format_double(c.effective_lambda) << ',' << format_double(c.gamma) << ',' << c.count << ',' << c.failures << ','
       << format_double(c.prediction_error) << ',' << format_double(c.nonzeros) << '\n';
}

}  // namespace shapelasso
