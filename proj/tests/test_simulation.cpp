#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "shapelasso/error.hpp"
#include "shapelasso/simulation.hpp"

using namespace shapelasso;

namespace {

SimulationConfig tiny_config() {
  SimulationConfig c;
  c.n = {20};
  c.d = {3};
  c.s = {1};
  c.snr = {5.0};
  c.test_n = 50;
  c.replications = 2;
  c.seed = 10;
  c.folds = 3;
  return c;
}

std::string csv(const std::vector<ReplicationResult>& r) {
  std::ostringstream os;
  write_mc_results_csv(os, r);
  return os.str();
}

}  // namespace

TEST_CASE("single zero-lambda cell gives the cnls metrics row") {
  SimulationConfig c = tiny_config();
  c.replications = 1;
  c.families = {Family::slasso};
  c.fixed_grid = TuningGrid{{0.0}, {1.0}};
  const auto res = run_simulation(c);
  REQUIRE(res.size() == 1);
  REQUIRE(res[0].ok);

  SyntheticConfig draw;
  draw.n = 20;
  draw.d = 3;
  draw.s = 1;
  draw.snr = 5.0;
  draw.seed = 10;
  draw.test_n = 50;
  const auto data = generate(draw);
  const auto cnls = fit_cnls(data.train, false);
  CHECK(res[0].prediction_error ==
        doctest::Approx(prediction_error(cnls.model, data.test.X(), data.f0)).epsilon(1e-6));
  CHECK(res[0].nonzeros == cnls.active_set.size());
  CHECK(res[0].lambda_star == 0.0);
}

TEST_CASE("simulation output is deterministic") {
  SimulationConfig c = tiny_config();
  c.families = {Family::lasso1, Family::aslasso};
  c.grid.lambdas = 4;
  const auto a = run_simulation(c);
  c.jobs = 2;
  const auto b = run_simulation(c);
  CHECK(a.size() == 4);
  CHECK(csv(a) == csv(b));
  for (const auto& r : a) {
    CHECK(r.ok);
    CHECK(r.max_violation <= 1e-6);
    CHECK((r.f_score >= 0.0 && r.f_score <= 1.0));
  }
  // Replication r uses seed + r for every family.
  CHECK(a[0].seed == 10);
  CHECK(a[1].seed == 10);
  CHECK(a[2].seed == 11);
}

TEST_CASE("tuning modes") {
  SimulationConfig c = tiny_config();
  c.replications = 1;
  c.families = {Family::slasso};
  c.grid.lambdas = 3;
  for (Tuning t : {Tuning::kfold, Tuning::holdout, Tuning::oracle}) {
    c.tuning = t;
    const auto r = run_simulation(c);
    CHECK(r[0].ok);
  }
  CHECK(tuning_from_string("holdout") == Tuning::holdout);
  CHECK_THROWS_AS(tuning_from_string("bic"), InvalidInput);
}

TEST_CASE("aggregation excludes failures") {
  std::vector<ReplicationResult> rs(3);
  for (int i = 0; i < 3; ++i) {
    rs[static_cast<std::size_t>(i)].family = Family::slasso;
    rs[static_cast<std::size_t>(i)].ok = i != 1;
    rs[static_cast<std::size_t>(i)].prediction_error = i + 1.0;
    rs[static_cast<std::size_t>(i)].nonzeros = static_cast<std::size_t>(2 * i);
  }
  const auto rows = aggregate(rs);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].count == 2);
  CHECK(rows[0].failures == 1);
  CHECK(rows[0].prediction_error == doctest::Approx(2.0));
  CHECK(rows[0].nonzeros == doctest::Approx(2.0));
  CHECK(rows[0].prediction_error_sd == doctest::Approx(std::sqrt(2.0)));

  std::ostringstream os;
  write_aggregate_csv(os, rows);
  CHECK(os.str().find("slasso,2,1,") != std::string::npos);
}

TEST_CASE("figure data files") {
  const auto dir = std::filesystem::temp_directory_path() / "shapelasso_fig_test";
  std::filesystem::remove_all(dir);
  AggregateRow row;
  row.family = Family::aslasso;
  row.snr = 2.0;
  row.count = 1;
  row.f_score = 0.5;
  write_figures_data(dir, {row});
  for (const char* name : {"prediction_error", "test_error", "nonzeros", "f_score"})
    CHECK(std::filesystem::exists(dir / (std::string(name) + "_vs_snr.csv")));
  std::ifstream is(dir / "f_score_vs_snr.csv");
  std::string header, line;
  std::getline(is, header);
  std::getline(is, line);
  CHECK(line.find("aslasso,2,0.5,1") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("relaxed sweep surface") {
  SweepConfig c;
  c.data.n = 20;
  c.data.d = 3;
  c.data.s = 1;
  c.data.test_n = 50;
  c.lambdas = {5.0, 0.5};
  c.gammas = {1.0, 0.0};
  c.base.family = Family::relaxed_slasso;
  const auto cells = sweep_relaxed(c);
  REQUIRE(cells.size() == 4);
  CHECK(cells[0].lambda == 5.0);
  CHECK(cells[1].gamma == 0.0);
  for (const auto& cell : cells) CHECK(cell.count == 1);
  // gamma does not change the selected set.
  CHECK(cells[0].nonzeros == cells[1].nonzeros);
  CHECK(cells[2].nonzeros >= cells[0].nonzeros);

  c.base.family = Family::slasso;
  CHECK_THROWS_AS(sweep_relaxed(c), InvalidInput);
}
