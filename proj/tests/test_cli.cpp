// Drives the shapelasso executable end to end.
#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Sandbox {
  fs::path dir;
  Sandbox() {
    std::random_device rd;
    dir = fs::temp_directory_path() / ("shapelasso_cli_" + std::to_string(rd()));
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return dir / name;
  }

  // Runs the CLI with the sandbox as working directory; returns the exit status.
  int run(const std::string& args) const {
    const std::string cmd = "cd '" + dir.string() + "' && '" SHAPELASSO_CLI "' " + args + " >out.txt 2>err.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const fs::path& rel) const {
    std::ifstream is(dir / rel);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }

  json read_json(const fs::path& rel) const { return json::parse(read(rel)); }
};

const char* kToy = "y,x\n0,0\n1,1\n0,2\n";

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("fit cnls on the three-point instance") {
  Sandbox sb;
  sb.write("toy.csv", kToy);
  REQUIRE(sb.run("fit --family cnls --data toy.csv --response y --out-dir out") == 0);
  const json s = sb.read_json("out/summary.json");
  CHECK(s["sse"].get<double>() == doctest::Approx(0.6667).epsilon(1e-4));
  CHECK(s["solver"]["status"] == "optimal");
  CHECK(!s["solver"].contains("solve_time"));
  const json m = sb.read_json("out/manifest.json");
  CHECK(m["command"] == "fit");
  CHECK(m["schema_version"] == 1);
  CHECK(m["inputs"][0]["sha256"].get<std::string>().size() == 64);
  CHECK(fs::exists(sb.dir / "out/model.json"));
}

TEST_CASE("slasso with zero lambda reproduces cnls") {
  Sandbox sb;
  sb.write("toy.csv", kToy);
  REQUIRE(sb.run("generate --n 25 --d 3 --s 1 --seed 3 --test-n 5 --out-dir g") == 0);
  REQUIRE(sb.run("fit --family cnls --data g/train.csv --out-dir a") == 0);
  REQUIRE(sb.run("fit --family slasso --lambda 0 --data g/train.csv --out-dir b") == 0);
  const json a = sb.read_json("a/model.json"), b = sb.read_json("b/model.json");
  const auto ta = a["theta"].get<std::vector<double>>(), tb = b["theta"].get<std::vector<double>>();
  REQUIRE(ta.size() == tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) CHECK(tb[i] == doctest::Approx(ta[i]).epsilon(1e-5).scale(1.0));
}

TEST_CASE("argument errors exit 2") {
  Sandbox sb;
  sb.write("toy.csv", kToy);
  CHECK(sb.run("fit --family slasso --data toy.csv") == 2);
  CHECK(sb.read("err.txt").find("--lambda") != std::string::npos);
  CHECK(sb.read("err.txt").find("Usage") != std::string::npos);
  CHECK(sb.run("fit --family lasso2 --data toy.csv") == 2);
  CHECK(sb.run("fit --family ridge --lambda 1 --data toy.csv") == 2);
  CHECK(sb.run("fit --data missing.csv") == 2);
  CHECK(sb.run("fit --data toy.csv --response z") == 2);
  CHECK(sb.run("fit --family slasso --lambda -1 --data toy.csv") == 2);
  CHECK(sb.run("nosuchcommand") == 2);
  CHECK(sb.run("") == 2);
  CHECK(sb.run("--help") == 0);
}

TEST_CASE("cv outputs") {
  Sandbox sb;
  REQUIRE(sb.run("generate --n 30 --d 3 --s 1 --seed 8 --test-n 5 --out-dir g") == 0);

  SUBCASE("single cell") {
    REQUIRE(sb.run("cv --family slasso --lambdas 0 --data g/train.csv --out-dir c") == 0);
    CHECK(lines(sb.read("c/cv_report.csv")) == 2);
    const json r = sb.read_json("c/cv_report.json");
    CHECK(r["cells"].size() == 1);
    CHECK(r["lambda_star"] == 0.0);
    for (const char* f : {"model.json", "summary.json", "cv_folds.csv", "manifest.json"}) CHECK(fs::exists(sb.dir / "c" / f));
  }
  SUBCASE("deterministic rerun") {
    REQUIRE(sb.run("cv --family aslasso --grid-lambdas 6 --seed 4 --data g/train.csv --out-dir c1") == 0);
    REQUIRE(sb.run("cv --family aslasso --grid-lambdas 6 --seed 4 --jobs 2 --data g/train.csv --out-dir c2") == 0);
    CHECK(lines(sb.read("c1/cv_report.csv")) == 7);
    CHECK(sb.read("c1/cv_report.csv") == sb.read("c2/cv_report.csv"));
    CHECK(sb.read("c1/cv_folds.csv") == sb.read("c2/cv_folds.csv"));
    CHECK(sb.read("c1/model.json") == sb.read("c2/model.json"));
  }
}

TEST_CASE("relaxed cv over the full default grid has 550 cells") {
  Sandbox sb;
  REQUIRE(sb.run("generate --n 12 --d 2 --s 1 --seed 2 --test-n 5 --out-dir g") == 0);
  REQUIRE(sb.run("cv --family relaxed_slasso --folds 3 --data g/train.csv --out-dir c") == 0);
  CHECK(lines(sb.read("c/cv_report.csv")) == 551);
  CHECK(sb.read_json("c/cv_report.json")["cells"].size() == 550);
}

TEST_CASE("predict") {
  Sandbox sb;
  sb.write("toy.csv", kToy);
  REQUIRE(sb.run("fit --family cnls --data toy.csv --out-dir m") == 0);
  const auto theta = sb.read_json("m/model.json")["theta"].get<std::vector<double>>();

  SUBCASE("round trip on the training anchors") {
    REQUIRE(sb.run("predict --model m/model.json --data toy.csv --out-dir p") == 0);
    std::istringstream is(sb.read("p/predictions.csv"));
    std::string line;
    std::getline(is, line);
    CHECK(line == "prediction");
    for (double t : theta) {
      REQUIRE(std::getline(is, line));
      CHECK(std::abs(std::stod(line) - t) <= 1e-6);
    }
  }
  SUBCASE("mismatched columns exit 2") {
    sb.write("bad.csv", "a,b\n1,2\n");
    CHECK(sb.run("predict --model m/model.json --data bad.csv --out-dir p") == 2);
  }
  SUBCASE("empty input gives a header-only file") {
    sb.write("empty.csv", "");
    REQUIRE(sb.run("predict --model m/model.json --data empty.csv --out-dir p") == 0);
    CHECK(sb.read("p/predictions.csv") == "prediction\n");
    sb.write("header.csv", "x\n");
    REQUIRE(sb.run("predict --model m/model.json --data header.csv --out-dir q") == 0);
    CHECK(sb.read("q/predictions.csv") == "prediction\n");
  }
}

TEST_CASE("simulate writes tables and figure data deterministically") {
  Sandbox sb;
  const std::string args =
      "simulate --n 20 --d 3 --s 1 --snr 2,7 --families slasso,aslasso --replications 2 --grid-lambdas 3 --test-n 50 "
      "--seed 6";
  REQUIRE(sb.run(args + " --out-dir a") == 0);
  REQUIRE(sb.run(args + " --jobs 2 --out-dir b") == 0);
  CHECK(lines(sb.read("a/mc_results.csv")) == 1 + 2 * 2 * 2);
  CHECK(lines(sb.read("a/mc_summary.csv")) == 1 + 2 * 2);
  CHECK(sb.read("a/mc_results.csv") == sb.read("b/mc_results.csv"));
  CHECK(sb.read("a/mc_summary.csv") == sb.read("b/mc_summary.csv"));
  CHECK(fs::exists(sb.dir / "a/figures_data/prediction_error_vs_snr.csv"));

  REQUIRE(sb.run("simulate --sweep-relaxed --n 20 --d 3 --s 1 --test-n 50 --lambdas 5,0.5 --gammas 1,0.5 --out-dir s") ==
          0);
  const std::string sweep = sb.read("s/sweep_relaxed.csv");
  CHECK(lines(sweep) == 5);
  CHECK(sweep.rfind("lambda,effective_lambda,gamma", 0) == 0);
  CHECK(sb.run("simulate --sweep-relaxed --family slasso --lambdas 1 --out-dir s2") == 2);
}

TEST_CASE("generate honours a 1-based fixed support") {
  Sandbox sb;
  REQUIRE(sb.run("generate --n 10 --d 10 --s 2 --support 3,9 --seed 1 --test-n 4 --out-dir g") == 0);
  const json j = sb.read_json("g/synthetic.json");
  CHECK(j["support"] == std::vector<int>{2, 8});
  CHECK(sb.run("generate --d 10 --s 2 --support 0,9 --out-dir h") == 2);
  REQUIRE(sb.run("generate --n 10 --d 10 --s 2 --support 3,9 --seed 1 --test-n 4 --out-dir g2") == 0);
  CHECK(sb.read("g/train.csv") == sb.read("g2/train.csv"));
}
