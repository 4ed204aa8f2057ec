// Adapter for an out-of-process solver. The problem is written in the triplet
// interchange format, the command named by SHAPELASSO_EXTERNAL_SOLVER is run as
//   <command> <problem-file> <solution-file>
// and the solution file is read back. tools/cvxopt_qp.py is one such command.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "backends.hpp"
#include "shapelasso/error.hpp"

namespace shapelasso::detail {

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

}  // namespace

QpSolution solve_external(const QpProblem& p, const Tolerances& tol) {
  const char* cmd = std::getenv("SHAPELASSO_EXTERNAL_SOLVER");
  if (cmd == nullptr || *cmd == '\0') {
    throw SolverFailure("external backend selected but SHAPELASSO_EXTERNAL_SOLVER is not set");
  }
  const auto start = std::chrono::steady_clock::now();

  namespace fs = std::filesystem;
  std::random_device rd;
  const fs::path dir = fs::temp_directory_path() / ("shapelasso-qp-" + std::to_string(rd()) + std::to_string(rd()));
  fs::create_directories(dir);
  const fs::path prob = dir / "problem.txt";
  const fs::path sol = dir / "solution.txt";
  {
    std::ofstream os(prob);
    write_problem(os, p);
  }
  std::ostringstream line;
  line << cmd << ' ' << shell_quote(prob.string()) << ' ' << shell_quote(sol.string()) << ' ' << tol.eps_feas << ' '
       << tol.eps_kkt;
  const int rc = std::system(line.str().c_str());
  QpSolution out;
  std::ifstream is(sol);
  if (rc != 0 || !is) {
    std::error_code ec;
    fs::remove_all(dir, ec);
    throw SolverFailure("external solver failed (exit status " + std::to_string(rc) + "): " + line.str());
  }
  out = read_solution(is);
  is.close();
  std::error_code ec;
  fs::remove_all(dir, ec);

  if (out.z.size() != p.num_vars() || out.duals.size() != p.num_constraints()) {
    throw SolverFailure("external solver returned a solution of the wrong dimension");
  }
  const QpStatus reported = out.status;
  finalize_solution(p, out);
  out.backend = "external";
  if (reported == QpStatus::infeasible) out.status = QpStatus::infeasible;
  else if (out.primal_residual <= tol.eps_feas && out.stationarity <= tol.eps_kkt) out.status = QpStatus::optimal;
  else out.status = QpStatus::max_iter;
  out.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace shapelasso::detail
