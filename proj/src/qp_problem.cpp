#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "shapelasso/error.hpp"
#include "shapelasso/qp.hpp"

namespace shapelasso {

double QpProblem::objective(const Eigen::VectorXd& z) const { return 0.5 * z.dot(P * z) + q.dot(z); }

void QpProblem::validate() const {
  const auto m = num_vars();
  if (P.rows() != m || P.cols() != m) throw InvalidInput("P must be square with one row per variable");
  if (A.cols() != m) throw InvalidInput("A must have one column per variable");
  if (A.rows() != b.size()) throw InvalidInput("A and b disagree on the number of constraints");
  if (!q.allFinite() || !b.allFinite()) throw InvalidInput("q and b must be finite");
  SparseMatrix Pt = P.transpose();
  if (m > 0 && (SparseMatrix(P - Pt)).norm() > 1e-12 * std::max(1.0, P.norm()))
    throw InvalidInput("P must be symmetric");
  for (Eigen::Index j = 0; j < m; ++j) {
    for (SparseMatrix::InnerIterator it(P, j); it; ++it) {
      if (!std::isfinite(it.value())) throw InvalidInput("P must be finite");
      if (it.row() == it.col() && it.value() < 0.0) throw InvalidInput("P must have a nonnegative diagonal");
    }
  }
  std::vector<int> row_nnz(static_cast<std::size_t>(A.rows()), 0);
  for (Eigen::Index j = 0; j < A.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
      if (!std::isfinite(it.value())) throw InvalidInput("A must be finite");
      if (it.value() != 0.0) ++row_nnz[static_cast<std::size_t>(it.row())];
    }
  }
  if (std::find(row_nnz.begin(), row_nnz.end(), 0) != row_nnz.end()) throw InvalidInput("A has an empty row");
  if (!layout.block_of.empty() && static_cast<Eigen::Index>(layout.block_of.size()) != m)
    throw InvalidInput("layout.block_of must cover every variable");
}

std::string to_string(QpStatus s) {
  switch (s) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::max_iter: return "max_iter";
    case QpStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

Backend backend_from_string(const std::string& name) {
  if (name == "builtin" || name == "ipm") return Backend::ipm;
  if (name == "admm") return Backend::admm;
  if (name == "external") return Backend::external;
  throw InvalidInput("unknown backend '" + name + "' (expected builtin, ipm, admm or external)");
}

std::string to_string(Backend b) {
  switch (b) {
    case Backend::ipm: return "ipm";
    case Backend::admm: return "admm";
    case Backend::external: return "external";
  }
  return "unknown";
}

Backend default_backend() {
  if (const char* env = std::getenv("SHAPELASSO_BACKEND"); env && *env) return backend_from_string(env);
  return Backend::ipm;
}

KktResiduals kkt_residuals(const QpProblem& p, const Eigen::VectorXd& z, const Eigen::VectorXd& duals) {
  if (z.size() != p.num_vars() || duals.size() != p.num_constraints())
    throw InvalidInput("kkt_residuals: dimension mismatch");
  KktResiduals r;
  const Eigen::VectorXd grad = p.P * z + p.q + p.A.transpose() * duals;
  r.stationarity = grad.size() ? grad.lpNorm<Eigen::Infinity>() : 0.0;
  const Eigen::VectorXd slack = p.b - p.A * z;
  for (Eigen::Index i = 0; i < slack.size(); ++i) {
    r.primal = std::max(r.primal, -slack(i));
    r.complementarity = std::max(r.complementarity, std::abs(duals(i) * slack(i)));
    r.complementarity = std::max(r.complementarity, -duals(i));
  }
  return r;
}

namespace {

void write_triplets(std::ostream& os, const char* tag, const SparseMatrix& M) {
  os << tag << ' ' << M.nonZeros() << '\n';
  for (Eigen::Index j = 0; j < M.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(M, j); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

void write_vector(std::ostream& os, const char* tag, const Eigen::VectorXd& v) {
  os << tag << ' ' << v.size() << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << v(i) << '\n';
}

void expect(std::istream& is, const std::string& token) {
  std::string got;
  if (!(is >> got) || got != token) throw InvalidInput("QP file: expected '" + token + "', got '" + got + "'");
}

template <class T>
T read_value(std::istream& is, const char* what) {
  T v{};
  if (!(is >> v)) throw InvalidInput(std::string("QP file: could not read ") + what);
  return v;
}

SparseMatrix read_triplets(std::istream& is, const char* tag, Eigen::Index rows, Eigen::Index cols) {
  expect(is, tag);
  const auto nnz = read_value<long long>(is, "nonzero count");
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(std::max(0LL, nnz)));
  for (long long k = 0; k < nnz; ++k) {
    const auto i = read_value<long long>(is, "row index");
    const auto j = read_value<long long>(is, "column index");
    const auto v = read_value<double>(is, "value");
    if (i < 0 || i >= rows || j < 0 || j >= cols) throw InvalidInput("QP file: triplet index out of range");
    t.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
  }
  SparseMatrix M(rows, cols);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

Eigen::VectorXd read_vector(std::istream& is, const char* tag) {
  expect(is, tag);
  const auto n = read_value<long long>(is, "vector length");
  Eigen::VectorXd v(n);
  for (long long i = 0; i < n; ++i) v(i) = read_value<double>(is, "vector entry");
  return v;
}

}  // namespace

void write_problem(std::ostream& os, const QpProblem& p) {
  const auto old_precision = os.precision(17);
  os << "shapelasso-qp 1\n";
  os << "vars " << p.num_vars() << " constraints " << p.num_constraints() << '\n';
  write_triplets(os, "P", p.P);
  write_vector(os, "q", p.q);
  write_triplets(os, "A", p.A);
  write_vector(os, "b", p.b);
  const auto& l = p.layout;
  os << "layout theta " << l.theta.offset << ' ' << l.theta.size << " xi " << l.xi.offset << ' ' << l.xi.size
     << " epigraph " << l.epigraph.offset << ' ' << l.epigraph.size << '\n';
  os << "xi_columns " << l.xi_columns.size();
  for (int c : l.xi_columns) os << ' ' << c;
  os << "\nblock_of " << l.block_of.size();
  for (int c : l.block_of) os << ' ' << c;
  os << "\nend\n";
  os.precision(old_precision);
}

QpProblem read_problem(std::istream& is) {
  expect(is, "shapelasso-qp");
  if (read_value<int>(is, "format version") != 1) throw InvalidInput("QP file: unsupported format version");
  expect(is, "vars");
  const auto m = read_value<long long>(is, "variable count");
  expect(is, "constraints");
  const auto r = read_value<long long>(is, "constraint count");
  QpProblem p;
  p.P = read_triplets(is, "P", m, m);
  p.q = read_vector(is, "q");
  p.A = read_triplets(is, "A", r, m);
  p.b = read_vector(is, "b");
  expect(is, "layout");
  auto& l = p.layout;
  expect(is, "theta");
  l.theta = {read_value<Eigen::Index>(is, "offset"), read_value<Eigen::Index>(is, "size")};
  expect(is, "xi");
  l.xi = {read_value<Eigen::Index>(is, "offset"), read_value<Eigen::Index>(is, "size")};
  expect(is, "epigraph");
  l.epigraph = {read_value<Eigen::Index>(is, "offset"), read_value<Eigen::Index>(is, "size")};
  expect(is, "xi_columns");
  l.xi_columns.resize(read_value<std::size_t>(is, "count"));
  for (auto& c : l.xi_columns) c = read_value<int>(is, "xi column");
  expect(is, "block_of");
  l.block_of.resize(read_value<std::size_t>(is, "count"));
  for (auto& c : l.block_of) c = read_value<int>(is, "block id");
  expect(is, "end");
  p.validate();
  return p;
}

void write_solution(std::ostream& os, const QpSolution& s) {
  const auto old_precision = os.precision(17);
  os << "shapelasso-qp-solution 1\n";
  os << "status " << to_string(s.status) << '\n';
  os << "iterations " << s.iterations << '\n';
  write_vector(os, "z", s.z);
  write_vector(os, "duals", s.duals);
  os << "end\n";
  os.precision(old_precision);
}

QpSolution read_solution(std::istream& is) {
  expect(is, "shapelasso-qp-solution");
  if (read_value<int>(is, "format version") != 1) throw InvalidInput("solution file: unsupported format version");
  QpSolution s;
  expect(is, "status");
  const auto status = read_value<std::string>(is, "status");
  if (status == "optimal") s.status = QpStatus::optimal;
  else if (status == "infeasible") s.status = QpStatus::infeasible;
  else if (status == "max_iter") s.status = QpStatus::max_iter;
  else throw InvalidInput("solution file: unknown status '" + status + "'");
  expect(is, "iterations");
  s.iterations = read_value<int>(is, "iteration count");
  s.z = read_vector(is, "z");
  s.duals = read_vector(is, "duals");
  expect(is, "end");
  return s;
}

}  // namespace shapelasso
