#include "shapelasso/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shapelasso/data_io.hpp"
#include "shapelasso/error.hpp"

namespace shapelasso {

std::string to_string(Family f) {
  switch (f) {
    case Family::cnls: return "cnls";
    case Family::lasso1: return "lasso1";
    case Family::lasso2: return "lasso2";
    case Family::slasso: return "slasso";
    case Family::aslasso: return "aslasso";
    case Family::relaxed_slasso: return "relaxed_slasso";
    case Family::relaxed_aslasso: return "relaxed_aslasso";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  for (Family f : {Family::cnls, Family::lasso1, Family::lasso2, Family::slasso, Family::aslasso,
                   Family::relaxed_slasso, Family::relaxed_aslasso}) {
    if (to_string(f) == name) return f;
  }
  if (name == "lasso") return Family::lasso1;
  throw InvalidInput("unknown family '" + name +
                     "' (expected cnls, lasso1, lasso2, slasso, aslasso, relaxed_slasso, relaxed_aslasso)");
}

bool is_relaxed(Family f) { return f == Family::relaxed_slasso || f == Family::relaxed_aslasso; }
bool is_adaptive(Family f) { return f == Family::aslasso || f == Family::relaxed_aslasso; }
bool is_structured(Family f) {
  return f == Family::slasso || f == Family::aslasso || f == Family::relaxed_slasso || f == Family::relaxed_aslasso;
}

std::string to_string(WeightsInit w) { return w == WeightsInit::cnls ? "cnls" : "slasso"; }

WeightsInit weights_init_from_string(const std::string& name) {
  if (name == "cnls") return WeightsInit::cnls;
  if (name == "slasso") return WeightsInit::slasso;
  throw InvalidInput("unknown weights initializer '" + name + "' (expected cnls or slasso)");
}

void FitSpec::validate(Eigen::Index d) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be a finite value >= 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidInput("gamma must lie in [0, 1]");
  if (family == Family::lasso2 && !(c_bound >= 0.0)) throw InvalidInput("c_bound must be >= 0");
  if (weights) {
    if (weights->size() != d) throw InvalidInput("weights must have one entry per input column");
    if (!weights->allFinite() || (weights->array() < 0.0).any())
      throw InvalidInput("weights must be finite and nonnegative");
  }
  if (zero_tau && !(*zero_tau >= 0.0)) throw InvalidInput("zero_tau must be >= 0");
  if (!(solver.ridge >= 0.0)) throw InvalidInput("ridge must be >= 0");
}

// ---- QP construction -------------------------------------------------------

SparseMatrix build_convexity_constraints(const Matrix& X) {
  const auto n = X.rows();
  const auto d = X.cols();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(n * (n - 1) * (d + 2)));
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      t.emplace_back(row, i, 1.0);
      t.emplace_back(row, j, -1.0);
      for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = X(j, k) - X(i, k);
        if (diff != 0.0) t.emplace_back(row, n + i * d + k, diff);
      }
      ++row;
    }
  }
  SparseMatrix A(n * (n - 1), n + n * d);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

QpProblem build_problem(const Matrix& X, const Vector& y, const ProblemSpec& spec) {
  const auto n = X.rows();
  if (y.size() != n) throw InvalidInput("build_problem: X and y differ in length");
  std::vector<int> cols = spec.columns;
  for (int c : cols)
    if (c < 0 || c >= X.cols()) throw InvalidInput("build_problem: column index out of range");
  if (spec.penalty == PenaltyKind::row_l1_bound && spec.c_bound <= 0.0) cols.clear();  // forces xi = 0
  const auto k = static_cast<Eigen::Index>(cols.size());
  if (spec.penalty == PenaltyKind::group_linf && spec.weights.size() != 0 && spec.weights.size() != k)
    throw InvalidInput("build_problem: one weight per column required");

  QpProblem p;
  auto& L = p.layout;
  L.xi_columns = cols;
  L.theta = {0, n};
  L.xi = {n, n * k};
  Eigen::Index next = n + n * k;

  // Auxiliary variables. Zero-cost bounds are dropped: they would be unbounded.
  std::vector<Eigen::Index> group_t(static_cast<std::size_t>(k), -1);
  std::vector<double> group_cost(static_cast<std::size_t>(k), 0.0);
  bool elementwise = false, row_bound = false;
  if (spec.penalty == PenaltyKind::group_linf) {
    for (Eigen::Index c = 0; c < k; ++c) {
      const double w = spec.weights.size() ? spec.weights(c) : 1.0;
      const double cost = spec.lambda * w;
      if (cost > 0.0) {
        group_t[static_cast<std::size_t>(c)] = next++;
        group_cost[static_cast<std::size_t>(c)] = cost;
      }
    }
  } else if (spec.penalty == PenaltyKind::elementwise_l1) {
    elementwise = spec.lambda > 0.0 && k > 0;
    if (elementwise) next += n * k;
  } else if (spec.penalty == PenaltyKind::row_l1_bound) {
    row_bound = std::isfinite(spec.c_bound) && k > 0;
    if (row_bound) next += n * k;
  }
  L.epigraph = {n + n * k, next - (n + n * k)};
  const Eigen::Index m = next;
  const Eigen::Index aux = n + n * k;  // first per-entry auxiliary (elementwise / row bound)
  auto xi_var = [&](Eigen::Index i, Eigen::Index c) { return n + i * k + c; };
  auto aux_var = [&](Eigen::Index i, Eigen::Index c) { return aux + i * k + c; };

  L.block_of.assign(static_cast<std::size_t>(m), -1);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < k; ++c) {
      L.block_of[static_cast<std::size_t>(xi_var(i, c))] = static_cast<int>(i);
      if (elementwise || row_bound) L.block_of[static_cast<std::size_t>(aux_var(i, c))] = static_cast<int>(i);
    }

  // Objective: 1/2 ||y - theta||^2 (constant dropped) + penalty, plus the ridge.
  std::vector<Eigen::Triplet<double>> pt;
  for (Eigen::Index i = 0; i < n; ++i) pt.emplace_back(i, i, 1.0);
  if (spec.ridge > 0.0)
    for (Eigen::Index v = n; v < m; ++v) pt.emplace_back(v, v, spec.ridge);
  p.P.resize(m, m);
  p.P.setFromTriplets(pt.begin(), pt.end());
  p.q = Vector::Zero(m);
  p.q.head(n) = -y;
  for (Eigen::Index c = 0; c < k; ++c)
    if (group_t[static_cast<std::size_t>(c)] >= 0) p.q(group_t[static_cast<std::size_t>(c)]) = group_cost[static_cast<std::size_t>(c)];
  if (elementwise) p.q.segment(aux, n * k).setConstant(spec.lambda);

  std::vector<Eigen::Triplet<double>> at;
  std::vector<double> rhs;
  Eigen::Index row = 0;
  auto end_row = [&](double b) {
    rhs.push_back(b);
    ++row;
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      at.emplace_back(row, i, 1.0);
      at.emplace_back(row, j, -1.0);
      for (Eigen::Index c = 0; c < k; ++c) {
        const int col = cols[static_cast<std::size_t>(c)];
        const double diff = X(j, col) - X(i, col);
        if (diff != 0.0) at.emplace_back(row, xi_var(i, c), diff);
      }
      end_row(0.0);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < k; ++c) {
      const auto xv = xi_var(i, c);
      if (spec.monotone) {
        at.emplace_back(row, xv, -1.0);
        end_row(0.0);
      }
      const Eigen::Index tv = group_t[static_cast<std::size_t>(c)] >= 0 ? group_t[static_cast<std::size_t>(c)]
                              : (elementwise || row_bound)               ? aux_var(i, c)
                                                                         : -1;
      if (tv >= 0) {
        at.emplace_back(row, xv, 1.0);
        at.emplace_back(row, tv, -1.0);
        end_row(0.0);
        if (!spec.monotone) {
          at.emplace_back(row, xv, -1.0);
          at.emplace_back(row, tv, -1.0);
          end_row(0.0);
        }
      }
    }
    if (row_bound) {
      for (Eigen::Index c = 0; c < k; ++c) at.emplace_back(row, aux_var(i, c), 1.0);
      end_row(spec.c_bound);
    }
  }
  p.A.resize(row, m);
  p.A.setFromTriplets(at.begin(), at.end());
  p.b = Eigen::Map<const Vector>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  return p;
}

QpFit solve_problem(const Matrix& X, const Vector& y, const ProblemSpec& spec, const SolverOptions& opts) {
  const QpProblem p = build_problem(X, y, spec);
  QpFit out;
  out.solution = solve(p, opts.tol, opts.backend);
  if (out.solution.status != QpStatus::optimal) {
    throw SolverFailure("QP solve ended with status " + to_string(out.solution.status) + " after " +
                        std::to_string(out.solution.iterations) + " iterations (backend " + out.solution.backend +
                        ", primal residual " + format_double(out.solution.primal_residual) + ", stationarity " +
                        format_double(out.solution.stationarity) + ")");
  }
  const auto n = X.rows();
  const auto k = static_cast<Eigen::Index>(p.layout.xi_columns.size());
  out.theta = out.solution.z.head(n);
  out.xi = Matrix::Zero(n, X.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < k; ++c)
      out.xi(i, p.layout.xi_columns[static_cast<std::size_t>(c)]) = out.solution.z(p.layout.xi.offset + i * k + c);
  return out;
}

// ---- estimators ------------------------------------------------------------

double lambda_max(const Dataset& data) { return (data.X().transpose() * data.y()).lpNorm<1>(); }

Vector compute_adaptive_weights(const SubgradientMatrix& initial, std::optional<double> tau) {
  const double t = tau ? *tau : default_zero_tau(initial);
  Vector w(initial.cols());
  for (Eigen::Index k = 0; k < initial.cols(); ++k) {
    const double norm = initial.values().col(k).norm();
    w(k) = norm <= t ? kWeightCap : std::min(kWeightCap, 1.0 / norm);
  }
  return w;
}

namespace {

struct Coords {
  Matrix X;
  Vector y;
  std::optional<Standardization> standardization;
};

Coords internal_coords(const Dataset& data, bool standardize) {
  if (!standardize) return {data.X(), data.y(), std::nullopt};
  Standardization s = standardize_fit(data);
  return {standardize_x(s, data.X()), standardize_y(s, data.y()), s};
}

std::vector<int> all_columns(Eigen::Index d) {
  std::vector<int> c(static_cast<std::size_t>(d));
  std::iota(c.begin(), c.end(), 0);
  return c;
}

void accumulate(SolverSummary& s, const QpSolution& sol) {
  s.backend = sol.backend;
  if (sol.status != QpStatus::optimal) s.status = sol.status;
  s.iterations += sol.iterations;
  s.solves += 1;
  s.solve_time += sol.solve_time;
  s.primal_residual = std::max(s.primal_residual, sol.primal_residual);
  s.stationarity = std::max(s.stationarity, sol.stationarity);
  s.objective = sol.objective;
}

double column_penalty(const Matrix& xi, const Vector& weights) {
  double v = 0.0;
  for (Eigen::Index k = 0; k < xi.cols(); ++k) {
    const double w = weights.size() ? weights(k) : 1.0;
    const double m = xi.col(k).cwiseAbs().maxCoeff();
    if (m != 0.0) v += w * m;
  }
  return v;
}

double penalty_for(Family f, const Matrix& xi, const Vector& weights) {
  switch (f) {
    case Family::cnls: return 0.0;
    case Family::lasso1: return xi.cwiseAbs().sum();
    case Family::lasso2: return xi.rows() ? xi.rowwise().lpNorm<1>().maxCoeff() : 0.0;
    default: return column_penalty(xi, weights);
  }
}

FitResult assemble(const Dataset& data, const Coords& co, const FitSpec& spec, Vector theta, Matrix xi) {
  FitResult r;
  r.spec = spec;
  r.model.theta = std::move(theta);
  r.model.xi = SubgradientMatrix(std::move(xi));
  r.model.anchors = co.X;
  r.model.standardization = co.standardization;
  r.model.feature_names = data.feature_names();
  const double tau = spec.zero_tau ? *spec.zero_tau : default_zero_tau(r.model.xi);
  r.active_set = support_of(r.model.xi, tau);
  const Vector fitted = co.standardization ? destandardize_y(*co.standardization, r.model.theta) : r.model.theta;
  r.sse = (data.y() - fitted).squaredNorm();
  return r;
}

ProblemSpec base_problem(const FitSpec& spec, Eigen::Index d) {
  ProblemSpec ps;
  ps.monotone = spec.monotone;
  ps.ridge = spec.solver.ridge;
  ps.columns = all_columns(d);
  switch (spec.family) {
    case Family::cnls: break;
    case Family::lasso1:
      ps.penalty = PenaltyKind::elementwise_l1;
      ps.lambda = spec.lambda;
      break;
    case Family::lasso2:
      ps.penalty = PenaltyKind::row_l1_bound;
      ps.c_bound = spec.c_bound;
      break;
    default:
      ps.penalty = PenaltyKind::group_linf;
      ps.lambda = spec.lambda;
      break;
  }
  return ps;
}

Vector resolve_weights(const Dataset& data, const FitSpec& spec) {
  if (!is_adaptive(spec.family)) return Vector::Ones(data.d());
  if (spec.weights) return *spec.weights;
  return initial_adaptive_weights(data, spec);
}

FitResult constant_model(const Dataset& data, const Coords& co, const FitSpec& spec) {
  const Vector theta = Vector::Constant(co.y.size(), co.y.mean());
  return assemble(data, co, spec, theta, Matrix::Zero(co.X.rows(), co.X.cols()));
}

}  // namespace

Vector initial_adaptive_weights(const Dataset& data, const FitSpec& spec) {
  FitSpec init;
  init.monotone = spec.monotone;
  init.standardize = spec.standardize;
  init.solver = spec.solver;
  if (spec.weights_init == WeightsInit::cnls) {
    init.family = Family::cnls;
  } else {
    init.family = Family::slasso;
    const Coords co = internal_coords(data, spec.standardize);
    init.lambda = 1e-3 * (co.X.transpose() * co.y).lpNorm<1>();
  }
  const FitResult r = fit(data, init);
  return compute_adaptive_weights(r.model.xi);
}

std::vector<FitResult> fit_relaxed_path(const Dataset& data, const FitSpec& spec, const std::vector<double>& gammas) {
  if (!is_relaxed(spec.family)) throw InvalidInput("fit_relaxed_path requires a relaxed family");
  spec.validate(data.d());
  for (double g : gammas)
    if (!(g >= 0.0 && g <= 1.0)) throw InvalidInput("gamma must lie in [0, 1]");
  const Coords co = internal_coords(data, spec.standardize);
  const Vector weights = resolve_weights(data, spec);

  std::vector<FitResult> out;
  if (data.n() == 1) {
    for (double g : gammas) {
      FitSpec s = spec;
      s.gamma = g;
      FitResult r = assemble(data, co, s, co.y, Matrix::Zero(1, data.d()));
      r.stage1_active_set = ActiveSet{};
      r.weights = weights;
      out.push_back(std::move(r));
    }
    return out;
  }

  // Stage 1: structured fit at lambda on every column.
  ProblemSpec s1 = base_problem(spec, data.d());
  s1.weights = weights;
  const QpFit stage1 = solve_problem(co.X, co.y, s1, spec.solver);
  const SubgradientMatrix xi1(stage1.xi);
  const ActiveSet M = support_of(xi1, spec.zero_tau ? *spec.zero_tau : default_zero_tau(xi1));

  for (double g : gammas) {
    FitSpec s = spec;
    s.gamma = g;
    FitResult r;
    SolverSummary summary;
    accumulate(summary, stage1.solution);
    if (M.empty()) {
      r = constant_model(data, co, s);
      r.warnings.push_back("stage-1 active set is empty; returning the constant-mean model");
    } else {
      ProblemSpec s2 = s1;
      s2.columns = M.indices();
      s2.lambda = spec.lambda * g;
      s2.weights.resize(static_cast<Eigen::Index>(M.size()));
      for (std::size_t c = 0; c < M.size(); ++c) s2.weights(static_cast<Eigen::Index>(c)) = weights(M.indices()[c]);
      QpFit stage2 = solve_problem(co.X, co.y, s2, spec.solver);
      accumulate(summary, stage2.solution);
      r = assemble(data, co, s, std::move(stage2.theta), std::move(stage2.xi));
    }
    r.solver = summary;
    r.stage1_active_set = M;
    r.weights = weights;
    r.penalty_value = column_penalty(r.model.xi.values(), weights);
    out.push_back(std::move(r));
  }
  return out;
}

FitResult fit(const Dataset& data, const FitSpec& spec) {
  spec.validate(data.d());
  if (is_relaxed(spec.family)) return std::move(fit_relaxed_path(data, spec, {spec.gamma}).front());

  const Coords co = internal_coords(data, spec.standardize);
  const Vector weights = resolve_weights(data, spec);
  FitResult r;
  if (data.n() == 1) {
    r = assemble(data, co, spec, co.y, Matrix::Zero(1, data.d()));
  } else {
    ProblemSpec ps = base_problem(spec, data.d());
    if (is_structured(spec.family)) ps.weights = weights;
    QpFit q = solve_problem(co.X, co.y, ps, spec.solver);
    SolverSummary summary;
    accumulate(summary, q.solution);
    r = assemble(data, co, spec, std::move(q.theta), std::move(q.xi));
    r.solver = summary;
  }
  if (is_adaptive(spec.family)) r.weights = weights;
  r.penalty_value = penalty_for(spec.family, r.model.xi.values(), weights);
  return r;
}

FitResult fit_cnls(const Dataset& data, bool monotone, const SolverOptions& opts) {
  FitSpec s;
  s.family = Family::cnls;
  s.monotone = monotone;
  s.solver = opts;
  return fit(data, s);
}

FitResult fit_slasso(const Dataset& data, double lambda, const std::optional<Vector>& weights, bool monotone,
                     const SolverOptions& opts) {
  FitSpec s;
  s.family = weights ? Family::aslasso : Family::slasso;
  s.lambda = lambda;
  s.weights = weights;
  s.monotone = monotone;
  s.solver = opts;
  return fit(data, s);
}

FitResult fit_lasso1(const Dataset& data, double lambda, bool monotone, const SolverOptions& opts) {
  FitSpec s;
  s.family = Family::lasso1;
  s.lambda = lambda;
  s.monotone = monotone;
  s.solver = opts;
  return fit(data, s);
}

FitResult fit_lasso2(const Dataset& data, double c_bound, bool monotone, const SolverOptions& opts) {
  if (!(c_bound >= 0.0)) throw InvalidInput("c_bound must be >= 0");
  FitSpec s;
  s.family = Family::lasso2;
  s.c_bound = c_bound;
  s.monotone = monotone;
  s.solver = opts;
  return fit(data, s);
}

FitResult fit_relaxed(const Dataset& data, double lambda, double gamma, const std::optional<Vector>& weights,
                      bool monotone, const SolverOptions& opts) {
  FitSpec s;
  s.family = weights ? Family::relaxed_aslasso : Family::relaxed_slasso;
  s.lambda = lambda;
  s.gamma = gamma;
  s.weights = weights;
  s.monotone = monotone;
  s.solver = opts;
  return fit(data, s);
}

nlohmann::json to_json(const FitResult& r) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["family"] = to_string(r.spec.family);
  j["lambda"] = r.spec.lambda;
  j["gamma"] = r.spec.gamma;
  j["c_bound"] = std::isfinite(r.spec.c_bound) ? nlohmann::json(r.spec.c_bound) : nlohmann::json("inf");
  j["monotone"] = r.spec.monotone;
  j["standardize"] = r.spec.standardize;
  j["active_set"] = r.active_set.indices();
  j["nonzeros"] = r.active_set.size();
  if (r.stage1_active_set) j["stage1_active_set"] = r.stage1_active_set->indices();
  if (r.weights) j["weights"] = std::vector<double>(r.weights->data(), r.weights->data() + r.weights->size());
  j["sse"] = r.sse;
  j["penalty_value"] = r.penalty_value;
  j["max_convexity_violation"] = max_convexity_violation(r.model);
  j["solver"] = {{"backend", r.solver.backend},
                 {"status", to_string(r.solver.status)},
                 {"solves", r.solver.solves},
                 {"iterations", r.solver.iterations},
                 {"solve_time", r.solver.solve_time},
                 {"primal_residual", r.solver.primal_residual},
                 {"stationarity", r.solver.stationarity},
                 {"objective", r.solver.objective}};
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace shapelasso
