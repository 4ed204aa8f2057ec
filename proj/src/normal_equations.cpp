#include "normal_equations.hpp"

#include <algorithm>

namespace shapelasso::detail {

namespace {
constexpr Eigen::Index kMaxDenseTail = 4000;
}

NormalEquations::NormalEquations(const QpProblem& p) : p_(p) { structured_ = setup_blocks(); }

bool NormalEquations::setup_blocks() {
  const auto m = p_.num_vars();
  const auto& hint = p_.layout.block_of;
  if (hint.empty() || static_cast<Eigen::Index>(hint.size()) != m) return false;

  // P must be diagonal for the block path.
  p_diag_ = Eigen::VectorXd::Zero(m);
  for (Eigen::Index j = 0; j < p_.P.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(p_.P, j); it; ++it) {
      if (it.row() != it.col()) {
        if (it.value() != 0.0) return false;
        continue;
      }
      p_diag_(it.row()) += it.value();
    }
  }

  int num_blocks = 0;
  for (int b : hint) num_blocks = std::max(num_blocks, b + 1);
  var_block_.assign(static_cast<std::size_t>(m), -1);
  var_local_.assign(static_cast<std::size_t>(m), -1);
  blocks_.assign(static_cast<std::size_t>(num_blocks), {});
  tail_vars_.clear();
  for (Eigen::Index v = 0; v < m; ++v) {
    const int b = hint[static_cast<std::size_t>(v)];
    if (b < 0) {
      var_local_[v] = static_cast<int>(tail_vars_.size());
      tail_vars_.push_back(static_cast<int>(v));
    } else {
      var_block_[v] = b;
      var_local_[v] = static_cast<int>(blocks_[b].vars.size());
      blocks_[b].vars.push_back(static_cast<int>(v));
    }
  }
  const auto T = static_cast<Eigen::Index>(tail_vars_.size());
  if (T > kMaxDenseTail) return false;

  // First pass: assign rows to blocks.
  const Eigen::SparseMatrix<double, Eigen::RowMajor, int> Ar = p_.A;
  std::vector<int> row_block(static_cast<std::size_t>(Ar.rows()), -1);
  row_tail_.assign(static_cast<std::size_t>(Ar.rows()), {});
  tail_only_rows_.clear();
  for (Eigen::Index r = 0; r < Ar.rows(); ++r) {
    int rb = -1;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor, int>::InnerIterator it(Ar, r); it; ++it) {
      if (it.value() == 0.0) continue;
      const int b = var_block_[it.col()];
      if (b < 0) {
        row_tail_[r].emplace_back(var_local_[it.col()], it.value());
      } else {
        if (rb >= 0 && rb != b) return false;
        rb = b;
      }
    }
    row_block[r] = rb;
    if (rb < 0) tail_only_rows_.push_back(r);
    else blocks_[rb].rows.push_back(r);
  }

  // Second pass: dense slabs per block.
  Eigen::Index stacked_rows = 0;
  for (auto& blk : blocks_) {
    const auto nr = static_cast<Eigen::Index>(blk.rows.size());
    const auto sz = static_cast<Eigen::Index>(blk.vars.size());
    blk.slab = Eigen::MatrixXd::Zero(nr, sz);
    for (Eigen::Index lr = 0; lr < nr; ++lr) {
      for (Eigen::SparseMatrix<double, Eigen::RowMajor, int>::InnerIterator it(Ar, blk.rows[lr]); it; ++it) {
        if (var_block_[it.col()] >= 0) blk.slab(lr, var_local_[it.col()]) += it.value();
      }
    }
    blk.B.resize(sz, sz);
    blk.C.resize(sz, T);
    blk.offset = stacked_rows;
    stacked_rows += sz;
  }
  schur_.resize(T, T);
  stacked_.resize(stacked_rows, T);
  return true;
}

void NormalEquations::factor(const Eigen::VectorXd& w, double reg) {
  w_ = w;
  reg_ = reg;
  if (structured_) factor_blocks();
  else factor_sparse();
}

void NormalEquations::factor_blocks() {
  const auto T = static_cast<Eigen::Index>(tail_vars_.size());
  schur_.setZero();
  for (Eigen::Index l = 0; l < T; ++l) schur_(l, l) = p_diag_(tail_vars_[l]) + reg_;

  auto scatter_tail = [&](Eigen::Index r) {
    const double wr = w_(r);
    const auto& e = row_tail_[r];
    for (const auto& [a, va] : e)
      for (const auto& [c, vc] : e)
        if (c <= a) schur_(a, c) += wr * va * vc;  // lower triangle only
  };
  for (auto r : tail_only_rows_) scatter_tail(r);

  for (auto& blk : blocks_) {
    const auto sz = static_cast<Eigen::Index>(blk.vars.size());
    if (sz == 0) continue;
    const auto nr = static_cast<Eigen::Index>(blk.rows.size());
    Eigen::VectorXd wb(nr);
    for (Eigen::Index lr = 0; lr < nr; ++lr) wb(lr) = w_(blk.rows[lr]);
    const Eigen::MatrixXd WA = wb.asDiagonal() * blk.slab;
    blk.B.noalias() = blk.slab.transpose() * WA;
    for (Eigen::Index l = 0; l < sz; ++l) blk.B(l, l) += p_diag_(blk.vars[l]) + reg_;
    // C = WA' * tail, one axpy per tail entry; Y = L^{-1} C is formed row by row.
    auto Y = stacked_.middleRows(blk.offset, sz);
    Y.setZero();
    for (Eigen::Index lr = 0; lr < nr; ++lr) {
      for (const auto& [c, v] : row_tail_[blk.rows[lr]]) Y.col(c) += v * WA.row(lr).transpose();
    }
    blk.C = Y;
    for (auto r : blk.rows) scatter_tail(r);

    blk.fact.compute(blk.B);
    const auto& L = blk.fact.matrixLLT();
    for (Eigen::Index i = 0; i < sz; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) Y.row(i) -= L(i, j) * Y.row(j);
      Y.row(i) /= L(i, i);
    }
  }
  // Schur -= sum_b C_b' B_b^{-1} C_b = Y' Y with Y the stacked L_b^{-1} C_b.
  if (T > 0 && stacked_.rows() > 0) schur_.selfadjointView<Eigen::Lower>().rankUpdate(stacked_.transpose(), -1.0);
  if (T > 0) schur_fact_.compute(schur_.selfadjointView<Eigen::Lower>());
}

void NormalEquations::factor_sparse() {
  const auto m = p_.num_vars();
  SparseMatrix K = p_.A.transpose() * w_.asDiagonal() * p_.A;
  K += p_.P;
  SparseMatrix I(m, m);
  I.setIdentity();
  K += reg_ * I;
  SparseMatrix lower = K.triangularView<Eigen::Lower>();
  if (!analyzed_ || lower.nonZeros() != analyzed_nnz_) {
    sparse_fact_.analyzePattern(lower);
    analyzed_ = true;
    analyzed_nnz_ = lower.nonZeros();
  }
  sparse_fact_.factorize(lower);
}

Eigen::VectorXd NormalEquations::solve(const Eigen::VectorXd& rhs) const {
  if (!structured_) return sparse_fact_.solve(rhs);

  const auto T = static_cast<Eigen::Index>(tail_vars_.size());
  Eigen::VectorXd rt(T);
  for (Eigen::Index l = 0; l < T; ++l) rt(l) = rhs(tail_vars_[l]);
  std::vector<Eigen::VectorXd> rb(blocks_.size());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& blk = blocks_[b];
    const auto sz = static_cast<Eigen::Index>(blk.vars.size());
    if (sz == 0) continue;
    rb[b].resize(sz);
    for (Eigen::Index l = 0; l < sz; ++l) rb[b](l) = rhs(blk.vars[l]);
    if (T > 0) rt.noalias() -= blk.C.transpose() * blk.fact.solve(rb[b]);
  }
  const Eigen::VectorXd xt = T > 0 ? Eigen::VectorXd(schur_fact_.solve(rt)) : Eigen::VectorXd();

  Eigen::VectorXd x(rhs.size());
  for (Eigen::Index l = 0; l < T; ++l) x(tail_vars_[l]) = xt(l);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& blk = blocks_[b];
    const auto sz = static_cast<Eigen::Index>(blk.vars.size());
    if (sz == 0) continue;
    if (T > 0) rb[b].noalias() -= blk.C * xt;
    const Eigen::VectorXd xb = blk.fact.solve(rb[b]);
    for (Eigen::Index l = 0; l < sz; ++l) x(blk.vars[l]) = xb(l);
  }
  return x;
}

Eigen::VectorXd NormalEquations::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out = p_.P * x;
  const Eigen::VectorXd Ax = p_.A * x;
  out.noalias() += p_.A.transpose() * w_.cwiseProduct(Ax);
  return out;
}

Eigen::VectorXd NormalEquations::solve_refined(const Eigen::VectorXd& rhs, int steps) const {
  Eigen::VectorXd x = solve(rhs);
  for (int s = 0; s < steps; ++s) {
    const Eigen::VectorXd res = rhs - apply(x);
    x += solve(res);
  }
  return x;
}

}  // namespace shapelasso::detail
