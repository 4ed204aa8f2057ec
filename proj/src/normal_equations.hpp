#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <vector>

#include "shapelasso/qp.hpp"

namespace shapelasso::detail {

/// Factorizes K = P + reg*I + A' diag(w) A for a fixed sparsity pattern.
///
/// When the problem layout carries a block hint (every constraint row touches
/// at most one independent block plus the coupled tail), K has block-arrow
/// form and is solved through the Schur complement on the tail. Otherwise a
/// sparse LDL' factorization is used.
class NormalEquations {
 public:
  explicit NormalEquations(const QpProblem& p);

  void factor(const Eigen::VectorXd& w, double reg);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  /// Applies P + A' diag(w) A (no regularization) with the weights of the last factor call.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  /// solve() followed by `steps` rounds of iterative refinement against `apply`,
  /// which removes most of the regularization bias.
  Eigen::VectorXd solve_refined(const Eigen::VectorXd& rhs, int steps) const;

  bool structured() const { return structured_; }

 private:
  bool setup_blocks();
  void factor_blocks();
  void factor_sparse();

  const QpProblem& p_;
  Eigen::VectorXd w_;
  double reg_ = 0.0;
  bool structured_ = false;

  // Block-arrow representation. Rows touching block b are kept as a dense
  // slab (rows x block size) with tail entries kept per row; rows touching no block
  // are kept only as tail entries.
  struct Block {
    std::vector<int> vars;
    std::vector<Eigen::Index> rows;
    Eigen::MatrixXd slab;  // rows x |vars|
    Eigen::MatrixXd B, C;  // |vars| x |vars|, |vars| x T
    Eigen::LLT<Eigen::MatrixXd> fact;
    Eigen::Index offset = 0;  // first row in stacked_
  };
  std::vector<Block> blocks_;
  std::vector<Eigen::Index> tail_only_rows_;
  std::vector<std::vector<std::pair<int, double>>> row_tail_;  // tail entries of every row
  std::vector<int> var_block_, var_local_;
  std::vector<int> tail_vars_;
  Eigen::VectorXd p_diag_;
  Eigen::MatrixXd schur_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> stacked_;  // L_b^{-1} C_b for all blocks, stacked by rows
  Eigen::LDLT<Eigen::MatrixXd> schur_fact_;

  // Generic sparse fallback.
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> sparse_fact_;
  bool analyzed_ = false;
  Eigen::Index analyzed_nnz_ = -1;
};

}  // namespace shapelasso::detail
