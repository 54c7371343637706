#pragma once

#include "gknockoff/common.hpp"

#include <vector>

namespace gk::model {

// A set of linear hypotheses d_j^T beta = 0 together with the completion used to
// rotate the regression into (penalized, unpenalized) coordinates.
struct TransformSpec {
  Matrix d;          // m x p, full row rank: the tested contrasts
  Matrix e;          // (p - m) x p, orthonormal completion of the row space of d
  Matrix z;          // p x m,       [d; e]^{-1} = [z, f]
  Matrix f;          // p x (p - m)
  double condition;  // condition number of [d; e]

  Index m() const { return d.rows(); }
  Index p() const { return d.cols(); }
};

// Adjacent-difference contrasts for a 1-D coefficient profile:
// row j has -1 at column j and +1 at column j+1; shape (p-1) x p.
Matrix build_difference_matrix(Index p);

// Adjacent-source contrasts for k stacked p-dimensional coefficient vectors:
// block row i compares sources i and i+1 via [+I, -I]; shape (k-1)p x kp.
Matrix build_integration_matrix(Index k, Index p);

// Completes d with an orthonormal basis of the complement of its row space and
// inverts the completed square matrix.
TransformSpec complete_basis(const Matrix& d);

// Regression rotated so the tested contrasts carry their own design columns.
struct TransformedProblem {
  Matrix xstar;       // n x m; columns scaled to squared norm n
  Vector ystar;       // n
  Matrix m_proj;      // n x n symmetric idempotent projector used to build xstar
  Vector col_scales;  // m; multiply fitted coefficients elementwise to undo scaling
  Matrix sigma;       // m x m Gram matrix xstar^T xstar (symmetrized)
  double sigma_min_eig = 0.0;
  double orth_residual = 0.0;  // max |xstar^T B| over the projected-out basis B

  Index n() const { return xstar.rows(); }
  Index m() const { return xstar.cols(); }
  Vector unscale(const Vector& theta) const;
};

// Projects out X*f (and optional extra unpenalized columns) and rescales the
// contrast design. Requires n > p + extra columns unless allow_underdetermined.
TransformedProblem transform(const Matrix& x, const Vector& y, const TransformSpec& spec,
                             const Matrix& extra_unpenalized = Matrix(),
                             bool allow_underdetermined = false);

struct MultiSource {
  std::vector<Matrix> x_blocks;  // one design per source, common column count
  std::vector<Vector> y_blocks;
};

struct Stacked {
  Matrix x;  // block-diagonal design, sum(n_k) x (K * p)
  Vector y;
  std::vector<Index> source_of_row;
};

Stacked stack_multisource(const MultiSource& data);

}  // namespace gk::model
