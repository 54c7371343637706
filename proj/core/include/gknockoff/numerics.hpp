#pragma once

#include "gknockoff/common.hpp"

namespace gk::numerics {

// Orthonormal basis of the orthogonal complement of col(A) in R^n.
// Returns U with n rows and n - rank(A) columns, A^T U = 0, U^T U = I.
// Rank decisions use a relative pivot threshold of 1e-10 against the largest pivot.
Matrix qr_null_space(const Matrix& a);

struct CholeskyResult {
  Matrix l;       // lower triangular, L L^T = A + jitter * I
  double jitter;  // smallest ladder value that made the factorization succeed
};

// Cholesky of a symmetric positive semidefinite matrix with escalating diagonal
// jitter 0, 1e-12, 1e-10, 1e-8, ... (factor 100 per step). Throws ErrorKind::not_psd
// once the ladder passes jitter_max without a successful factorization.
CholeskyResult cholesky_psd(const Matrix& a, double jitter_max);

// Smallest eigenvalue of a symmetric matrix.
double sym_eig_min(const Matrix& a);

// M = I - B (B^T B)^{-1} B^T, the orthogonal projector onto the complement of col(B).
// B must have full column rank; B with zero columns yields the identity.
Matrix projection_complement(const Matrix& b);

}  // namespace gk::numerics
