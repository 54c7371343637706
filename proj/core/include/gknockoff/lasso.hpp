#pragma once

#include "gknockoff/common.hpp"

namespace gk::lasso {

struct LambdaGrid {
  Vector values;  // strictly decreasing
  double lambda_max = 0.0;
  double ratio = 0.0;

  Index size() const { return values.size(); }
};

// Log-spaced grid from lambda_max = ||X^T y||_inf / n down to lambda_max * ratio.
LambdaGrid default_grid(const Matrix& x, const Vector& y, Index count = 100,
                        double ratio = 1e-3);

struct SolveResult {
  Vector beta;
  double kkt_residual = kInf;
  Index sweeps = 0;
  bool converged = false;
};

// Minimizes (1/2n) ||y - X b||^2 + lambda ||b||_1 by cyclic coordinate descent
// (fixed column order). Converged when the KKT residual drops to 1e-7; gives up
// after 1e5 sweeps and returns the best iterate with converged = false.
SolveResult solve_at(const Matrix& x, const Vector& y, double lambda,
                     const Vector* warm_start = nullptr);

struct PathResult {
  LambdaGrid grid;
  Matrix coefficients;   // grid.size() x d, one row per grid point
  Vector entry_lambdas;  // d; largest grid lambda where |b_j| > 1e-7, 0 if never
  bool all_converged = true;
};

// Solves along the grid from large lambda to small with warm starts.
PathResult path_entry_times(const Matrix& x, const Vector& y, const LambdaGrid& grid);

}  // namespace gk::lasso
