#pragma once

#include "gknockoff/common.hpp"
#include "gknockoff/knockoff.hpp"
#include "gknockoff/model.hpp"

#include <vector>

namespace gk::baselines {

struct TTests {
  Vector t;  // one statistic per contrast row
  Vector p;  // two-sided p-values, t distribution with n - p_cols dof
};

// OLS t-tests of d_j^T beta = 0 on the raw regression.
TTests contrast_t_tests(const Matrix& x, const Vector& y, const Matrix& d);

struct StepUpResult {
  Vector pvalues;
  double p_cut = 0.0;            // largest admitted sorted p-value; 0 when none
  std::vector<Index> selected;   // ascending contrast indices
};

// Benjamini-Yekutieli step-up at level q with the log-factor correction
// c_m = sum_{i<=m} 1/i (valid under arbitrary dependence).
StepUpResult by_procedure(const Matrix& x, const Vector& y, const Matrix& d, double q);

// Negative control: replaces the knockoff copy by a row-permuted X* and runs the
// same statistic + threshold machinery. Does not control FDR; used to quantify how
// badly a permutation "knockoff" fails. A non-null permutation overrides the RNG.
// lcd_lambda <= 0 selects the geometric-mean level of the augmented default grid.
knockoff::Selection permutation_filter(const model::TransformedProblem& prob, double q,
                                       knockoff::StatKind stat, Rng& rng,
                                       const std::vector<Index>* permutation = nullptr,
                                       double lcd_lambda = 0.0);

}  // namespace gk::baselines
