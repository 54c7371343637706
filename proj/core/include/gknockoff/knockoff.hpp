#pragma once

#include "gknockoff/common.hpp"
#include "gknockoff/lasso.hpp"
#include "gknockoff/model.hpp"

#include <string>
#include <vector>

namespace gk::knockoff {

// Equicorrelated decoupling weights: s_j = min(2 lambda_min(Sigma/nbar), 1) * nbar,
// shrunk by (1 - 1e-6), where nbar is the common diagonal of Sigma.
Vector select_s(const Matrix& sigma);

struct Ensemble {
  Matrix xtilde;   // n x m second-order copy of the contrast design
  Vector s;
  Matrix c_lower;  // lower-triangular L with L L^T = 2S - S Sigma^{-1} S (+ jitter I)
  double jitter = 0.0;
  double gram_r1 = 0.0;  // max |xtilde^T xtilde - sigma|
  double gram_r2 = 0.0;  // max |xtilde^T xstar - (sigma - diag(s))|
};

// Builds the knockoff copy X~ = X*(I - Sigma^{-1} S) + U~ L^T where U~ is a seeded
// random orthonormal basis orthogonal to both col(X*) and the subspace removed by
// the problem's projector (so the copy survives a further projection); when that
// constrained complement has fewer than m directions — the row-augmented boundary
// n = 2m — it falls back to the plain complement of col(X*). Needs n >= 2m.
Ensemble construct(const model::TransformedProblem& prob, const Vector& s, Rng& rng);

struct Augmented {
  model::TransformedProblem prob;
  Index added = 0;  // pseudo observations appended
};

// Row augmentation for m < n < 2m: appends 2m - n pseudo responses drawn from
// N(0, noise_variance), zero design rows, and an identity block on the projector.
Augmented extend_augment(const model::TransformedProblem& prob, double noise_variance,
                         Rng& rng);

// OLS residual variance ||y - X b||^2 / (n - p); with p = 0 this is ||y||^2 / n.
double estimate_noise_variance(const Matrix& x, const Vector& y);

enum class StatKind { signed_max, lcd };

struct Stats {
  Vector w;            // m antisymmetric feature statistics
  Vector entry_main;   // per-contrast entry lambdas (signed_max only)
  Vector entry_knock;  // per-knockoff entry lambdas (signed_max only)
  StatKind kind = StatKind::signed_max;
};

// Signed-max entry-time statistic: W_j = max(l_j, lt_j) * sign(l_j - lt_j), ties -> 0.
double w_signed_max(double entry_main, double entry_knock);

// Runs the Lasso path on [X*, X~] against y* and forms signed-max statistics.
// A null grid means "use the default grid of the augmented design".
Stats signed_max_stats(const model::TransformedProblem& prob, const Matrix& xtilde,
                       const lasso::LambdaGrid* grid = nullptr);

// Coefficient-difference statistic at a single penalty level:
// W_j = |b_j| - |b_{m+j}| from one Lasso solve on [X*, X~].
Stats lcd_stats(const model::TransformedProblem& prob, const Matrix& xtilde, double lambda);

struct Selection {
  double threshold = kInf;       // +inf when no candidate level passes
  std::vector<Index> selected;   // ascending indices with w_j >= threshold
  Vector w;
};

// Knockoff+ data-dependent threshold at level q over candidate levels {|W_j|} \ {0}.
Selection knockoff_plus_threshold(const Vector& w, double q);

}  // namespace gk::knockoff
