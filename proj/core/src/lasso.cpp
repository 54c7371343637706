#include "gknockoff/lasso.hpp"

#include <cmath>

namespace gk::lasso {

namespace {

constexpr double kKktTol = 1e-7;
constexpr double kActiveEps = 1e-7;
constexpr Index kMaxSweeps = 100000;

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// Shared precomputations for one design: coordinate descent then runs on the
// Gram matrix, so a sweep touches O(d) memory per changed coordinate instead of
// a length-n column, and the stationarity gradient comes along for free.
struct Workspace {
  Matrix gram;   // X^T X
  Vector xty;    // X^T y
  Vector colsq;  // column squared norms / n
  double inv_n = 0.0;

  Workspace(const Matrix& x, const Vector& y)
      : gram(x.transpose() * x),
        xty(x.transpose() * y),
        colsq(gram.diagonal() / static_cast<double>(x.rows())),
        inv_n(1.0 / static_cast<double>(x.rows())) {}

  Vector gradient(const Vector& beta) const { return (xty - gram * beta) * inv_n; }
};

double kkt_residual(const Vector& grad, const Vector& beta, double lambda) {
  double worst = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    const double v = beta(j) != 0.0 ? std::abs(grad(j) - lambda * (beta(j) > 0 ? 1.0 : -1.0))
                                    : std::max(0.0, std::abs(grad(j)) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// Once the sweep dynamics settle on a support, the minimizer restricted to that
// support solves a linear system. Attempt it, but accept only a solution that
// keeps every assumed sign and passes the full stationarity check — otherwise
// the support was wrong and the sweeps continue. Descent still makes every
// support decision, so order-dependent tie-breaking is unchanged.
bool try_support_refine(const Workspace& ws, double lambda, Vector& beta, Vector& grad,
                        SolveResult& out) {
  std::vector<Index> active;
  for (Index j = 0; j < beta.size(); ++j) {
    if (beta(j) != 0.0) active.push_back(j);
  }
  if (active.empty()) return false;

  const Index k = static_cast<Index>(active.size());
  const double n = 1.0 / ws.inv_n;
  Matrix gaa(k, k);
  Vector rhs(k);
  for (Index a = 0; a < k; ++a) {
    rhs(a) = ws.xty(active[static_cast<std::size_t>(a)]) -
             n * lambda * sign_of(beta(active[static_cast<std::size_t>(a)]));
    for (Index b = 0; b < k; ++b) {
      gaa(a, b) = ws.gram(active[static_cast<std::size_t>(a)],
                          active[static_cast<std::size_t>(b)]);
    }
  }

  Eigen::LLT<Matrix> llt(gaa);
  if (llt.info() != Eigen::Success) return false;  // collinear support: sweeps decide
  const Vector sol = llt.solve(rhs);
  for (Index a = 0; a < k; ++a) {
    if (sign_of(sol(a)) != sign_of(beta(active[static_cast<std::size_t>(a)]))) return false;
  }

  Vector beta_try = Vector::Zero(beta.size());
  for (Index a = 0; a < k; ++a) beta_try(active[static_cast<std::size_t>(a)]) = sol(a);
  Vector grad_try = ws.gradient(beta_try);
  const double kkt = kkt_residual(grad_try, beta_try, lambda);
  if (kkt > kKktTol) return false;

  beta = std::move(beta_try);
  grad = std::move(grad_try);
  out.kkt_residual = kkt;
  out.converged = true;
  return true;
}

// Cyclic coordinate descent at one penalty level. `grad` must hold the current
// gradient (xty - gram*beta)/n on entry; on exit it is freshly recomputed so
// incremental rounding can never masquerade as convergence.
void solve_core(const Workspace& ws, double lambda, Vector& beta, Vector& grad,
                SolveResult& out) {
  const Index d = beta.size();
  bool refine_blocked = false;  // support already refused since it last changed
  for (Index sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool support_changed = false;
    for (Index j = 0; j < d; ++j) {
      if (ws.colsq(j) <= 0.0) continue;  // constant-zero column stays inactive
      const double bj = beta(j);
      const double rho = grad(j) + ws.colsq(j) * bj;
      const double bnew = soft_threshold(rho, lambda) / ws.colsq(j);
      if (bnew != bj) {
        grad.noalias() -= ws.gram.col(j) * ((bnew - bj) * ws.inv_n);
        beta(j) = bnew;
      }
      support_changed = support_changed || sign_of(bnew) != sign_of(bj);
    }
    out.sweeps = sweep + 1;
    out.kkt_residual = kkt_residual(grad, beta, lambda);
    if (out.kkt_residual <= kKktTol) {
      grad = ws.gradient(beta);
      out.kkt_residual = kkt_residual(grad, beta, lambda);
      if (out.kkt_residual <= kKktTol) {
        out.converged = true;
        return;
      }
    }
    if (support_changed) {
      refine_blocked = false;
    } else if (!refine_blocked) {
      if (try_support_refine(ws, lambda, beta, grad, out)) return;
      refine_blocked = true;  // same support would be refused again
    }
  }
  grad = ws.gradient(beta);
  out.kkt_residual = kkt_residual(grad, beta, lambda);
  out.converged = out.kkt_residual <= kKktTol;
}

void check_inputs(const Matrix& x, const Vector& y) {
  require_finite(x, "X");
  require_finite(y, "y");
  require(x.rows() == y.size(), ErrorKind::dimension, "X and y row counts differ");
}

}  // namespace

LambdaGrid default_grid(const Matrix& x, const Vector& y, Index count, double ratio) {
  check_inputs(x, y);
  require(x.rows() >= 1 && x.cols() >= 1, ErrorKind::dimension, "empty design");
  require(count >= 2, ErrorKind::invalid_argument, "grid needs at least two points");
  require(ratio > 0.0 && ratio < 1.0, ErrorKind::invalid_argument, "grid ratio must be in (0,1)");

  const double lmax = (x.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
  require(lmax > 0.0, ErrorKind::invalid_argument,
          "response is orthogonal to every design column; no path exists");

  LambdaGrid g;
  g.lambda_max = lmax;
  g.ratio = ratio;
  g.values = Vector(count);
  for (Index i = 0; i < count; ++i) {
    g.values(i) = lmax * std::pow(ratio, static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return g;
}

SolveResult solve_at(const Matrix& x, const Vector& y, double lambda, const Vector* warm_start) {
  check_inputs(x, y);
  require(lambda >= 0.0, ErrorKind::invalid_argument, "lambda must be nonnegative");

  const Index d = x.cols();
  SolveResult out;
  out.beta = Vector::Zero(d);
  if (warm_start) {
    require(warm_start->size() == d, ErrorKind::dimension, "warm start has wrong length");
    require_finite(*warm_start, "warm start");
    out.beta = *warm_start;
  }

  const Workspace ws(x, y);
  Vector grad = ws.gradient(out.beta);
  solve_core(ws, lambda, out.beta, grad, out);
  return out;
}

PathResult path_entry_times(const Matrix& x, const Vector& y, const LambdaGrid& grid) {
  check_inputs(x, y);
  require(grid.size() >= 1, ErrorKind::invalid_argument, "empty lambda grid");
  for (Index i = 1; i < grid.size(); ++i) {
    require(grid.values(i) < grid.values(i - 1), ErrorKind::invalid_argument,
            "lambda grid must be strictly decreasing");
  }

  const Index d = x.cols();
  PathResult out;
  out.grid = grid;
  out.coefficients = Matrix::Zero(grid.size(), d);
  out.entry_lambdas = Vector::Zero(d);

  const Workspace ws(x, y);
  Vector beta = Vector::Zero(d);
  Vector grad = ws.gradient(beta);  // solve_core leaves grad fresh for the next point
  for (Index g = 0; g < grid.size(); ++g) {
    SolveResult sol;
    solve_core(ws, grid.values(g), beta, grad, sol);
    out.all_converged = out.all_converged && sol.converged;
    out.coefficients.row(g) = beta.transpose();
    for (Index j = 0; j < d; ++j) {
      if (out.entry_lambdas(j) == 0.0 && std::abs(beta(j)) > kActiveEps) {
        out.entry_lambdas(j) = grid.values(g);
      }
    }
  }
  return out;
}

}  // namespace gk::lasso
