#include "gknockoff/knockoff.hpp"

#include "gknockoff/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace gk::knockoff {

Vector select_s(const Matrix& sigma) {
  require(sigma.rows() == sigma.cols(), ErrorKind::dimension, "Sigma must be square");
  require_finite(sigma, "Sigma");
  const Index m = sigma.rows();
  require(m >= 1, ErrorKind::dimension, "Sigma is empty");

  const double nbar = sigma.diagonal().mean();
  require(nbar > 0.0, ErrorKind::not_pd, "Sigma has a nonpositive diagonal");
  const double diag_spread = (sigma.diagonal().array() - nbar).abs().maxCoeff();
  require(diag_spread <= 1e-6 * nbar, ErrorKind::invalid_argument,
          "Sigma diagonal is not normalized to a common value");

  const double lam_min = numerics::sym_eig_min(sigma / nbar);
  require(lam_min > 1e-10, ErrorKind::not_pd, "correlation matrix is not positive definite");

  const double level = std::min(2.0 * lam_min, 1.0) * (1.0 - 1e-6) * nbar;
  return Vector::Constant(m, level);
}

Ensemble construct(const model::TransformedProblem& prob, const Vector& s, Rng& rng) {
  const Index n = prob.n();
  const Index m = prob.m();
  require(m >= 1, ErrorKind::dimension, "no contrasts to copy");
  require(n >= 2 * m, ErrorKind::dimension,
          "knockoff construction needs at least 2m rows; augment or screen first");
  require(s.size() == m, ErrorKind::dimension, "s has wrong length");
  require_finite(s, "s");
  require(s.minCoeff() >= 0.0, ErrorKind::invalid_argument, "s must be nonnegative");

  Ensemble ens;
  ens.s = s;

  if (s.maxCoeff() == 0.0) {
    // Degenerate but Gram-valid: the copy coincides with the original design.
    ens.xtilde = prob.xstar;
    ens.c_lower = Matrix::Zero(m, m);
  } else {
    Eigen::LLT<Matrix> llt(prob.sigma);
    require(llt.info() == Eigen::Success, ErrorKind::not_pd,
            "transformed Gram matrix is not positive definite");
    const Matrix sig_inv_s = llt.solve(Matrix(s.asDiagonal()));

    Matrix a = 2.0 * Matrix(s.asDiagonal()) - s.asDiagonal() * sig_inv_s;
    a = 0.5 * (a + a.transpose());
    const double jitter_cap = 1e-6 * (1.0 + a.cwiseAbs().maxCoeff());
    numerics::CholeskyResult chol = numerics::cholesky_psd(a, jitter_cap);
    ens.c_lower = chol.l;
    ens.jitter = chol.jitter;

    // The copy's noise directions must survive the sample-space projector: every
    // statistic sees the design through it, so the Gram identities have to hold
    // after a further multiplication by m_proj. Draw the directions orthogonal to
    // the projected-out subspace as well, falling back to the plain complement of
    // the design when the constrained complement is too small (the row-augmented
    // boundary n = 2m leaves no room).
    Matrix u0;
    if (prob.m_proj.rows() == n && prob.m_proj.cols() == n) {
      Matrix span(n, m + n);
      span.leftCols(m) = prob.xstar;
      span.rightCols(n) = Matrix::Identity(n, n) - prob.m_proj;
      u0 = numerics::qr_null_space(span);
    }
    if (u0.cols() < m) u0 = numerics::qr_null_space(prob.xstar);
    require(u0.cols() >= m, ErrorKind::dimension,
            "orthogonal complement of the design is too small");
    Matrix g(u0.cols(), m);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Index i = 0; i < g.rows(); ++i) {
      for (Index j = 0; j < g.cols(); ++j) g(i, j) = gauss(rng);
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix qg = qr.householderQ() * Matrix::Identity(u0.cols(), m);
    const Matrix utilde = u0 * qg;

    ens.xtilde = prob.xstar * (Matrix::Identity(m, m) - sig_inv_s) +
                 utilde * ens.c_lower.transpose();
  }

  const double tol = 1e-6 * (1.0 + prob.sigma.cwiseAbs().maxCoeff());
  ens.gram_r1 = (ens.xtilde.transpose() * ens.xtilde - prob.sigma).cwiseAbs().maxCoeff();
  ens.gram_r2 = (ens.xtilde.transpose() * prob.xstar -
                 (prob.sigma - Matrix(s.asDiagonal()))).cwiseAbs().maxCoeff();
  require(ens.gram_r1 <= tol && ens.gram_r2 <= tol, ErrorKind::numeric,
          "knockoff Gram identities violated beyond tolerance");
  return ens;
}

Augmented extend_augment(const model::TransformedProblem& prob, double noise_variance,
                         Rng& rng) {
  const Index n = prob.n();
  const Index m = prob.m();
  require(noise_variance >= 0.0, ErrorKind::invalid_argument, "noise variance must be >= 0");
  require(n > m && n < 2 * m, ErrorKind::dimension,
          "row augmentation applies only when m < n < 2m");

  const Index add = 2 * m - n;
  Augmented out;
  out.added = add;
  out.prob = prob;

  out.prob.xstar = Matrix::Zero(2 * m, m);
  out.prob.xstar.topRows(n) = prob.xstar;

  out.prob.ystar = Vector(2 * m);
  out.prob.ystar.head(n) = prob.ystar;
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sd = std::sqrt(noise_variance);
  for (Index i = 0; i < add; ++i) out.prob.ystar(n + i) = sd * gauss(rng);

  out.prob.m_proj = Matrix::Zero(2 * m, 2 * m);
  out.prob.m_proj.topLeftCorner(n, n) = prob.m_proj;
  out.prob.m_proj.bottomRightCorner(add, add) = Matrix::Identity(add, add);

  // Gram matrix and column scales are untouched by zero rows.
  return out;
}

double estimate_noise_variance(const Matrix& x, const Vector& y) {
  require_finite(y, "y");
  const Index n = y.size();
  require(n >= 1, ErrorKind::dimension, "empty response");
  if (x.size() == 0 || x.cols() == 0) {
    return y.squaredNorm() / static_cast<double>(n);
  }
  require_finite(x, "X");
  require(x.rows() == n, ErrorKind::dimension, "X and y row counts differ");
  require(n > x.cols(), ErrorKind::dimension,
          "noise variance needs more rows than columns");

  const Vector beta = Eigen::ColPivHouseholderQR<Matrix>(x).solve(y);
  const double rss = (y - x * beta).squaredNorm();
  return rss / static_cast<double>(n - x.cols());
}

double w_signed_max(double entry_main, double entry_knock) {
  if (entry_main == entry_knock) return 0.0;
  const double mx = std::max(entry_main, entry_knock);
  return entry_main > entry_knock ? mx : -mx;
}

namespace {

Matrix augmented_design(const model::TransformedProblem& prob, const Matrix& xtilde) {
  require(xtilde.rows() == prob.n() && xtilde.cols() == prob.m(), ErrorKind::dimension,
          "knockoff copy shape does not match the problem");
  Matrix xx(prob.n(), 2 * prob.m());
  xx.leftCols(prob.m()) = prob.xstar;
  xx.rightCols(prob.m()) = xtilde;
  return xx;
}

}  // namespace

Stats signed_max_stats(const model::TransformedProblem& prob, const Matrix& xtilde,
                       const lasso::LambdaGrid* grid) {
  const Matrix xx = augmented_design(prob, xtilde);
  lasso::LambdaGrid g = grid ? *grid : lasso::default_grid(xx, prob.ystar);
  lasso::PathResult path = lasso::path_entry_times(xx, prob.ystar, g);

  const Index m = prob.m();
  Stats st;
  st.kind = StatKind::signed_max;
  st.entry_main = path.entry_lambdas.head(m);
  st.entry_knock = path.entry_lambdas.tail(m);
  st.w = Vector(m);
  for (Index j = 0; j < m; ++j) st.w(j) = w_signed_max(st.entry_main(j), st.entry_knock(j));
  return st;
}

Stats lcd_stats(const model::TransformedProblem& prob, const Matrix& xtilde, double lambda) {
  require(lambda > 0.0, ErrorKind::invalid_argument, "lcd statistic needs lambda > 0");
  const Matrix xx = augmented_design(prob, xtilde);
  const lasso::SolveResult sol = lasso::solve_at(xx, prob.ystar, lambda);

  const Index m = prob.m();
  Stats st;
  st.kind = StatKind::lcd;
  st.w = Vector(m);
  for (Index j = 0; j < m; ++j) st.w(j) = std::abs(sol.beta(j)) - std::abs(sol.beta(m + j));
  return st;
}

Selection knockoff_plus_threshold(const Vector& w, double q) {
  require_finite(w, "W");
  require(q >= 0.0 && q <= 1.0, ErrorKind::invalid_argument, "q must lie in [0, 1]");

  Selection sel;
  sel.w = w;

  std::vector<double> levels;
  levels.reserve(static_cast<std::size_t>(w.size()));
  for (Index j = 0; j < w.size(); ++j) {
    if (w(j) != 0.0) levels.push_back(std::abs(w(j)));
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  for (double t : levels) {
    Index neg = 0, pos = 0;
    for (Index j = 0; j < w.size(); ++j) {
      if (w(j) <= -t) ++neg;
      if (w(j) >= t) ++pos;
    }
    const double fdp_hat = (1.0 + static_cast<double>(neg)) /
                           std::max<double>(1.0, static_cast<double>(pos));
    if (fdp_hat <= q) {
      sel.threshold = t;
      break;
    }
  }

  if (sel.threshold < kInf) {
    for (Index j = 0; j < w.size(); ++j) {
      if (w(j) >= sel.threshold) sel.selected.push_back(j);
    }
  }
  return sel;
}

}  // namespace gk::knockoff
