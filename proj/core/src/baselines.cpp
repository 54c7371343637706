#include "gknockoff/baselines.hpp"

#include "gknockoff/lasso.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gk::baselines {

TTests contrast_t_tests(const Matrix& x, const Vector& y, const Matrix& d) {
  require_finite(x, "X");
  require_finite(y, "y");
  require_finite(d, "D");
  const Index n = x.rows();
  const Index p = x.cols();
  require(y.size() == n, ErrorKind::dimension, "X and y row counts differ");
  require(d.cols() == p, ErrorKind::dimension, "contrast width does not match X");
  require(n > p, ErrorKind::dimension, "t-tests need n > p");

  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  require(qr.rank() == p, ErrorKind::rank_deficient, "design is rank deficient");
  const Vector beta = qr.solve(y);
  const double dof = static_cast<double>(n - p);
  const double s2 = (y - x * beta).squaredNorm() / dof;

  const Matrix gram = x.transpose() * x;
  Eigen::LLT<Matrix> llt(0.5 * (gram + gram.transpose()));
  require(llt.info() == Eigen::Success, ErrorKind::rank_deficient,
          "normal equations are singular");
  const Matrix v = llt.solve(d.transpose());  // p x m

  boost::math::students_t dist(dof);
  const Index m = d.rows();
  TTests out;
  out.t = Vector(m);
  out.p = Vector(m);
  for (Index j = 0; j < m; ++j) {
    const double num = d.row(j).dot(beta);
    const double var = s2 * d.row(j).dot(v.col(j));
    if (var <= 0.0) {
      out.t(j) = (num == 0.0) ? 0.0 : (num > 0 ? kInf : -kInf);
      out.p(j) = (num == 0.0) ? 1.0 : 0.0;
      continue;
    }
    out.t(j) = num / std::sqrt(var);
    out.p(j) = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t(j))));
  }
  return out;
}

StepUpResult by_procedure(const Matrix& x, const Vector& y, const Matrix& d, double q) {
  require(q > 0.0 && q < 1.0, ErrorKind::invalid_argument, "q must lie in (0, 1)");
  const TTests tests = contrast_t_tests(x, y, d);
  const Index m = d.rows();

  double cm = 0.0;
  for (Index i = 1; i <= m; ++i) cm += 1.0 / static_cast<double>(i);

  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return tests.p(a) < tests.p(b); });

  StepUpResult out;
  out.pvalues = tests.p;
  Index kstar = 0;
  for (Index k = m; k >= 1; --k) {
    const double bound = static_cast<double>(k) * q / (static_cast<double>(m) * cm);
    if (tests.p(order[static_cast<std::size_t>(k - 1)]) <= bound) {
      kstar = k;
      break;
    }
  }
  if (kstar > 0) {
    out.p_cut = tests.p(order[static_cast<std::size_t>(kstar - 1)]);
    for (Index i = 0; i < kstar; ++i) out.selected.push_back(order[static_cast<std::size_t>(i)]);
    std::sort(out.selected.begin(), out.selected.end());
  }
  return out;
}

knockoff::Selection permutation_filter(const model::TransformedProblem& prob, double q,
                                       knockoff::StatKind stat, Rng& rng,
                                       const std::vector<Index>* permutation,
                                       double lcd_lambda) {
  const Index n = prob.n();
  std::vector<Index> perm;
  if (permutation) {
    require(static_cast<Index>(permutation->size()) == n, ErrorKind::dimension,
            "permutation length must equal the row count");
    perm = *permutation;
  } else {
    perm.resize(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (Index i = n - 1; i > 0; --i) {
      std::uniform_int_distribution<Index> pick(0, i);
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
    }
  }

  Matrix x_perm(n, prob.m());
  for (Index i = 0; i < n; ++i) x_perm.row(i) = prob.xstar.row(perm[static_cast<std::size_t>(i)]);

  knockoff::Stats st;
  if (stat == knockoff::StatKind::signed_max) {
    st = knockoff::signed_max_stats(prob, x_perm);
  } else {
    double lam = lcd_lambda;
    if (lam <= 0.0) {
      const Index m = prob.m();
      Matrix aug(n, 2 * m);
      aug.leftCols(m) = prob.xstar;
      aug.rightCols(m) = x_perm;
      const lasso::LambdaGrid grid = lasso::default_grid(aug, prob.ystar, 100, 1e-3);
      lam = grid.lambda_max * std::sqrt(1e-3);
    }
    st = knockoff::lcd_stats(prob, x_perm, lam);
  }
  return knockoff::knockoff_plus_threshold(st.w, q);
}

}  // namespace gk::baselines
