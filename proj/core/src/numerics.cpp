#include "gknockoff/numerics.hpp"

#include <cmath>

namespace gk::numerics {

namespace {

constexpr double kPivotRel = 1e-10;

void require_symmetric(const Matrix& a, const char* name) {
  require(a.rows() == a.cols(), ErrorKind::dimension, std::string(name) + " must be square");
  require_finite(a, name);
  const double scale = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
  const double asym = a.size() ? (a - a.transpose()).cwiseAbs().maxCoeff() : 0.0;
  require(asym <= 1e-10 * (1.0 + scale), ErrorKind::invalid_argument,
          std::string(name) + " is not symmetric");
}

// Plain lower Cholesky with strictly positive pivots; returns false on failure.
bool try_cholesky(const Matrix& a, double delta, Matrix& l) {
  const Index n = a.rows();
  l = a;
  l.diagonal().array() += delta;
  for (Index j = 0; j < n; ++j) {
    double d = l(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    l(j, j) = d;
    for (Index i = j + 1; i < n; ++i) {
      l(i, j) = (l(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / d;
    }
  }
  l.triangularView<Eigen::StrictlyUpper>().setZero();
  return true;
}

}  // namespace

Matrix qr_null_space(const Matrix& a) {
  require_finite(a, "A");
  const Index n = a.rows();
  if (a.cols() == 0) return Matrix::Identity(n, n);

  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  const Matrix& r = qr.matrixQR();
  const Index kmax = std::min(n, a.cols());
  const double top = kmax ? std::abs(r(0, 0)) : 0.0;
  Index rank = 0;
  for (Index i = 0; i < kmax; ++i) {
    if (std::abs(r(i, i)) > kPivotRel * top) ++rank;
  }

  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  Matrix u = q.rightCols(n - rank);

  const double scale = a.cwiseAbs().maxCoeff();
  if (u.cols() > 0) {
    const double resid = (a.transpose() * u).cwiseAbs().maxCoeff();
    require(resid <= 1e-8 * (1.0 + scale), ErrorKind::numeric,
            "null-space residual exceeds tolerance");
  }
  return u;
}

CholeskyResult cholesky_psd(const Matrix& a, double jitter_max) {
  require_symmetric(a, "A");
  require(jitter_max >= 0.0, ErrorKind::invalid_argument, "jitter_max must be nonnegative");
  const Matrix sym = 0.5 * (a + a.transpose());

  CholeskyResult out;
  double delta = 0.0;
  while (true) {
    if (try_cholesky(sym, delta, out.l)) {
      out.jitter = delta;
      return out;
    }
    delta = (delta == 0.0) ? 1e-12 : delta * 100.0;
    if (delta > jitter_max) break;
  }
  fail(ErrorKind::not_psd, "matrix is not positive semidefinite within the jitter budget");
}

double sym_eig_min(const Matrix& a) {
  require_symmetric(a, "A");
  if (a.rows() == 0) fail(ErrorKind::dimension, "empty matrix has no eigenvalues");
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorKind::numeric, "eigenvalue iteration failed");
  return es.eigenvalues().minCoeff();
}

Matrix projection_complement(const Matrix& b) {
  require_finite(b, "B");
  const Index n = b.rows();
  const Index k = b.cols();
  if (k == 0) return Matrix::Identity(n, n);
  require(k <= n, ErrorKind::dimension, "projector basis has more columns than rows");

  Eigen::ColPivHouseholderQR<Matrix> qr(b);
  const Matrix& r = qr.matrixQR();
  const double top = std::abs(r(0, 0));
  Index rank = 0;
  for (Index i = 0; i < std::min(n, k); ++i) {
    if (std::abs(r(i, i)) > kPivotRel * top) ++rank;
  }
  require(rank == k, ErrorKind::rank_deficient, "projector basis is rank deficient");

  Matrix q1 = qr.householderQ() * Matrix::Identity(n, k);
  Matrix m = Matrix::Identity(n, n) - q1 * q1.transpose();
  return 0.5 * (m + m.transpose());
}

}  // namespace gk::numerics
