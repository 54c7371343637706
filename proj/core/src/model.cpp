#include "gknockoff/model.hpp"

#include "gknockoff/numerics.hpp"

#include <cmath>

namespace gk::model {

Matrix build_difference_matrix(Index p) {
  require(p >= 2, ErrorKind::invalid_argument, "difference matrix needs p >= 2");
  Matrix d = Matrix::Zero(p - 1, p);
  for (Index j = 0; j < p - 1; ++j) {
    d(j, j) = -1.0;
    d(j, j + 1) = 1.0;
  }
  return d;
}

Matrix build_integration_matrix(Index k, Index p) {
  require(k >= 2, ErrorKind::invalid_argument, "integration matrix needs k >= 2 sources");
  require(p >= 1, ErrorKind::invalid_argument, "integration matrix needs p >= 1");
  Matrix d = Matrix::Zero((k - 1) * p, k * p);
  for (Index b = 0; b < k - 1; ++b) {
    d.block(b * p, b * p, p, p) = Matrix::Identity(p, p);
    d.block(b * p, (b + 1) * p, p, p) = -Matrix::Identity(p, p);
  }
  return d;
}

TransformSpec complete_basis(const Matrix& d) {
  require_finite(d, "D");
  const Index m = d.rows();
  const Index p = d.cols();
  require(m >= 1, ErrorKind::dimension, "D must have at least one row");
  require(m <= p, ErrorKind::dimension, "D cannot have more rows than columns");

  {
    Eigen::ColPivHouseholderQR<Matrix> qr(d.transpose());
    const Matrix& r = qr.matrixQR();
    const double top = std::abs(r(0, 0));
    Index rank = 0;
    for (Index i = 0; i < std::min(p, m); ++i) {
      if (std::abs(r(i, i)) > 1e-10 * top) ++rank;
    }
    require(rank == m, ErrorKind::rank_deficient, "D does not have full row rank");
  }

  TransformSpec spec;
  spec.d = d;
  spec.e = numerics::qr_null_space(d.transpose()).transpose();  // (p - m) x p

  Matrix dt(p, p);
  dt.topRows(m) = d;
  dt.bottomRows(p - m) = spec.e;

  Eigen::PartialPivLU<Matrix> lu(dt);
  spec.condition = 1.0 / lu.rcond();
  require(std::isfinite(spec.condition) && spec.condition <= 1e12, ErrorKind::rank_deficient,
          "completed contrast basis is numerically singular");

  Matrix inv = lu.solve(Matrix::Identity(p, p));
  spec.z = inv.leftCols(m);
  spec.f = inv.rightCols(p - m);
  return spec;
}

Vector TransformedProblem::unscale(const Vector& theta) const {
  require(theta.size() == col_scales.size(), ErrorKind::dimension,
          "coefficient vector does not match the transform width");
  return col_scales.cwiseProduct(theta);
}

TransformedProblem transform(const Matrix& x, const Vector& y, const TransformSpec& spec,
                             const Matrix& extra_unpenalized, bool allow_underdetermined) {
  require_finite(x, "X");
  require_finite(y, "y");
  const Index n = x.rows();
  const Index p = x.cols();
  const Index m = spec.m();
  require(y.size() == n, ErrorKind::dimension, "X and y row counts differ");
  require(spec.p() == p, ErrorKind::dimension, "contrast spec width does not match X");

  Index r = 0;
  if (extra_unpenalized.size() > 0) {
    require_finite(extra_unpenalized, "unpenalized columns");
    require(extra_unpenalized.rows() == n, ErrorKind::dimension,
            "unpenalized columns must have one row per observation");
    r = extra_unpenalized.cols();
  }
  require(allow_underdetermined || n > p + r, ErrorKind::dimension,
          "need n > p + unpenalized columns for the transformed regression");

  Matrix basis(n, (p - m) + r);
  basis.leftCols(p - m) = x * spec.f;
  if (r > 0) basis.rightCols(r) = extra_unpenalized;

  TransformedProblem prob;
  prob.m_proj = numerics::projection_complement(basis);
  prob.ystar = prob.m_proj * y;

  Matrix x0 = prob.m_proj * (x * spec.z);
  prob.col_scales = Vector(m);
  prob.xstar = Matrix(n, m);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (Index j = 0; j < m; ++j) {
    const double nrm = x0.col(j).norm();
    require(nrm > 1e-12 * root_n, ErrorKind::not_pd,
            "a tested contrast has no signal left after projection");
    const double c = root_n / nrm;
    prob.col_scales(j) = c;
    prob.xstar.col(j) = x0.col(j) * c;
  }

  Matrix gram = prob.xstar.transpose() * prob.xstar;
  prob.sigma = 0.5 * (gram + gram.transpose());
  prob.sigma_min_eig = numerics::sym_eig_min(prob.sigma);
  require(prob.sigma_min_eig > 1e-10, ErrorKind::not_pd,
          "transformed Gram matrix is not positive definite");

  prob.orth_residual =
      basis.cols() ? (prob.xstar.transpose() * basis).cwiseAbs().maxCoeff() : 0.0;
  return prob;
}

Stacked stack_multisource(const MultiSource& data) {
  const std::size_t k = data.x_blocks.size();
  require(k >= 1, ErrorKind::invalid_argument, "need at least one source");
  require(data.y_blocks.size() == k, ErrorKind::dimension,
          "design and response block counts differ");

  const Index p = data.x_blocks[0].cols();
  Index n = 0;
  for (std::size_t i = 0; i < k; ++i) {
    require(data.x_blocks[i].cols() == p, ErrorKind::dimension,
            "all sources must share a column count");
    require(data.x_blocks[i].rows() == data.y_blocks[i].size(), ErrorKind::dimension,
            "block design and response sizes differ");
    n += data.x_blocks[i].rows();
  }

  Stacked out;
  out.x = Matrix::Zero(n, static_cast<Index>(k) * p);
  out.y = Vector(n);
  out.source_of_row.resize(static_cast<std::size_t>(n));
  Index row = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const Index nk = data.x_blocks[i].rows();
    out.x.block(row, static_cast<Index>(i) * p, nk, p) = data.x_blocks[i];
    out.y.segment(row, nk) = data.y_blocks[i];
    for (Index t = 0; t < nk; ++t) out.source_of_row[static_cast<std::size_t>(row + t)] = static_cast<Index>(i);
    row += nk;
  }
  return out;
}

}  // namespace gk::model
