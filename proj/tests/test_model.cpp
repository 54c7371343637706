#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gknockoff/model.hpp"

#include <cmath>

using gk::Index;
using gk::Matrix;
using gk::Vector;
namespace model = gk::model;

namespace {

Matrix seeded_matrix(Index rows, Index cols, std::uint64_t seed) {
  gk::Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) a(i, j) = gauss(rng);
  }
  return a;
}

double max_abs(const Matrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("difference matrix pattern for p = 3") {
  const Matrix d = model::build_difference_matrix(3);
  Matrix expect(2, 3);
  expect << -1, 1, 0, 0, -1, 1;
  CHECK(max_abs(d - expect) == 0.0);
}

TEST_CASE("difference matrix for p = 2 is a single row") {
  const Matrix d = model::build_difference_matrix(2);
  REQUIRE(d.rows() == 1);
  CHECK(d(0, 0) == -1.0);
  CHECK(d(0, 1) == 1.0);
}

TEST_CASE("difference matrix rows sum to zero and have full rank") {
  const Matrix d = model::build_difference_matrix(5);
  REQUIRE(d.rows() == 4);
  REQUIRE(d.cols() == 5);
  CHECK(max_abs(d.rowwise().sum()) == 0.0);
  CHECK(Eigen::ColPivHouseholderQR<Matrix>(d.transpose()).rank() == 4);
}

TEST_CASE("integration matrix for two sources of one coefficient") {
  const Matrix d = model::build_integration_matrix(2, 1);
  REQUIRE(d.rows() == 1);
  REQUIRE(d.cols() == 2);
  CHECK(d(0, 0) == 1.0);
  CHECK(d(0, 1) == -1.0);
}

TEST_CASE("integration matrix block pattern for three sources of two coefficients") {
  const Matrix d = model::build_integration_matrix(3, 2);
  REQUIRE(d.rows() == 4);
  REQUIRE(d.cols() == 6);
  Matrix expect = Matrix::Zero(4, 6);
  expect.block(0, 0, 2, 2) = Matrix::Identity(2, 2);
  expect.block(0, 2, 2, 2) = -Matrix::Identity(2, 2);
  expect.block(2, 2, 2, 2) = Matrix::Identity(2, 2);
  expect.block(2, 4, 2, 2) = -Matrix::Identity(2, 2);
  CHECK(max_abs(d - expect) == 0.0);
}

TEST_CASE("completion of the p = 3 difference matrix") {
  const auto spec = model::complete_basis(model::build_difference_matrix(3));
  REQUIRE(spec.e.rows() == 1);
  // The complement of the difference rows is the constant vector.
  const double root3 = 1.0 / std::sqrt(3.0);
  CHECK(std::abs(std::abs(spec.e(0, 0)) - root3) < 1e-12);
  CHECK(max_abs(spec.e - spec.e(0, 0) * Matrix::Ones(1, 3)) < 1e-12);

  Matrix dt(3, 3);
  dt.topRows(2) = spec.d;
  dt.bottomRows(1) = spec.e;
  Matrix zf(3, 3);
  zf.leftCols(2) = spec.z;
  zf.rightCols(1) = spec.f;
  CHECK(max_abs(dt * zf - Matrix::Identity(3, 3)) < 1e-12);
}

TEST_CASE("completion of a square invertible matrix has no free block") {
  Matrix d(2, 2);
  d << 2, 1, 1, 1;
  const auto spec = model::complete_basis(d);
  CHECK(spec.e.rows() == 0);
  CHECK(spec.f.cols() == 0);
  CHECK(max_abs(d * spec.z - Matrix::Identity(2, 2)) < 1e-12);
}

TEST_CASE("completion rejects rank-deficient contrasts") {
  Matrix d(2, 3);
  d << 1, 0, 0, 2, 0, 0;
  CHECK_THROWS_AS(model::complete_basis(d), gk::Error);
}

TEST_CASE("completion inverse works on a seeded rectangular spec") {
  const Matrix d = seeded_matrix(4, 9, 17);
  const auto spec = model::complete_basis(d);
  Matrix dt(9, 9);
  dt.topRows(4) = spec.d;
  dt.bottomRows(5) = spec.e;
  Matrix zf(9, 9);
  zf.leftCols(4) = spec.z;
  zf.rightCols(5) = spec.f;
  CHECK(max_abs(dt * zf - Matrix::Identity(9, 9)) < 1e-10);
  CHECK(max_abs(spec.e * spec.e.transpose() - Matrix::Identity(5, 5)) < 1e-10);
  CHECK(spec.condition > 0.0);
}

TEST_CASE("transform with a square spec projects nothing") {
  // With as many contrasts as coefficients there is no unpenalized block.
  Matrix d(2, 2);
  d << 1, 0, 0, 1;
  const auto spec = model::complete_basis(d);
  const Matrix x = seeded_matrix(12, 2, 5);
  const Vector y = seeded_matrix(12, 1, 6).col(0);
  const auto prob = model::transform(x, y, spec);
  CHECK(max_abs(prob.m_proj - Matrix::Identity(12, 12)) < 1e-12);
  CHECK(max_abs(prob.ystar - y) < 1e-12);
  // Columns are x columns rescaled to squared norm n.
  for (Index j = 0; j < 2; ++j) {
    CHECK(prob.xstar.col(j).squaredNorm() == doctest::Approx(12.0).epsilon(1e-12));
  }
}

TEST_CASE("transformed design is orthogonal to the projected-out block") {
  const Matrix x = seeded_matrix(40, 10, 23);
  const Vector y = seeded_matrix(40, 1, 24).col(0);
  const auto spec = model::complete_basis(model::build_difference_matrix(10));
  const auto prob = model::transform(x, y, spec);

  CHECK(max_abs(prob.xstar.transpose() * (x * spec.f)) < 1e-8);
  CHECK(max_abs(prob.m_proj * prob.m_proj - prob.m_proj) < 1e-8);
  CHECK(prob.sigma_min_eig > 1e-10);
  for (Index j = 0; j < prob.m(); ++j) {
    CHECK(prob.xstar.col(j).squaredNorm() == doctest::Approx(40.0).epsilon(1e-10));
  }
}

TEST_CASE("unpenalized extras are projected out too") {
  const Matrix x = seeded_matrix(50, 8, 31);
  const Vector y = seeded_matrix(50, 1, 32).col(0);
  const Matrix extra = seeded_matrix(50, 2, 33);
  const auto spec = model::complete_basis(model::build_difference_matrix(8));
  const auto prob = model::transform(x, y, spec, extra);
  CHECK(max_abs(prob.xstar.transpose() * extra) < 1e-8);
  CHECK(max_abs(prob.m_proj * extra) < 1e-8);
}

TEST_CASE("noiseless contrasts are recovered by unpenalized refit") {
  const Index n = 60, p = 12;
  const Matrix x = seeded_matrix(n, p, 41);
  Vector beta(p);
  for (Index j = 0; j < p; ++j) beta(j) = (j < 6) ? -0.8 : 1.3;  // one change at row 5
  const Vector y = x * beta;

  const auto spec = model::complete_basis(model::build_difference_matrix(p));
  const auto prob = model::transform(x, y, spec);
  const Vector theta =
      Eigen::ColPivHouseholderQR<Matrix>(prob.xstar).solve(prob.ystar);
  const Vector recovered = prob.unscale(theta);
  const Vector expect = spec.d * beta;
  CHECK(max_abs(recovered - expect) < 1e-6);
}

TEST_CASE("transform rejects too few rows unless screening is intended") {
  const Matrix x = seeded_matrix(8, 10, 51);
  const Vector y = seeded_matrix(8, 1, 52).col(0);
  const auto spec = model::complete_basis(model::build_difference_matrix(10));
  CHECK_THROWS_AS(model::transform(x, y, spec), gk::Error);
}

TEST_CASE("multisource stacking is block diagonal") {
  model::MultiSource ms;
  ms.x_blocks.push_back(seeded_matrix(3, 2, 61));
  ms.x_blocks.push_back(seeded_matrix(4, 2, 62));
  ms.y_blocks.push_back(seeded_matrix(3, 1, 63).col(0));
  ms.y_blocks.push_back(seeded_matrix(4, 1, 64).col(0));

  const auto st = model::stack_multisource(ms);
  REQUIRE(st.x.rows() == 7);
  REQUIRE(st.x.cols() == 4);
  CHECK(max_abs(st.x.block(0, 0, 3, 2) - ms.x_blocks[0]) == 0.0);
  CHECK(max_abs(st.x.block(3, 2, 4, 2) - ms.x_blocks[1]) == 0.0);
  CHECK(max_abs(st.x.block(0, 2, 3, 2)) == 0.0);
  CHECK(max_abs(st.x.block(3, 0, 4, 2)) == 0.0);
  CHECK(st.source_of_row[0] == 0);
  CHECK(st.source_of_row[6] == 1);
  CHECK(max_abs(st.y.head(3) - ms.y_blocks[0]) == 0.0);
}
