#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gknockoff/baselines.hpp"

#include <algorithm>
#include <cmath>

using gk::Index;
using gk::Matrix;
using gk::Vector;
namespace model = gk::model;
namespace baselines = gk::baselines;

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

bool is_subset(const std::vector<Index>& a, const std::vector<Index>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

TEST_CASE("two-sided p-values match the closed form with two degrees of freedom") {
  // With n - p = 2 the t CDF is F(x) = 1/2 + x / (2 sqrt(2 + x^2)), so the
  // two-sided p-value is 1 - |t| / sqrt(2 + t^2).
  const Index n = 4, p = 2;
  const Matrix x = seeded_matrix(n, p, 3);
  const Vector y = seeded_matrix(n, 1, 4).col(0);
  const Matrix d = Matrix::Identity(p, p);
  const auto tests = baselines::contrast_t_tests(x, y, d);
  for (Index j = 0; j < p; ++j) {
    const double t = std::abs(tests.t(j));
    const double expect = 1.0 - t / std::sqrt(2.0 + t * t);
    CHECK(tests.p(j) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("a single identity contrast reproduces the coefficient t-test") {
  const Index n = 25, p = 3;
  const Matrix x = seeded_matrix(n, p, 13);
  Vector beta(p);
  beta << 1.0, -0.5, 0.2;
  Vector y = x * beta + 0.3 * seeded_matrix(n, 1, 14).col(0);

  Matrix d(1, p);
  d << 0, 1, 0;
  const auto tests = baselines::contrast_t_tests(x, y, d);

  const Vector bh = Eigen::ColPivHouseholderQR<Matrix>(x).solve(y);
  const double s2 = (y - x * bh).squaredNorm() / static_cast<double>(n - p);
  const Matrix cov = s2 * (x.transpose() * x).inverse();
  const double expect_t = bh(1) / std::sqrt(cov(1, 1));
  CHECK(tests.t(0) == doctest::Approx(expect_t).epsilon(1e-10));
}

TEST_CASE("difference contrasts test the gap between adjacent coefficients") {
  const Index n = 30, p = 3;
  const Matrix x = seeded_matrix(n, p, 23);
  Vector beta(p);
  beta << 1.0, 1.0, 4.0;  // only the second gap is real
  const Vector y = x * beta + 0.2 * seeded_matrix(n, 1, 24).col(0);
  const Matrix d = model::build_difference_matrix(p);
  const auto tests = baselines::contrast_t_tests(x, y, d);
  CHECK(std::abs(tests.t(1)) > std::abs(tests.t(0)));
  CHECK(tests.p(1) < 1e-6);
}

TEST_CASE("a response orthogonal to the design yields unit p-values and no selections") {
  const Index n = 20, p = 4;
  const Matrix x = seeded_matrix(n, p, 33);
  Vector noise = seeded_matrix(n, 1, 34).col(0);
  // Project the noise off the column space so every estimate is exactly zero.
  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  const Vector y = noise - x * qr.solve(noise);

  const Matrix d = model::build_difference_matrix(p);
  const auto tests = baselines::contrast_t_tests(x, y, d);
  for (Index j = 0; j < d.rows(); ++j) {
    CHECK(std::abs(tests.t(j)) < 1e-7);
    CHECK(tests.p(j) > 1.0 - 1e-6);
  }
  const auto sel = baselines::by_procedure(x, y, d, 0.2);
  CHECK(sel.selected.empty());
  CHECK(sel.p_cut == 0.0);
}

TEST_CASE("step-up selection finds an overwhelming contrast") {
  const Index n = 60, p = 3;
  const Matrix x = seeded_matrix(n, p, 43);
  Vector beta(p);
  beta << 1.0, 1.0, 6.0;
  const Vector y = x * beta + 0.1 * seeded_matrix(n, 1, 44).col(0);
  const auto sel = baselines::by_procedure(x, y, model::build_difference_matrix(p), 0.1);
  REQUIRE(sel.selected.size() >= 1);
  CHECK(std::find(sel.selected.begin(), sel.selected.end(), Index{1}) != sel.selected.end());
  CHECK(sel.p_cut > 0.0);
}

TEST_CASE("with one contrast the step-up bound is exactly q") {
  const Index n = 40, p = 2;
  const Matrix x = seeded_matrix(n, p, 53);
  Vector beta(p);
  beta << 0.0, 2.0;
  const Vector y = x * beta + seeded_matrix(n, 1, 54).col(0);
  Matrix d(1, p);
  d << -1, 1;
  const auto tests = baselines::contrast_t_tests(x, y, d);
  // c_1 = 1, so the contrast is admitted exactly when p <= q.
  const double pv = tests.p(0);
  const auto below = baselines::by_procedure(x, y, d, std::min(0.999, pv * 1.01));
  const auto above = baselines::by_procedure(x, y, d, pv * 0.99);
  CHECK(below.selected.size() == 1);
  CHECK(above.selected.empty());
}

TEST_CASE("selections grow with the target level") {
  const Index n = 50, p = 6;
  const Matrix x = seeded_matrix(n, p, 63);
  Vector beta(p);
  beta << 0.0, 0.0, 0.6, 0.6, 3.0, 3.0;
  const Vector y = x * beta + 0.8 * seeded_matrix(n, 1, 64).col(0);
  const Matrix d = model::build_difference_matrix(p);
  std::vector<Index> prev;
  for (double q : {0.01, 0.05, 0.1, 0.2, 0.4, 0.8}) {
    const auto sel = baselines::by_procedure(x, y, d, q);
    CHECK(is_subset(prev, sel.selected));
    prev = sel.selected;
  }
}

TEST_CASE("level validation") {
  const Matrix x = seeded_matrix(10, 2, 73);
  const Vector y = seeded_matrix(10, 1, 74).col(0);
  const Matrix d = model::build_difference_matrix(2);
  CHECK_THROWS_AS(baselines::by_procedure(x, y, d, 0.0), gk::Error);
  CHECK_THROWS_AS(baselines::by_procedure(x, y, d, 1.0), gk::Error);
}

TEST_CASE("the identity permutation is a control the filter cannot use") {
  // Identical copies break every tie toward the original column (cyclic descent
  // updates it first), so no statistic is ever negative and there is no signal
  // for the threshold to calibrate against: the filter is maximally fooled.
  const Index n = 40, p = 9;
  const Matrix x = seeded_matrix(n, p, 83);
  Vector beta = Vector::Zero(p);
  for (Index j = 4; j < p; ++j) beta(j) = 2.0;
  const Vector y = x * beta + 0.3 * seeded_matrix(n, 1, 84).col(0);
  const auto spec = model::complete_basis(model::build_difference_matrix(p));
  const auto prob = model::transform(x, y, spec);

  std::vector<Index> identity(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) identity[static_cast<std::size_t>(i)] = i;
  gk::Rng rng(85);
  const auto sel = baselines::permutation_filter(prob, 0.5, gk::knockoff::StatKind::signed_max,
                                                 rng, &identity);
  CHECK(sel.w.minCoeff() >= 0.0);
  // Every contrast whose statistic cleared the threshold is reported, nulls
  // included; nothing pushes back.
  CHECK_FALSE(sel.selected.empty());
  for (Index j : sel.selected) CHECK(sel.w(j) >= sel.threshold);
}

TEST_CASE("a random permutation produces statistics of the right shape") {
  const Index n = 36, p = 7;
  const Matrix x = seeded_matrix(n, p, 93);
  const Vector y = x.col(0) + 0.5 * seeded_matrix(n, 1, 94).col(0);
  const auto spec = model::complete_basis(model::build_difference_matrix(p));
  const auto prob = model::transform(x, y, spec);
  gk::Rng rng(95);
  const auto sel = baselines::permutation_filter(prob, 0.2, gk::knockoff::StatKind::lcd, rng,
                                                 nullptr, 0.05);
  CHECK(sel.w.size() == prob.m());
}

TEST_CASE("forced permutations must cover every row") {
  const Index n = 20, p = 5;
  const Matrix x = seeded_matrix(n, p, 103);
  const Vector y = seeded_matrix(n, 1, 104).col(0);
  const auto spec = model::complete_basis(model::build_difference_matrix(p));
  const auto prob = model::transform(x, y, spec);
  std::vector<Index> wrong(3, 0);
  gk::Rng rng(105);
  CHECK_THROWS_AS(baselines::permutation_filter(prob, 0.2, gk::knockoff::StatKind::signed_max,
                                                rng, &wrong),
                  gk::Error);
}
