#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gknockoff/knockoff.hpp"

#include <algorithm>
#include <cmath>

using gk::Index;
using gk::Matrix;
using gk::Vector;
namespace model = gk::model;
namespace knockoff = gk::knockoff;

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

// A transformed problem from a seeded piecewise design with difference contrasts.
model::TransformedProblem make_problem(Index n, Index p, std::uint64_t seed) {
  const Matrix x = seeded_matrix(n, p, seed);
  Vector beta(p);
  for (Index j = 0; j < p; ++j) beta(j) = (j < p / 2) ? 0.5 : -0.5;
  gk::Rng rng(seed + 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector y = x * beta;
  for (Index i = 0; i < n; ++i) y(i) += gauss(rng);
  const auto spec = model::complete_basis(model::build_difference_matrix(p));
  return model::transform(x, y, spec);
}

}  // namespace

TEST_CASE("decoupling weights on an identity-correlation design") {
  // Sigma = nbar * I has lambda_min(Sigma/nbar) = 1, so s_j = (1 - 1e-6) * nbar.
  const double nbar = 25.0;
  const Matrix sigma = nbar * Matrix::Identity(4, 4);
  const Vector s = knockoff::select_s(sigma);
  REQUIRE(s.size() == 4);
  for (Index j = 0; j < 4; ++j) {
    CHECK(s(j) == doctest::Approx(nbar * (1.0 - 1e-6)).epsilon(1e-12));
  }
}

TEST_CASE("decoupling weights under moderate and strong equicorrelation") {
  // 2x2 correlation rho: lambda_min = 1 - rho. rho = 0.5 caps at 1; rho = 0.9
  // gives 2 * 0.1 = 0.2.
  const double nbar = 10.0;
  for (double rho : {0.5, 0.9}) {
    Matrix sigma(2, 2);
    sigma << nbar, rho * nbar, rho * nbar, nbar;
    const Vector s = knockoff::select_s(sigma);
    const double expect = std::min(2.0 * (1.0 - rho), 1.0) * (1.0 - 1e-6) * nbar;
    CHECK(s(0) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(s(1) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("decoupling weights reject a singular correlation") {
  Matrix sigma(2, 2);
  sigma << 5.0, 5.0, 5.0, 5.0;
  CHECK_THROWS_AS(knockoff::select_s(sigma), gk::Error);
}

TEST_CASE("decoupling weights reject unequal diagonals") {
  Matrix sigma(2, 2);
  sigma << 5.0, 0.0, 0.0, 7.0;
  CHECK_THROWS_AS(knockoff::select_s(sigma), gk::Error);
}

TEST_CASE("knockoff copy reproduces both second-moment identities") {
  const auto prob = make_problem(40, 11, 7);  // m = 10 contrasts
  const Vector s = knockoff::select_s(prob.sigma);
  gk::Rng rng(1234);
  const auto ens = knockoff::construct(prob, s, rng);

  REQUIRE(ens.xtilde.rows() == 40);
  REQUIRE(ens.xtilde.cols() == 10);
  const double scale = 1e-6 * (1.0 + max_abs(prob.sigma));
  CHECK(max_abs(ens.xtilde.transpose() * ens.xtilde - prob.sigma) <= scale);
  Matrix cross_expect = prob.sigma;
  cross_expect.diagonal() -= s;
  CHECK(max_abs(ens.xtilde.transpose() * prob.xstar - cross_expect) <= scale);
  CHECK(ens.gram_r1 <= scale);
  CHECK(ens.gram_r2 <= scale);
}

TEST_CASE("different seeds give different copies with the same geometry") {
  const auto prob = make_problem(36, 9, 17);
  const Vector s = knockoff::select_s(prob.sigma);
  gk::Rng r1(1), r2(2);
  const auto e1 = knockoff::construct(prob, s, r1);
  const auto e2 = knockoff::construct(prob, s, r2);
  CHECK(max_abs(e1.xtilde - e2.xtilde) > 1e-6);
  const double scale = 1e-6 * (1.0 + max_abs(prob.sigma));
  CHECK(max_abs(e2.xtilde.transpose() * e2.xtilde - prob.sigma) <= scale);
}

TEST_CASE("zero decoupling weights return the design itself") {
  const auto prob = make_problem(30, 7, 27);
  const Vector s = Vector::Zero(prob.m());
  gk::Rng rng(5);
  const auto ens = knockoff::construct(prob, s, rng);
  CHECK(max_abs(ens.xtilde - prob.xstar) == 0.0);
  CHECK(ens.jitter == 0.0);
}

TEST_CASE("construction requires enough rows for the complement basis") {
  // n = 12 < 2m = 18.
  const auto prob = make_problem(12, 10, 37);
  const Vector s = knockoff::select_s(prob.sigma);
  gk::Rng rng(5);
  CHECK_THROWS_AS(knockoff::construct(prob, s, rng), gk::Error);
}

TEST_CASE("row augmentation adds the right count and keeps the Gram matrix") {
  const auto prob = make_problem(16, 11, 47);  // n = 16, m = 10, need 2m - n = 4 rows
  gk::Rng rng(9);
  const auto aug = knockoff::extend_augment(prob, 1.0, rng);
  CHECK(aug.added == 4);
  REQUIRE(aug.prob.n() == 20);
  CHECK(max_abs(aug.prob.xstar.bottomRows(4)) == 0.0);
  CHECK(max_abs(aug.prob.xstar.topRows(16) - prob.xstar) == 0.0);
  CHECK(max_abs(aug.prob.sigma - prob.sigma) == 0.0);
  CHECK(max_abs(aug.prob.m_proj.bottomRightCorner(4, 4) - Matrix::Identity(4, 4)) == 0.0);
  CHECK(max_abs(aug.prob.m_proj.topLeftCorner(16, 16) - prob.m_proj) == 0.0);
  // Augmentation must allow a knockoff build afterwards.
  const Vector s = knockoff::select_s(aug.prob.sigma);
  gk::Rng rng2(11);
  const auto ens = knockoff::construct(aug.prob, s, rng2);
  const double scale = 1e-6 * (1.0 + max_abs(aug.prob.sigma));
  CHECK(max_abs(ens.xtilde.transpose() * ens.xtilde - aug.prob.sigma) <= scale);
}

TEST_CASE("augmented pseudo responses have the requested variance") {
  const auto prob = make_problem(16, 11, 57);
  const double target = 4.0;
  double sum = 0.0, sumsq = 0.0;
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) {
    gk::Rng rng(1000 + r);
    const auto aug = knockoff::extend_augment(prob, target, rng);
    const Vector tail = aug.prob.ystar.tail(aug.added);
    sum += tail.sum();
    sumsq += tail.squaredNorm();
  }
  const double count = 4.0 * reps;
  const double mean = sum / count;
  const double var = sumsq / count - mean * mean;
  CHECK(std::abs(mean) < 0.1);
  CHECK(var == doctest::Approx(target).epsilon(0.1));
}

TEST_CASE("augmentation rejects designs outside its row range") {
  const auto wide = make_problem(40, 11, 67);  // n = 40 >= 2m = 20: no need
  gk::Rng rng(3);
  CHECK_THROWS_AS(knockoff::extend_augment(wide, 1.0, rng), gk::Error);
}

TEST_CASE("noise variance estimate is near zero for a noiseless fit") {
  const Matrix x = seeded_matrix(30, 4, 77);
  Vector beta(4);
  beta << 1, -2, 0.5, 3;
  const Vector y = x * beta;
  CHECK(knockoff::estimate_noise_variance(x, y) < 1e-16);
}

TEST_CASE("noise variance estimate is consistent under Gaussian noise") {
  const Index n = 500, p = 5;
  const Matrix x = seeded_matrix(n, p, 87);
  gk::Rng rng(88);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector y = x.rowwise().sum();
  for (Index i = 0; i < n; ++i) y(i) += gauss(rng);
  const double est = knockoff::estimate_noise_variance(x, y);
  CHECK(est == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("noise variance with an empty design is the mean square response") {
  Vector y(4);
  y << 1, 2, 3, 4;
  const Matrix x(4, 0);
  CHECK(knockoff::estimate_noise_variance(x, y) ==
        doctest::Approx(30.0 / 4.0).epsilon(1e-14));
}

TEST_CASE("signed-max statistic worked values") {
  CHECK(knockoff::w_signed_max(3.0, 1.0) == 3.0);
  CHECK(knockoff::w_signed_max(1.0, 3.0) == -3.0);
  CHECK(knockoff::w_signed_max(2.0, 2.0) == 0.0);
  CHECK(knockoff::w_signed_max(0.0, 0.0) == 0.0);
  CHECK(knockoff::w_signed_max(0.0, 0.5) == -0.5);
}

TEST_CASE("selection threshold on a worked example") {
  // w = (3, 2, 1.5, -1), q = 0.7. Candidates t in {1, 1.5, 2, 3}:
  // t = 1: (1 + #{w <= -1}) / #{w >= 1} = (1 + 1) / 3 <= 0.7, so the smallest
  // level is admitted.
  Vector w(4);
  w << 3, 2, 1.5, -1;
  const auto sel = knockoff::knockoff_plus_threshold(w, 0.7);
  CHECK(sel.threshold == 1.0);
  REQUIRE(sel.selected.size() == 3);
  CHECK(sel.selected[0] == 0);
  CHECK(sel.selected[1] == 1);
  CHECK(sel.selected[2] == 2);
}

TEST_CASE("selection threshold moves up when the level tightens") {
  // Same w with q = 0.5: t = 1 gives 2/3 > 0.5; t = 1.5 gives (1+0)/3 <= 0.5.
  Vector w(4);
  w << 3, 2, 1.5, -1;
  const auto sel = knockoff::knockoff_plus_threshold(w, 0.5);
  CHECK(sel.threshold == 1.5);
  REQUIRE(sel.selected.size() == 3);
}

TEST_CASE("a level no candidate satisfies selects nothing") {
  // Same w with q = 0.3: t = 1.5 gives 1/3 > 0.3, t = 2 gives 1/2, t = 3 gives 1/1.
  Vector w(4);
  w << 3, 2, 1.5, -1;
  const auto sel = knockoff::knockoff_plus_threshold(w, 0.3);
  CHECK(sel.threshold == gk::kInf);
  CHECK(sel.selected.empty());
}

TEST_CASE("all-negative statistics select nothing") {
  Vector w(3);
  w << -1, -2, -0.5;
  const auto sel = knockoff::knockoff_plus_threshold(w, 0.9);
  CHECK(sel.threshold == gk::kInf);
  CHECK(sel.selected.empty());
}

TEST_CASE("zero statistics are not candidate levels") {
  Vector w(3);
  w << 0, 0, 0;
  const auto sel = knockoff::knockoff_plus_threshold(w, 0.9);
  CHECK(sel.threshold == gk::kInf);
  CHECK(sel.selected.empty());
}

TEST_CASE("path statistics favor true contrasts on a strong signal") {
  // One large change in the middle; the matching contrast should get a large
  // positive statistic while a far-away null contrast should not dominate.
  const Index n = 80, p = 9;
  const Matrix x = seeded_matrix(n, p, 97);
  Vector beta = Vector::Zero(p);
  for (Index j = 4; j < p; ++j) beta(j) = 3.0;  // change between 3 and 4
  gk::Rng noise(98);
  std::normal_distribution<double> gauss(0.0, 0.5);
  Vector y = x * beta;
  for (Index i = 0; i < n; ++i) y(i) += gauss(noise);

  const auto spec = model::complete_basis(model::build_difference_matrix(p));
  const auto prob = model::transform(x, y, spec);
  const Vector s = knockoff::select_s(prob.sigma);
  gk::Rng rng(99);
  const auto ens = knockoff::construct(prob, s, rng);
  const auto st = knockoff::signed_max_stats(prob, ens.xtilde);
  REQUIRE(st.w.size() == 8);
  Index best = 0;
  st.w.maxCoeff(&best);
  CHECK(best == 3);
  CHECK(st.w(3) > 0.0);
}

TEST_CASE("coefficient-difference statistics are antisymmetric in the pair") {
  const auto prob = make_problem(60, 9, 107);
  const Vector s = knockoff::select_s(prob.sigma);
  gk::Rng rng(108);
  const auto ens = knockoff::construct(prob, s, rng);
  const auto st = knockoff::lcd_stats(prob, ens.xtilde, 0.05);
  REQUIRE(st.w.size() == prob.m());
  CHECK(st.kind == knockoff::StatKind::lcd);
  // Swapping the roles of design and copy flips every statistic's sign:
  // rebuild a problem whose "design" is the copy.
  model::TransformedProblem swapped = prob;
  swapped.xstar = ens.xtilde;
  const auto st2 = knockoff::lcd_stats(swapped, prob.xstar, 0.05);
  CHECK(max_abs(st.w + st2.w) < 1e-5);
}
