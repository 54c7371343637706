#include "gknockoff/pipeline.hpp"

#include "gknockoff/fusis.hpp"
#include "gknockoff/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gk::pipeline {

namespace {

Matrix take_rows(const Matrix& a, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = a.row(rows[i]);
  return out;
}

Vector take_rows(const Vector& v, const std::vector<Index>& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = v(rows[i]);
  return out;
}

// True when every row of d is an adjacent two-column contrast (+-1 pattern), i.e.
// the coefficient vector is a 1-D profile and screening locations match D rows.
bool is_profile_contrast(const Matrix& d) {
  if (d.rows() != d.cols() - 1) return false;
  for (Index j = 0; j < d.rows(); ++j) {
    for (Index c = 0; c < d.cols(); ++c) {
      const double want = (c == j) ? 1.0 : (c == j + 1 ? -1.0 : 0.0);
      if (d(j, c) != want && d(j, c) != -want) return false;
    }
    if (d(j, j) != -d(j, j + 1)) return false;
  }
  return true;
}

std::vector<Index> default_bandwidths(Index p) {
  std::vector<Index> grid;
  for (Index h : {p / 100, p / 40, p / 20}) {
    if (h >= 1 && 2 * h <= p) grid.push_back(h);
  }
  if (grid.empty()) grid.push_back(1);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

struct FilterOutcome {
  knockoff::Selection sel;
  Diagnostics diag;
};

// Shared tail of every route: decouple, score, threshold.
FilterOutcome run_filter(const model::TransformedProblem& prob, const DetectOptions& opt,
                         Rng& rng) {
  FilterOutcome out;
  out.diag.sigma_min_eig = prob.sigma_min_eig;

  const Vector s = knockoff::select_s(prob.sigma);
  const knockoff::Ensemble ens = knockoff::construct(prob, s, rng);
  out.diag.jitter = ens.jitter;
  out.diag.gram_r1 = ens.gram_r1;
  out.diag.gram_r2 = ens.gram_r2;

  knockoff::Stats st;
  if (opt.stat == knockoff::StatKind::signed_max) {
    Matrix xx(prob.n(), 2 * prob.m());
    xx.leftCols(prob.m()) = prob.xstar;
    xx.rightCols(prob.m()) = ens.xtilde;
    const lasso::LambdaGrid grid =
        lasso::default_grid(xx, prob.ystar, opt.grid_count, opt.grid_ratio);
    out.diag.lambda_max = grid.lambda_max;
    st = knockoff::signed_max_stats(prob, ens.xtilde, &grid);
  } else {
    Matrix xx(prob.n(), 2 * prob.m());
    xx.leftCols(prob.m()) = prob.xstar;
    xx.rightCols(prob.m()) = ens.xtilde;
    const lasso::LambdaGrid grid =
        lasso::default_grid(xx, prob.ystar, opt.grid_count, opt.grid_ratio);
    out.diag.lambda_max = grid.lambda_max;
    const double lam = opt.lcd_lambda.value_or(grid.lambda_max * std::sqrt(opt.grid_ratio));
    st = knockoff::lcd_stats(prob, ens.xtilde, lam);
  }

  out.sel = knockoff::knockoff_plus_threshold(st.w, opt.q);
  return out;
}

DetectReport detect_direct(const Matrix& x, const Vector& y, const model::TransformSpec& spec,
                           const DetectOptions& opt, const Matrix& extra, Rng& rng) {
  const model::TransformedProblem prob = model::transform(x, y, spec, extra);
  FilterOutcome fo = run_filter(prob, opt, rng);

  DetectReport rep;
  rep.method_used = Method::gknock;
  rep.diag = fo.diag;
  rep.diag.spec_condition = spec.condition;
  rep.selected = fo.sel.selected;
  rep.tested_rows.resize(static_cast<std::size_t>(spec.m()));
  std::iota(rep.tested_rows.begin(), rep.tested_rows.end(), Index{0});
  rep.w = fo.sel.w;
  rep.threshold = fo.sel.threshold;
  return rep;
}

DetectReport detect_augmented(const Matrix& x, const Vector& y,
                              const model::TransformSpec& spec, const DetectOptions& opt,
                              const Matrix& extra, Rng& rng) {
  const Index n = x.rows();
  const Index m = spec.m();

  double noise_var;
  Matrix x_keep;
  Vector y_keep;
  Matrix extra_keep;

  if (opt.noise_variance) {
    noise_var = *opt.noise_variance;
    require(noise_var >= 0.0, ErrorKind::invalid_argument, "noise variance must be >= 0");
    x_keep = x;
    y_keep = y;
    extra_keep = extra;
  } else {
    auto [held, kept] = split_rows(n, opt.split_fraction, rng);
    const Index n1 = static_cast<Index>(held.size());
    const Index n2 = static_cast<Index>(kept.size());
    Matrix design1(n1, x.cols() + extra.cols());
    design1.leftCols(x.cols()) = take_rows(x, held);
    if (extra.cols() > 0) design1.rightCols(extra.cols()) = take_rows(extra, held);
    require(n1 > design1.cols(), ErrorKind::routing,
            "held-out half too small to estimate the noise variance; pass it explicitly");
    require(n2 > m && n2 < 2 * m, ErrorKind::routing,
            "after the variance split the kept half leaves the augmentation regime; "
            "pass the noise variance explicitly or use the screening pipeline");
    noise_var = knockoff::estimate_noise_variance(design1, take_rows(y, held));
    x_keep = take_rows(x, kept);
    y_keep = take_rows(y, kept);
    if (extra.cols() > 0) extra_keep = take_rows(extra, kept);
  }

  const model::TransformedProblem prob = model::transform(x_keep, y_keep, spec, extra_keep);
  const knockoff::Augmented aug = knockoff::extend_augment(prob, noise_var, rng);
  FilterOutcome fo = run_filter(aug.prob, opt, rng);

  DetectReport rep;
  rep.method_used = Method::egknock;
  rep.diag = fo.diag;
  rep.diag.spec_condition = spec.condition;
  rep.diag.noise_variance = noise_var;
  rep.diag.augmented_rows = aug.added;
  rep.selected = fo.sel.selected;
  rep.tested_rows.resize(static_cast<std::size_t>(m));
  std::iota(rep.tested_rows.begin(), rep.tested_rows.end(), Index{0});
  rep.w = fo.sel.w;
  rep.threshold = fo.sel.threshold;
  return rep;
}

DetectReport detect_screened(const Matrix& x, const Vector& y,
                             const model::TransformSpec& spec, const DetectOptions& opt,
                             const Matrix& extra, Rng& rng) {
  require(is_profile_contrast(spec.d), ErrorKind::routing,
          "screen-then-filter needs adjacent-difference contrasts on a 1-D profile");
  const Index n = x.rows();
  const Index p = spec.p();

  auto [screen_rows, filter_rows] = split_rows(n, opt.split_fraction, rng);
  const Index n2 = static_cast<Index>(filter_rows.size());
  require(static_cast<Index>(screen_rows.size()) >= 2, ErrorKind::routing,
          "screening half is empty");

  const Index keep_top = opt.keep_top.value_or(n2 / 2 - 1);
  require(keep_top >= 1, ErrorKind::routing, "filter half too small to keep any contrast");
  require(2 * keep_top <= n2, ErrorKind::routing,
          "screened set too large for the filter half");

  fusis::ScreenOptions sopt;
  sopt.keep_top = keep_top;
  const std::vector<Index> grid =
      opt.bandwidth_grid.empty() ? default_bandwidths(p) : opt.bandwidth_grid;
  const Matrix x1 = take_rows(x, screen_rows);
  const Vector y1 = take_rows(y, screen_rows);
  const fusis::ScreenResult scr = (grid.size() == 1)
                                      ? fusis::screen(x1, y1, grid.front(), sopt)
                                      : fusis::select_bandwidth(x1, y1, grid, sopt);

  DetectReport rep;
  rep.method_used = Method::hgknock;
  rep.diag.spec_condition = spec.condition;
  rep.diag.screened_count = static_cast<Index>(scr.selected.size());
  rep.diag.screen_bandwidth = scr.bandwidth;
  rep.tested_rows = scr.selected;

  if (scr.selected.empty()) {
    rep.w = Vector();
    return rep;  // nothing survived screening: no discoveries
  }

  // Constrain the dropped contrasts to zero: restrict the coefficient space to the
  // null space of the unscreened D rows and re-express kept rows there.
  std::vector<bool> kept_row(static_cast<std::size_t>(spec.m()), false);
  for (Index r : scr.selected) kept_row[static_cast<std::size_t>(r)] = true;
  Matrix d_drop(spec.m() - static_cast<Index>(scr.selected.size()), p);
  Matrix d_keep(static_cast<Index>(scr.selected.size()), p);
  Index rd = 0, rk = 0;
  for (Index r = 0; r < spec.m(); ++r) {
    if (kept_row[static_cast<std::size_t>(r)]) {
      d_keep.row(rk++) = spec.d.row(r);
    } else {
      d_drop.row(rd++) = spec.d.row(r);
    }
  }

  Matrix reducer;  // p x (kept + 1) null-space basis of the dropped contrasts
  if (d_drop.rows() == 0) {
    reducer = Matrix::Identity(p, p);
  } else {
    reducer = numerics::qr_null_space(d_drop.transpose());
  }

  const Matrix x2 = take_rows(x, filter_rows) * reducer;
  const Vector y2 = take_rows(y, filter_rows);
  Matrix extra2;
  if (extra.cols() > 0) extra2 = take_rows(extra, filter_rows);

  const model::TransformSpec spec_red = model::complete_basis(d_keep * reducer);
  DetectOptions inner = opt;
  inner.method = Method::gknock;
  DetectReport inner_rep = detect_direct(x2, y2, spec_red, inner, extra2, rng);

  rep.diag.sigma_min_eig = inner_rep.diag.sigma_min_eig;
  rep.diag.jitter = inner_rep.diag.jitter;
  rep.diag.gram_r1 = inner_rep.diag.gram_r1;
  rep.diag.gram_r2 = inner_rep.diag.gram_r2;
  rep.diag.lambda_max = inner_rep.diag.lambda_max;
  rep.w = inner_rep.w;
  rep.threshold = inner_rep.threshold;
  for (Index j : inner_rep.selected) {
    rep.selected.push_back(scr.selected[static_cast<std::size_t>(j)]);
  }
  std::sort(rep.selected.begin(), rep.selected.end());
  return rep;
}

}  // namespace

std::pair<std::vector<Index>, std::vector<Index>> split_rows(Index n, double fraction,
                                                             Rng& rng) {
  require(n >= 2, ErrorKind::dimension, "cannot split fewer than two rows");
  require(fraction > 0.0 && fraction < 1.0, ErrorKind::invalid_argument,
          "split fraction must lie strictly between 0 and 1");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<Index> pick(0, i);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
  }

  const Index n1 = static_cast<Index>(std::floor(fraction * static_cast<double>(n)));
  std::vector<Index> first(order.begin(), order.begin() + n1);
  std::vector<Index> second(order.begin() + n1, order.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {std::move(first), std::move(second)};
}

DetectReport detect(const Matrix& x, const Vector& y, const model::TransformSpec& spec,
                    const DetectOptions& opt, const Matrix& extra_unpenalized) {
  require(opt.q > 0.0 && opt.q <= 1.0, ErrorKind::invalid_argument, "q must lie in (0, 1]");
  const Index n = x.rows();
  const Index m = spec.m();
  Rng rng(opt.seed);

  Method method = opt.method;
  if (method == Method::automatic) {
    if (n >= 2 * m) {
      method = Method::gknock;
    } else if (n > m) {
      method = Method::egknock;
    } else {
      method = Method::hgknock;
    }
  }

  switch (method) {
    case Method::gknock:
      require(n >= 2 * m, ErrorKind::routing, "direct filter needs n >= 2m rows");
      return detect_direct(x, y, spec, opt, extra_unpenalized, rng);
    case Method::egknock:
      require(n > m && n < 2 * m, ErrorKind::routing,
              "row augmentation applies only when m < n < 2m");
      return detect_augmented(x, y, spec, opt, extra_unpenalized, rng);
    case Method::hgknock:
      return detect_screened(x, y, spec, opt, extra_unpenalized, rng);
    default:
      fail(ErrorKind::invalid_argument, "unknown method");
  }
}

}  // namespace gk::pipeline
