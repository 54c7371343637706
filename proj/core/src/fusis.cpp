#include "gknockoff/fusis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gk::fusis {

MarginalGammas marginal_gammas(const Matrix& x, const Vector& y) {
  require_finite(x, "X");
  require_finite(y, "y");
  const Index n = x.rows();
  const Index p = x.cols();
  require(y.size() == n, ErrorKind::dimension, "X and y row counts differ");
  require(n >= 2, ErrorKind::dimension, "need at least two rows to standardize");

  MarginalGammas out;
  out.values = Vector::Zero(p);
  out.zero_variance.assign(static_cast<std::size_t>(p), false);
  for (Index j = 0; j < p; ++j) {
    Vector col = x.col(j);
    col.array() -= col.mean();
    const double nrm = col.norm();
    if (nrm <= 1e-12 * std::sqrt(static_cast<double>(n))) {
      out.zero_variance[static_cast<std::size_t>(j)] = true;
      continue;
    }
    out.values(j) = col.dot(y) / nrm;
  }
  return out;
}

Vector fused_stat(const Vector& gammas, Index h) {
  require_finite(gammas, "gammas");
  const Index p = gammas.size();
  require(h >= 1, ErrorKind::invalid_argument, "bandwidth must be >= 1");
  require(2 * h <= p, ErrorKind::invalid_argument, "bandwidth too large for the profile");

  Vector stats = Vector::Constant(p - 1, -kInf);
  // Location l (0-based) separates columns l and l+1; windows need l+1-h >= 0
  // and l+h <= p-1.
  for (Index l = h - 1; l <= p - h - 1; ++l) {
    double acc = 0.0;
    for (Index i = 1; i <= h; ++i) {
      acc += std::abs(gammas(l + 1 - i) - gammas(l + i));
    }
    stats(l) = acc / static_cast<double>(h);
  }
  return stats;
}

namespace {

std::vector<Index> rank_locations(const Vector& stats) {
  std::vector<Index> order(static_cast<std::size_t>(stats.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (stats(a) != stats(b)) return stats(a) > stats(b);
    return a < b;  // ties -> smaller location
  });
  return order;
}

}  // namespace

ScreenResult screen(const Matrix& x, const Vector& y, Index h, const ScreenOptions& opt) {
  const bool have_threshold = std::isfinite(opt.threshold);
  const bool have_rank = opt.keep_top >= 0;
  require(have_threshold != have_rank, ErrorKind::invalid_argument,
          "choose exactly one of threshold or keep_top");

  const MarginalGammas mg = marginal_gammas(x, y);
  ScreenResult out;
  out.bandwidth = h;
  out.stats = fused_stat(mg.values, h);

  if (have_threshold) {
    for (Index l = 0; l < out.stats.size(); ++l) {
      if (out.stats(l) >= opt.threshold && std::isfinite(out.stats(l))) {
        out.selected.push_back(l);
      }
    }
  } else {
    const Index valid = x.cols() - 2 * h + 1;
    const Index k = std::min(opt.keep_top, valid);
    const std::vector<Index> order = rank_locations(out.stats);
    out.selected.assign(order.begin(), order.begin() + k);
    std::sort(out.selected.begin(), out.selected.end());
  }
  return out;
}

double segment_r2(const Matrix& x, const Vector& y, const std::vector<Index>& breaks) {
  require_finite(x, "X");
  require_finite(y, "y");
  const Index n = x.rows();
  const Index p = x.cols();
  require(y.size() == n, ErrorKind::dimension, "X and y row counts differ");
  for (std::size_t i = 0; i < breaks.size(); ++i) {
    require(breaks[i] >= 0 && breaks[i] <= p - 2, ErrorKind::invalid_argument,
            "break location out of range");
    if (i > 0) {
      require(breaks[i] > breaks[i - 1], ErrorKind::invalid_argument,
              "break locations must be strictly increasing");
    }
  }

  // Pool columns within each segment [prev+1, b] (0-based, inclusive).
  const Index groups = static_cast<Index>(breaks.size()) + 1;
  Matrix pooled(n, groups);
  Index lo = 0;
  for (Index g = 0; g < groups; ++g) {
    const Index hi = (g < groups - 1) ? breaks[static_cast<std::size_t>(g)] : p - 1;
    pooled.col(g) = x.middleCols(lo, hi - lo + 1).rowwise().sum();
    lo = hi + 1;
  }

  const double tss = (y.array() - y.mean()).matrix().squaredNorm();
  if (tss <= 0.0) return -kInf;

  Eigen::ColPivHouseholderQR<Matrix> qr(pooled);
  {
    const Matrix& r = qr.matrixQR();
    const double top = std::abs(r(0, 0));
    Index rank = 0;
    for (Index i = 0; i < std::min(n, groups); ++i) {
      if (std::abs(r(i, i)) > 1e-10 * top) ++rank;
    }
    if (rank < groups) return -kInf;
  }
  const Vector nu = qr.solve(y);
  const double rss = (y - pooled * nu).squaredNorm();
  return 1.0 - rss / tss;
}

ScreenResult select_bandwidth(const Matrix& x, const Vector& y,
                              const std::vector<Index>& bandwidth_grid,
                              const ScreenOptions& opt) {
  require(!bandwidth_grid.empty(), ErrorKind::invalid_argument, "empty bandwidth grid");
  std::vector<Index> grid = bandwidth_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const Index n = x.rows();
  ScreenResult best;
  double best_r2 = -kInf;
  bool have_best = false;
  std::vector<std::pair<Index, double>> history;

  for (Index h : grid) {
    ScreenResult cand = screen(x, y, h, opt);

    std::vector<Index> fit_breaks = cand.selected;
    if (opt.keep_top >= 0) {
      // Cap the fit at 3(n-1)/4 breaks so the pooled regression keeps residual
      // degrees of freedom. A generous cap matters: it forces every candidate
      // bandwidth to stake its lower-ranked locations in the fit, so a
      // bandwidth whose ranking tail is noise scatter loses R^2 to one whose
      // tail still sits on real change neighborhoods.
      const Index cap = std::max<Index>(1, 3 * (n - 1) / 4);
      if (static_cast<Index>(fit_breaks.size()) > cap) {
        const std::vector<Index> order = rank_locations(cand.stats);
        fit_breaks.assign(order.begin(), order.begin() + cap);
        std::sort(fit_breaks.begin(), fit_breaks.end());
      }
    }
    const double r2 = segment_r2(x, y, fit_breaks);
    history.emplace_back(h, r2);

    if (std::isfinite(r2) && r2 > best_r2) {
      best_r2 = r2;
      best = cand;
      best.r2 = r2;
      have_best = true;
    }
  }

  if (!have_best) {
    // Every candidate fit was degenerate; fall back to the smallest bandwidth.
    best = screen(x, y, grid.front(), opt);
    best.r2 = -kInf;
  }
  best.r2_by_bandwidth = history;
  return best;
}

}  // namespace gk::fusis
