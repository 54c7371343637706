#pragma once

#include "gknockoff/common.hpp"

#include <vector>

namespace gk::fusis {

struct MarginalGammas {
  Vector values;                   // p; marginal associations of standardized columns
  std::vector<bool> zero_variance; // columns with no variation (statistic forced to 0)
};

// gamma_j = <standardized X_j, y>: columns centered and scaled to unit l2 norm.
MarginalGammas marginal_gammas(const Matrix& x, const Vector& y);

// Fused two-sided window statistic over change locations. Returns a length p-1
// vector indexed by D-row (location between columns j and j+1, 0-based); entries
// outside the valid window range are -inf and can never be selected.
Vector fused_stat(const Vector& gammas, Index h);

struct ScreenOptions {
  double threshold = kNaN;  // exceedance mode when finite
  Index keep_top = -1;      // rank mode when >= 0 (ties resolved to smaller index)
};

struct ScreenResult {
  std::vector<Index> selected;  // ascending 0-based change locations
  Vector stats;                 // length p-1 fused statistics at the used bandwidth
  Index bandwidth = 0;
  double r2 = kNaN;             // set by bandwidth selection
  std::vector<std::pair<Index, double>> r2_by_bandwidth;  // (h, segment r2)
};

ScreenResult screen(const Matrix& x, const Vector& y, Index h, const ScreenOptions& opt);

// R^2 of the least-squares fit that pools design columns between consecutive break
// locations (breaks are 0-based change locations). Returns -inf when the pooled
// design is rank deficient or the response has no variance.
double segment_r2(const Matrix& x, const Vector& y, const std::vector<Index>& breaks);

// Screens at every bandwidth in the grid, scores each screened set by segment_r2,
// and returns the screen at the best-scoring bandwidth (ties -> smaller h). In rank
// mode the fit uses only the top min(keep_top, (n-1)/2) locations so the comparison
// stays informative when keep_top approaches n.
ScreenResult select_bandwidth(const Matrix& x, const Vector& y,
                              const std::vector<Index>& bandwidth_grid,
                              const ScreenOptions& opt);

}  // namespace gk::fusis
