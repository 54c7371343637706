#pragma once

#include "gknockoff/common.hpp"
#include "gknockoff/knockoff.hpp"
#include "gknockoff/model.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace gk::pipeline {

enum class Method { automatic, gknock, egknock, hgknock };

struct DetectOptions {
  double q = 0.2;
  Method method = Method::automatic;
  knockoff::StatKind stat = knockoff::StatKind::signed_max;
  std::uint64_t seed = 0;
  double split_fraction = 0.5;            // rows given to the held-out half
  std::optional<double> noise_variance;   // known sigma^2 skips the variance split
  std::optional<double> lcd_lambda;       // default: geometric mean of grid endpoints
  Index grid_count = 100;
  double grid_ratio = 1e-3;
  std::optional<Index> keep_top;          // screening size override (default n2/2 - 1)
  std::vector<Index> bandwidth_grid;      // screening bandwidths (default from p)
};

struct Diagnostics {
  double spec_condition = kNaN;
  double sigma_min_eig = kNaN;
  double jitter = kNaN;
  double gram_r1 = kNaN;
  double gram_r2 = kNaN;
  double lambda_max = kNaN;
  double noise_variance = kNaN;  // egknock only
  Index augmented_rows = 0;
  Index screened_count = -1;     // hgknock only
  Index screen_bandwidth = -1;   // hgknock only
};

struct DetectReport {
  std::vector<Index> selected;     // ascending, original D-row indices
  std::vector<Index> tested_rows;  // rows the filter actually tested (all, or screened)
  Vector w;                        // aligned with tested_rows
  double threshold = kInf;
  Method method_used = Method::gknock;
  Diagnostics diag;
};

// Splits 0..n-1 into (held-out, kept) index sets of sizes floor(fraction*n) and the
// remainder, by a seeded shuffle; both halves are returned in ascending order.
std::pair<std::vector<Index>, std::vector<Index>> split_rows(Index n, double fraction,
                                                             Rng& rng);

// FDR-controlled detection of violated contrasts. Method automatic routes on the
// row budget: n >= 2m direct, m < n < 2m row-augmented, n <= m screen-then-filter.
DetectReport detect(const Matrix& x, const Vector& y, const model::TransformSpec& spec,
                    const DetectOptions& opt, const Matrix& extra_unpenalized = Matrix());

}  // namespace gk::pipeline
