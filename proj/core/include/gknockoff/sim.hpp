#pragma once

#include "gknockoff/common.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace gk::sim {

enum class CovKind { identity, ar, grouped };

// AR: Toeplitz rho^|i-j|. Grouped: ten equal diagonal AR blocks (needs 10 | p).
Matrix gen_covariance(CovKind kind, Index p, double rho);

struct PiecewiseConfig {
  Index n = 0;
  Index p = 0;
  Index changes = 0;            // J; ignored when locations is non-empty
  double amplitude = 0.0;       // segment coefficient magnitude, alternating sign
  double rho = 0.0;
  double sigma = 1.0;           // noise standard deviation
  CovKind cov = CovKind::identity;
  std::vector<Index> locations; // explicit 0-based change locations (optional)
};

struct IntegrationConfig {
  Index sources = 0;            // K
  Index p = 0;
  Index changes = 0;            // J sign flips among (K-1)*p adjacent pairs
  double amplitude = 0.0;
  double zeta = 0.0;            // Poisson mean block size
  double sigma = 1.0;
};

struct Dataset {
  Matrix x;
  Vector y;
  Vector beta;
  std::vector<Index> truth;     // 0-based D rows with a real change, ascending
  Index sources = 1;
};

// 1-D piecewise-constant profile: default locations floor(k*p/(J+1)), segments
// alternate -A, +A, -A, ... Amplitude 0 means a homogeneous truth (empty set).
Dataset gen_piecewise(const PiecewiseConfig& cfg, Rng& rng);

// Variant that reuses a precomputed Cholesky factor of the covariance.
Dataset gen_piecewise(const PiecewiseConfig& cfg, Rng& rng, const Matrix* cov_chol);

// K independent sources with Poisson(zeta) sizes, identity covariance, and J
// sign flips planted uniformly among the adjacent (source, coordinate) pairs.
Dataset gen_integration(const IntegrationConfig& cfg, Rng& rng);

// |selected \ truth| / |selected| and |selected & truth| / |truth|, with 0/0 = 0.
std::pair<double, double> fdp_tpp(const std::vector<Index>& selected,
                                  const std::vector<Index>& truth);

struct RepOutcome {
  std::vector<Index> selected;
  double fdp = 0.0;
  double tpp = 0.0;
};

struct StudySummary {
  double fdr = kNaN;
  double se_fdr = kNaN;
  double power = kNaN;
  double se_power = kNaN;
  std::vector<RepOutcome> reps;
};

using Generator = std::function<Dataset(Rng&)>;
using Detector = std::function<std::vector<Index>(const Dataset&, std::uint64_t)>;

// Runs `reps` independent replications; replication i derives its generator and
// detector seeds from the master seed alone, so results do not depend on thread
// count or execution order. SEs are NaN when reps == 1.
StudySummary run_study(const Generator& gen, const Detector& det, Index reps,
                       std::uint64_t seed, int threads = 1);

struct CoverageSummary {
  double fixed = kNaN;    // mean fraction of true locations inside the fixed-h screen
  double optimal = kNaN;  // same for the bandwidth-selected screen
  Index reps = 0;
};

// Screening coverage study on the piecewise design: per replication, screen the
// top keep_top locations at a fixed bandwidth and at an R^2-selected bandwidth,
// then average the covered fraction of true change locations across reps.
CoverageSummary coverage_study(const PiecewiseConfig& cfg, Index fixed_h,
                               const std::vector<Index>& bandwidth_grid, Index keep_top,
                               Index reps, std::uint64_t seed, int threads = 1);

}  // namespace gk::sim
