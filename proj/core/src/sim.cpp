#include "gknockoff/sim.hpp"

#include "gknockoff/fusis.hpp"
#include "gknockoff/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

namespace gk::sim {

Matrix gen_covariance(CovKind kind, Index p, double rho) {
  require(p >= 1, ErrorKind::invalid_argument, "covariance needs p >= 1");
  require(rho > -1.0 && rho < 1.0, ErrorKind::invalid_argument, "rho must lie in (-1, 1)");

  switch (kind) {
    case CovKind::identity:
      return Matrix::Identity(p, p);
    case CovKind::ar: {
      Matrix s(p, p);
      for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) s(i, j) = std::pow(rho, std::abs(i - j));
      }
      return s;
    }
    case CovKind::grouped: {
      require(p % 10 == 0, ErrorKind::invalid_argument,
              "grouped covariance needs p divisible by 10");
      const Index b = p / 10;
      Matrix s = Matrix::Zero(p, p);
      for (Index g = 0; g < 10; ++g) {
        s.block(g * b, g * b, b, b) = gen_covariance(CovKind::ar, b, rho);
      }
      return s;
    }
  }
  fail(ErrorKind::invalid_argument, "unknown covariance kind");
}

namespace {

Matrix draw_gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) g(i, j) = gauss(rng);
  }
  return g;
}

std::vector<Index> even_locations(Index p, Index changes) {
  // floor(k * p / (J + 1)) as a 1-based profile position = 0-based D row minus none;
  // position t means a change between columns t-1 and t (0-based), i.e. D row t-1.
  std::vector<Index> locs;
  for (Index k = 1; k <= changes; ++k) {
    locs.push_back(k * p / (changes + 1) - 1);
  }
  return locs;
}

}  // namespace

Dataset gen_piecewise(const PiecewiseConfig& cfg, Rng& rng) {
  return gen_piecewise(cfg, rng, nullptr);
}

Dataset gen_piecewise(const PiecewiseConfig& cfg, Rng& rng, const Matrix* cov_chol) {
  require(cfg.n >= 1 && cfg.p >= 2, ErrorKind::invalid_argument, "need n >= 1 and p >= 2");
  require(cfg.sigma >= 0.0, ErrorKind::invalid_argument, "sigma must be >= 0");
  require(cfg.amplitude >= 0.0, ErrorKind::invalid_argument, "amplitude must be >= 0");

  Dataset ds;
  if (cfg.amplitude > 0.0) {
    ds.truth = cfg.locations.empty() ? even_locations(cfg.p, cfg.changes) : cfg.locations;
    for (std::size_t i = 0; i < ds.truth.size(); ++i) {
      require(ds.truth[i] >= 0 && ds.truth[i] <= cfg.p - 2, ErrorKind::invalid_argument,
              "change location out of range");
      require(i == 0 || ds.truth[i] > ds.truth[i - 1], ErrorKind::invalid_argument,
              "change locations must be strictly increasing");
    }
  }

  ds.beta = Vector(cfg.p);
  double level = -cfg.amplitude;
  std::size_t next = 0;
  for (Index j = 0; j < cfg.p; ++j) {
    ds.beta(j) = level;
    if (next < ds.truth.size() && ds.truth[next] == j) {
      level = -level;
      ++next;
    }
  }

  const Matrix g = draw_gaussian(cfg.n, cfg.p, rng);
  if (cfg.cov == CovKind::identity) {
    ds.x = g;
  } else if (cov_chol) {
    ds.x = g * cov_chol->transpose();
  } else if (cfg.cov == CovKind::grouped) {
    // Exploit the block-diagonal structure instead of one large product.
    const Matrix block = gen_covariance(CovKind::ar, cfg.p / 10, cfg.rho);
    const Matrix lb = numerics::cholesky_psd(block, 1e-8).l;
    ds.x = Matrix(cfg.n, cfg.p);
    const Index b = cfg.p / 10;
    for (Index k = 0; k < 10; ++k) {
      ds.x.middleCols(k * b, b) = g.middleCols(k * b, b) * lb.transpose();
    }
  } else {
    const Matrix l = numerics::cholesky_psd(gen_covariance(cfg.cov, cfg.p, cfg.rho), 1e-8).l;
    ds.x = g * l.transpose();
  }

  ds.y = ds.x * ds.beta;
  if (cfg.sigma > 0.0) {
    std::normal_distribution<double> gauss(0.0, cfg.sigma);
    for (Index i = 0; i < cfg.n; ++i) ds.y(i) += gauss(rng);
  }
  return ds;
}

Dataset gen_integration(const IntegrationConfig& cfg, Rng& rng) {
  require(cfg.sources >= 2 && cfg.p >= 1, ErrorKind::invalid_argument,
          "need at least two sources and p >= 1");
  const Index pairs = (cfg.sources - 1) * cfg.p;
  require(cfg.changes >= 0 && cfg.changes <= pairs, ErrorKind::invalid_argument,
          "more sign flips than adjacent pairs");
  require(cfg.zeta > 0.0, ErrorKind::invalid_argument, "zeta must be > 0");

  std::poisson_distribution<long> pois(cfg.zeta);
  std::vector<Index> sizes(static_cast<std::size_t>(cfg.sources));
  Index n = 0;
  for (auto& nk : sizes) {
    nk = static_cast<Index>(pois(rng));
    n += nk;
  }
  require(n >= 1, ErrorKind::numeric, "all Poisson block sizes came out zero");

  Dataset ds;
  ds.sources = cfg.sources;
  if (cfg.amplitude > 0.0 && cfg.changes > 0) {
    // Sample J distinct pair indices uniformly (partial Fisher-Yates).
    std::vector<Index> pool(static_cast<std::size_t>(pairs));
    std::iota(pool.begin(), pool.end(), Index{0});
    for (Index i = 0; i < cfg.changes; ++i) {
      std::uniform_int_distribution<Index> pick(i, pairs - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    ds.truth.assign(pool.begin(), pool.begin() + cfg.changes);
    std::sort(ds.truth.begin(), ds.truth.end());
  }

  // Coefficients: every entry has magnitude A; a flip at pair (k, j) negates
  // coordinate j from source k+1 onward.
  Matrix beta_k = Matrix::Constant(cfg.sources, cfg.p, cfg.amplitude);
  for (Index r : ds.truth) {
    const Index k = r / cfg.p;
    const Index j = r % cfg.p;
    for (Index t = k + 1; t < cfg.sources; ++t) beta_k(t, j) = -beta_k(t, j);
  }

  ds.beta = Vector(cfg.sources * cfg.p);
  for (Index k = 0; k < cfg.sources; ++k) {
    ds.beta.segment(k * cfg.p, cfg.p) = beta_k.row(k).transpose();
  }

  ds.x = Matrix::Zero(n, cfg.sources * cfg.p);
  ds.y = Vector(n);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Index row = 0;
  for (Index k = 0; k < cfg.sources; ++k) {
    const Index nk = sizes[static_cast<std::size_t>(k)];
    ds.x.block(row, k * cfg.p, nk, cfg.p) = draw_gaussian(nk, cfg.p, rng);
    row += nk;
  }
  ds.y = ds.x * ds.beta;
  if (cfg.sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.sigma);
    for (Index i = 0; i < n; ++i) ds.y(i) += noise(rng);
  }
  return ds;
}

std::pair<double, double> fdp_tpp(const std::vector<Index>& selected,
                                  const std::vector<Index>& truth) {
  Index hits = 0;
  for (Index s : selected) {
    if (std::binary_search(truth.begin(), truth.end(), s)) ++hits;
  }
  const double fdp = selected.empty()
                         ? 0.0
                         : static_cast<double>(static_cast<Index>(selected.size()) - hits) /
                               static_cast<double>(selected.size());
  const double tpp =
      truth.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
  return {fdp, tpp};
}

namespace {

void summarize(StudySummary& s) {
  const Index r = static_cast<Index>(s.reps.size());
  double fsum = 0.0, tsum = 0.0;
  for (const auto& rep : s.reps) {
    fsum += rep.fdp;
    tsum += rep.tpp;
  }
  s.fdr = fsum / static_cast<double>(r);
  s.power = tsum / static_cast<double>(r);
  if (r >= 2) {
    double fvar = 0.0, tvar = 0.0;
    for (const auto& rep : s.reps) {
      fvar += (rep.fdp - s.fdr) * (rep.fdp - s.fdr);
      tvar += (rep.tpp - s.power) * (rep.tpp - s.power);
    }
    fvar /= static_cast<double>(r - 1);
    tvar /= static_cast<double>(r - 1);
    s.se_fdr = std::sqrt(fvar / static_cast<double>(r));
    s.se_power = std::sqrt(tvar / static_cast<double>(r));
  }
}

void parallel_for(Index count, int threads, const std::function<void(Index)>& body) {
  if (threads <= 1 || count <= 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mu;
  const int nt = std::min<int>(threads, static_cast<int>(count));
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&]() {
      while (true) {
        const Index i = next.fetch_add(1);
        if (i >= count) break;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

StudySummary run_study(const Generator& gen, const Detector& det, Index reps,
                       std::uint64_t seed, int threads) {
  require(reps >= 1, ErrorKind::invalid_argument, "need at least one replication");
  StudySummary s;
  s.reps.resize(static_cast<std::size_t>(reps));

  parallel_for(reps, threads, [&](Index i) {
    Rng gen_rng(sub_seed(seed, 2 * static_cast<std::uint64_t>(i)));
    const Dataset ds = gen(gen_rng);
    const std::uint64_t det_seed = sub_seed(seed, 2 * static_cast<std::uint64_t>(i) + 1);
    RepOutcome& out = s.reps[static_cast<std::size_t>(i)];
    out.selected = det(ds, det_seed);
    std::sort(out.selected.begin(), out.selected.end());
    std::tie(out.fdp, out.tpp) = fdp_tpp(out.selected, ds.truth);
  });

  summarize(s);
  return s;
}

CoverageSummary coverage_study(const PiecewiseConfig& cfg, Index fixed_h,
                               const std::vector<Index>& bandwidth_grid, Index keep_top,
                               Index reps, std::uint64_t seed, int threads) {
  require(reps >= 1, ErrorKind::invalid_argument, "need at least one replication");
  require(keep_top >= 1, ErrorKind::invalid_argument, "keep_top must be >= 1");

  // The covariance factor is shared by every replication.
  Matrix chol;
  const Matrix* chol_ptr = nullptr;
  if (cfg.cov != CovKind::identity) {
    chol = numerics::cholesky_psd(gen_covariance(cfg.cov, cfg.p, cfg.rho), 1e-8).l;
    chol_ptr = &chol;
  }

  std::vector<double> fixed_frac(static_cast<std::size_t>(reps), 0.0);
  std::vector<double> optimal_frac(static_cast<std::size_t>(reps), 0.0);

  parallel_for(reps, threads, [&](Index i) {
    Rng rng(sub_seed(seed, static_cast<std::uint64_t>(i)));
    const Dataset ds = gen_piecewise(cfg, rng, chol_ptr);

    fusis::ScreenOptions opt;
    opt.keep_top = keep_top;
    // Covered fraction of the true change locations; an empty truth counts as
    // fully covered so a zero-amplitude design reports coverage 1.
    const auto covered = [&](const std::vector<Index>& sel) {
      if (ds.truth.empty()) return 1.0;
      Index hits = 0;
      for (Index t : ds.truth) {
        if (std::binary_search(sel.begin(), sel.end(), t)) ++hits;
      }
      return static_cast<double>(hits) / static_cast<double>(ds.truth.size());
    };
    fixed_frac[static_cast<std::size_t>(i)] =
        covered(fusis::screen(ds.x, ds.y, fixed_h, opt).selected);
    optimal_frac[static_cast<std::size_t>(i)] =
        covered(fusis::select_bandwidth(ds.x, ds.y, bandwidth_grid, opt).selected);
  });

  CoverageSummary out;
  out.reps = reps;
  out.fixed = std::accumulate(fixed_frac.begin(), fixed_frac.end(), 0.0) /
              static_cast<double>(reps);
  out.optimal = std::accumulate(optimal_frac.begin(), optimal_frac.end(), 0.0) /
                static_cast<double>(reps);
  return out;
}

}  // namespace gk::sim
