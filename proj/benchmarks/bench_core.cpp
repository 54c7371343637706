#include "gknockoff/knockoff.hpp"
#include "gknockoff/fusis.hpp"
#include "gknockoff/lasso.hpp"
#include "gknockoff/model.hpp"
#include "gknockoff/sim.hpp"

#include <benchmark/benchmark.h>

namespace {

gk::sim::Dataset piecewise_data(gk::Index n, gk::Index p) {
  gk::sim::PiecewiseConfig cfg;
  cfg.n = n;
  cfg.p = p;
  cfg.changes = 10;
  cfg.amplitude = 0.12;
  cfg.sigma = 1.0;
  gk::Rng rng(42);
  return gk::sim::gen_piecewise(cfg, rng);
}

void BM_Transform(benchmark::State& state) {
  const auto ds = piecewise_data(350, 100);
  const auto spec = gk::model::complete_basis(gk::model::build_difference_matrix(100));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gk::model::transform(ds.x, ds.y, spec));
  }
}
BENCHMARK(BM_Transform)->Unit(benchmark::kMillisecond);

void BM_KnockoffConstruct(benchmark::State& state) {
  const auto ds = piecewise_data(350, 100);
  const auto spec = gk::model::complete_basis(gk::model::build_difference_matrix(100));
  const auto prob = gk::model::transform(ds.x, ds.y, spec);
  const auto s = gk::knockoff::select_s(prob.sigma);
  for (auto _ : state) {
    gk::Rng rng(7);
    benchmark::DoNotOptimize(gk::knockoff::construct(prob, s, rng));
  }
}
BENCHMARK(BM_KnockoffConstruct)->Unit(benchmark::kMillisecond);

void BM_LassoPath(benchmark::State& state) {
  const auto ds = piecewise_data(350, 100);
  const auto spec = gk::model::complete_basis(gk::model::build_difference_matrix(100));
  const auto prob = gk::model::transform(ds.x, ds.y, spec);
  const auto s = gk::knockoff::select_s(prob.sigma);
  gk::Rng rng(7);
  const auto ens = gk::knockoff::construct(prob, s, rng);
  gk::Matrix xx(prob.n(), 2 * prob.m());
  xx.leftCols(prob.m()) = prob.xstar;
  xx.rightCols(prob.m()) = ens.xtilde;
  const auto grid = gk::lasso::default_grid(xx, prob.ystar);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gk::lasso::path_entry_times(xx, prob.ystar, grid));
  }
}
BENCHMARK(BM_LassoPath)->Unit(benchmark::kMillisecond);

void BM_FusedScan(benchmark::State& state) {
  const auto ds = piecewise_data(300, 1000);
  gk::fusis::ScreenOptions opt;
  opt.keep_top = 299;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gk::fusis::screen(ds.x, ds.y, 25, opt));
  }
}
BENCHMARK(BM_FusedScan)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
