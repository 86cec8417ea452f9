#include <benchmark/benchmark.h>

#include "sdvar/filter.hpp"
#include "sdvar/matcalc.hpp"
#include "sdvar/model.hpp"
#include "sdvar/simulate.hpp"
#include "sdvar/skewt.hpp"

using namespace sdvar;

namespace {

void bm_log_pdf(benchmark::State& state) {
  const SkewTParams p{-0.6, 6.0};
  double x = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_pdf(x, p));
    x += 0.01;
    if (x > 3.0) x = -3.0;
  }
}
BENCHMARK(bm_log_pdf);

void bm_score_factor(benchmark::State& state) {
  const SkewTParams p{-0.6, 6.0};
  double x = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_factor_g(x, p));
    x += 0.01;
    if (x > 3.0) x = -3.0;
  }
}
BENCHMARK(bm_score_factor);

void bm_mat_exp(benchmark::State& state) {
  Matrix s(3, 3);
  s << -0.5, 0.0, 0.0, 0.2, -0.3, 0.0, -0.1, 0.4, -0.8;
  for (auto _ : state) benchmark::DoNotOptimize(mat_exp(s));
}
BENCHMARK(bm_mat_exp);

void bm_mat_exp_frechet(benchmark::State& state) {
  Matrix s(3, 3);
  s << -0.5, 0.0, 0.0, 0.2, -0.3, 0.0, -0.1, 0.4, -0.8;
  Matrix e(3, 3);
  e.setZero();
  e(1, 0) = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(mat_exp_frechet(s, e));
}
BENCHMARK(bm_mat_exp_frechet);

void bm_gelfand(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  RngStream rng(5);
  Matrix f(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) f(i, j) = 0.3 * standard_normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_radius_gelfand(f, 10));
}
BENCHMARK(bm_gelfand)->Arg(6)->Arg(18);

Matrix bench_window(const ModelSpec& spec, std::uint64_t seed) {
  RngStream rng(seed);
  Matrix y(spec.max_lag() + 1, spec.n);
  for (int t = 0; t < y.rows(); ++t)
    for (int j = 0; j < spec.n; ++j) y(t, j) = standard_normal(rng);
  return y;
}

void bm_scores(benchmark::State& state) {
  ModelSpec spec;
  spec.n = 3;
  spec.lag_mode =
      state.range(0) == 0 ? LagMode::plain : LagMode::heterogeneous;
  spec.p = 2;
  spec.skewt = {{-0.7, 5.0}, {-0.6, 6.0}, {0.7, 5.5}};
  const Matrix y = bench_window(spec, 11);
  const Vector theta = study_theta0(study_spec());
  const int t = spec.max_lag();
  for (auto _ : state)
    benchmark::DoNotOptimize(penalized_scores_t(y, t, theta, spec));
}
BENCHMARK(bm_scores)->Arg(0)->Arg(1);

void bm_filter_pass(benchmark::State& state) {
  DgpConfig cfg = dgp_score_driven(17);
  cfg.t_len = static_cast<int>(state.range(0));
  const SimOutput sim = simulate(cfg);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        run_filter(sim.y, cfg.spec, cfg.statics, cfg.theta0));
  state.SetItemsProcessed(state.iterations() * cfg.t_len);
}
BENCHMARK(bm_filter_pass)->Arg(250)->Arg(750);

}  // namespace

BENCHMARK_MAIN();
