// Hot-path timings at the default desk scale: dictionary assembly, the
// greedy picker, the proximal-gradient solver, hierarchical refinement of a
// single cell and the per-path delay/gain fit. One shared scene keeps the
// numbers comparable across runs.
#include <benchmark/benchmark.h>

#include "subthz/channel.hpp"
#include "subthz/dictionary.hpp"
#include "subthz/estimators.hpp"
#include "subthz/io.hpp"
#include "subthz/training.hpp"

namespace {

using namespace subthz;

struct Scene {
  ExperimentSpec es = desk_scale_defaults();
  ChannelRealization ch;
  BeamSet beams;
  Observation obs;
  DictionarySet dict;
  std::vector<CVec> y;

  Scene() {
    Rng rng(1234);
    ch = draw_channel(es.sys, es.grids, rng);
    beams = random_beams(es.sys, es.train, rng);
    const double sigma_n2 = calibrate_noise(20.0, ch, beams, es.sys);
    obs = observe(ch, beams, es.sys, sigma_n2, rng);
    dict = build_dictionaries(es.sys, es.grids, beams);
    y = vectorize_observations(obs);
  }
};

const Scene& scene() {
  static const Scene s;
  return s;
}

void bm_dictionary_build(benchmark::State& state) {
  const Scene& s = scene();
  for (auto _ : state) {
    DictionarySet d = build_dictionaries(s.es.sys, s.es.grids, s.beams);
    benchmark::DoNotOptimize(d.theta1);
  }
}
BENCHMARK(bm_dictionary_build)->Unit(benchmark::kMillisecond);

void bm_somp_one_pick(benchmark::State& state) {
  const Scene& s = scene();
  for (auto _ : state) {
    SompResult r = mmv_cs_somp(s.y, s.dict, 1, 1e-3);
    benchmark::DoNotOptimize(r.picks);
  }
}
BENCHMARK(bm_somp_one_pick)->Unit(benchmark::kMillisecond);

void bm_sequential_search(benchmark::State& state) {
  const Scene& s = scene();
  const int coarse = s.es.grids.coarse_parent(s.ch.support_columns()[0]);
  for (auto _ : state) {
    SearchResult r = sequential_search(s.y, s.dict, coarse);
    benchmark::DoNotOptimize(r.fine_column);
  }
}
BENCHMARK(bm_sequential_search)->Unit(benchmark::kMicrosecond);

void bm_mfista_50_iterations(benchmark::State& state) {
  const Scene& s = scene();
  EstimatorParams par = s.es.est;
  par.fista_max_iter = 50;
  par.fista_tol_rel = 0.0;  // run the full 50
  par.refine = false;
  for (auto _ : state) {
    EstimateResult r = mfista_estimate(s.obs, s.dict, {}, par);
    benchmark::DoNotOptimize(r.support);
  }
}
BENCHMARK(bm_mfista_50_iterations)->Unit(benchmark::kMillisecond);

void bm_ts_estimate(benchmark::State& state) {
  const Scene& s = scene();
  const EstimatorParams par = s.es.est;
  for (auto _ : state) {
    EstimateResult r = ts_estimate(s.obs, s.dict, {}, par);
    benchmark::DoNotOptimize(r.support);
  }
}
BENCHMARK(bm_ts_estimate)->Unit(benchmark::kMillisecond);

void bm_refine_paths(benchmark::State& state) {
  const Scene& s = scene();
  EstimatorParams par = s.es.est;
  par.refine = false;
  const EstimateResult base = ts_estimate(s.obs, s.dict, {}, par);
  for (auto _ : state) {
    auto paths =
        refine_paths(base.q_pilot, base.support, base.pilots, s.es.sys, par);
    benchmark::DoNotOptimize(paths);
  }
}
BENCHMARK(bm_refine_paths)->Unit(benchmark::kMicrosecond);

void bm_channel_matrix(benchmark::State& state) {
  const Scene& s = scene();
  int k = 1;
  for (auto _ : state) {
    CMat h = channel_matrix(s.ch, k, s.es.sys);
    benchmark::DoNotOptimize(h);
    k = k % s.es.sys.n_subcarriers + 1;
  }
}
BENCHMARK(bm_channel_matrix)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
