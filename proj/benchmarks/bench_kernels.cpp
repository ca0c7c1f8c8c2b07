// Serial reference vs OpenMP kernels. Set OMP_NUM_THREADS to scale the
// parallel rows; outputs are bitwise identical either way.

#include <benchmark/benchmark.h>

#include "bgm/guidance_map.hpp"
#include "bgm/layers.hpp"
#include "bgm/model.hpp"
#include "bgm/social.hpp"

using namespace bgm;

namespace {

social::NeighborSet bench_neighbors(int count, nn::Rng& rng) {
  social::NeighborSet neighbors;
  for (int j = 0; j < count; ++j) {
    social::NeighborTraj nb;
    nb.agent_id = j + 2;
    TrajPoint q{rng.uniform(0, 6), rng.uniform(0, 6)};
    for (int t = 0; t < 12; ++t) {
      nb.prediction.push_back(q);
      q = q + TrajPoint{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)};
    }
    nb.displacement = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
    neighbors.push_back(nb);
  }
  return neighbors;
}

struct FieldInputs {
  std::vector<TrajPoint> own;
  social::NeighborSet neighbors;
  social::SocialParams params;
};

FieldInputs field_inputs(int n_neighbors) {
  nn::Rng rng(5);
  FieldInputs in;
  TrajPoint p{0, 0};
  for (int t = 0; t < 12; ++t) {
    in.own.push_back(p);
    p = p + TrajPoint{0.35, 0.1};
  }
  in.neighbors = bench_neighbors(n_neighbors, rng);
  return in;
}

void BM_EnergyFieldSerial(benchmark::State& state) {
  auto in = field_inputs(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto field = social::build_energy_field_serial(1, in.own, {-2, -0.5}, in.neighbors, in.params);
    benchmark::DoNotOptimize(field.values.data());
  }
}
BENCHMARK(BM_EnergyFieldSerial)->Arg(2)->Arg(8);

void BM_EnergyFieldParallel(benchmark::State& state) {
  auto in = field_inputs(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto field = social::build_energy_field(1, in.own, {-2, -0.5}, in.neighbors, in.params);
    benchmark::DoNotOptimize(field.values.data());
  }
}
BENCHMARK(BM_EnergyFieldParallel)->Arg(2)->Arg(8);

RecordWindow bench_window(int n) {
  nn::Rng rng(7);
  RecordWindow w;
  for (int i = 0; i < n; ++i) w.positions.push_back({rng.uniform(0, 30), rng.uniform(0, 30)});
  return w;
}

void BM_RasterizeSerial(benchmark::State& state) {
  auto w = bench_window(static_cast<int>(state.range(0)));
  GridSpec spec{{0, 0}, 0.25, 140, 140};
  for (auto _ : state) {
    auto map = rasterize_serial(w, spec);
    benchmark::DoNotOptimize(map.counts.data());
  }
}
BENCHMARK(BM_RasterizeSerial)->Arg(20000);

void BM_RasterizeParallel(benchmark::State& state) {
  auto w = bench_window(static_cast<int>(state.range(0)));
  GridSpec spec{{0, 0}, 0.25, 140, 140};
  for (auto _ : state) {
    auto map = rasterize(w, spec);
    benchmark::DoNotOptimize(map.counts.data());
  }
}
BENCHMARK(BM_RasterizeParallel)->Arg(20000);

struct GradInputs {
  ModelConfig cfg;
  Model model;
  std::vector<TrajectorySample> samples;
  std::vector<LocalMap> locals;
  std::vector<TrainExample> examples;

  explicit GradInputs(int n) : cfg(), model(Model::init(cfg, 3)) {
    nn::Rng rng(11);
    for (int i = 0; i < n; ++i) {
      TrajectorySample s;
      TrajPoint p{rng.uniform(0, 8), rng.uniform(0, 8)};
      double heading = rng.uniform(0, 6.28);
      for (int t = 0; t < cfg.t_obs + cfg.t_pred; ++t) {
        (t < cfg.t_obs ? s.observed : s.ground_truth).push_back(p);
        heading += 0.08;
        p = p + 0.4 * TrajPoint{std::cos(heading), std::sin(heading)};
      }
      samples.push_back(std::move(s));
      LocalMap lm = zero_local(i, cfg.local_side);
      for (auto& v : lm.patch) v = static_cast<int32_t>(rng.uniform(0, 5));
      locals.push_back(std::move(lm));
    }
    for (int i = 0; i < n; ++i) examples.push_back({&samples[i], &locals[i]});
  }
};

void BM_BatchGradientSerial(benchmark::State& state) {
  GradInputs in(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    double loss = 0.0;
    auto g = batch_gradient_serial(in.model, in.examples, true, &loss);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_BatchGradientSerial)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_BatchGradientParallel(benchmark::State& state) {
  GradInputs in(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    double loss = 0.0;
    auto g = batch_gradient(in.model, in.examples, true, true, 16, &loss);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_BatchGradientParallel)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_PredictBatchSerial(benchmark::State& state) {
  GradInputs in(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto preds = predict_batch(in.model, in.examples, true, false);
    benchmark::DoNotOptimize(preds.data());
  }
}
BENCHMARK(BM_PredictBatchSerial)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_PredictBatchParallel(benchmark::State& state) {
  GradInputs in(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto preds = predict_batch(in.model, in.examples, true, true);
    benchmark::DoNotOptimize(preds.data());
  }
}
BENCHMARK(BM_PredictBatchParallel)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
