#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bgm/config.hpp"
#include "bgm/pipeline.hpp"

namespace bgm {

/// Mean Euclidean distance over the prediction horizon, in meters.
double ade(const std::vector<TrajPoint>& prediction, const std::vector<TrajPoint>& truth);
/// Euclidean distance at the final predicted step.
double fde(const std::vector<TrajPoint>& prediction, const std::vector<TrajPoint>& truth);

/// Per-coordinate least-squares line over the observed steps, extrapolated
/// through the prediction horizon.
std::vector<TrajPoint> linear_baseline(const TrajectorySample& sample, int t_pred);

struct SceneMetrics {
  std::string scene;
  double ade = 0.0;
  double fde = 0.0;
  int64_t samples = 0;
};

struct MetricReport {
  std::vector<SceneMetrics> per_scene;
  double avg_ade = 0.0;  // unweighted mean over scenes
  double avg_fde = 0.0;
  double weighted_ade = 0.0;  // sample-weighted
  double weighted_fde = 0.0;
  int64_t total_samples = 0;
  std::string variant;  // "bgm", "bgm_no_social", "bgm_no_context", "linear"
  uint64_t config_fingerprint = 0;

  nlohmann::json to_json() const;
  std::string table() const;
};

MetricReport aggregate(const std::vector<SceneMetrics>& per_scene, const std::string& variant,
                       uint64_t fingerprint);

struct PerSampleError {
  std::string scene;
  int64_t agent_id = 0;
  int64_t t0 = 0;
  double ade = 0.0;
  double fde = 0.0;
};

SceneMetrics score_scene(const ScenePredictions& preds, std::vector<PerSampleError>* dump = nullptr);
void write_error_csv(const std::string& path, const std::vector<PerSampleError>& errors,
                     uint64_t fingerprint);

/// Leave-one-out benchmark over the configured scenes. `params_for` supplies
/// trained parameters per held-out scene (loaded or freshly trained).
struct BenchmarkInput {
  const std::vector<Scene>* scenes = nullptr;
  const std::vector<SampleSet>* sample_sets = nullptr;  // aligned with scenes
  std::function<Model(const std::string& held_out)> params_for;
  PipelineOptions options;
};

struct BenchmarkResult {
  MetricReport report;
  std::vector<PerSampleError> errors;
  std::vector<ScenePredictions> predictions;  // one per held-out scene
};

BenchmarkResult run_benchmark(const BenchmarkInput& input, const RunConfig& config);

/// Linear baseline over the same splits.
BenchmarkResult run_linear_baseline(const std::vector<Scene>& scenes,
                                    const std::vector<SampleSet>& sample_sets,
                                    const RunConfig& config);

/// Three record periods with their test sets, each evaluated against every
/// period's complete guidance map.
struct DynamicMapResult {
  std::array<std::array<double, 3>, 3> ade{};  // [test set][map]
  std::array<std::array<double, 3>, 3> fde{};
  std::array<int64_t, 3> set_sizes{};
  std::array<std::pair<int64_t, int64_t>, 3> period_frames{};  // inclusive spans
  std::array<bool, 3> diag_min_row{};  // own map best for this test set
  std::array<bool, 3> diag_min_col{};  // own test set best for this map
  nlohmann::json to_json(uint64_t fingerprint) const;
  std::string table() const;
};

DynamicMapResult dynamic_map_experiment(const Scene& scene,
                                        const std::vector<TrajectorySample>& samples,
                                        const Model& model, const RunConfig& config,
                                        const PipelineOptions& options);

}  // namespace bgm
