#pragma once

#include <optional>
#include <vector>

#include "bgm/config.hpp"
#include "bgm/dataset.hpp"
#include "bgm/guidance_map.hpp"
#include "bgm/model.hpp"
#include "bgm/record_window.hpp"
#include "bgm/social.hpp"

namespace bgm {

struct PipelineOptions {
  bool use_context = true;
  bool use_social = true;
  bool parallel = true;
  bool keep_features = false;  // retain per-sample encoder features (tests)
};

struct PredictionRecord {
  int64_t agent_id = 0;
  int64_t t0 = 0;
  int64_t t1_frame = 0;
  std::vector<TrajPoint> observed;
  std::vector<TrajPoint> ground_truth;
  std::vector<TrajPoint> preliminary;
  std::vector<TrajPoint> refined;  // equals preliminary when social is off
  bool had_map = false;
  int refine_orders = 0;
  nn::Tensor seq_feature;  // only with keep_features
  nn::Tensor ctx_feature;
};

struct ScenePredictions {
  std::string scene;
  std::vector<PredictionRecord> records;
  int64_t samples_without_map = 0;
};

/// Local map for every sample: the crop around the last observed position
/// from the latest record window saved before the sample's prediction
/// start, or an all-zero patch when none exists.
std::vector<LocalMap> local_maps_for_samples(const Scene& scene,
                                             const std::vector<TrajectorySample>& samples,
                                             const RunConfig& config);

/// Local maps cropped from one fixed guidance map (dynamic-map experiment).
std::vector<LocalMap> local_maps_from_map(const GuidanceMap& map,
                                          const std::vector<TrajectorySample>& samples,
                                          const RunConfig& config);

/// Scene-wide grid spec padded so every local crop fits.
GridSpec guidance_grid_spec(const Scene& scene, const RunConfig& config);

/// Preliminary pass for every sample, then per-agent social refinement:
/// samples sharing a prediction start refine against each other's
/// preliminary predictions in a single pass.
ScenePredictions predict_scene(const Scene& scene, const std::vector<TrajectorySample>& samples,
                               const Model& model, const RunConfig& config,
                               const PipelineOptions& options);

/// As above with externally supplied local maps (must align with samples).
ScenePredictions predict_scene_with_maps(const Scene& scene,
                                         const std::vector<TrajectorySample>& samples,
                                         const std::vector<LocalMap>& maps, const Model& model,
                                         const RunConfig& config, const PipelineOptions& options);

}  // namespace bgm
