#include "bgm/pipeline.hpp"

#include <omp.h>

#include <map>

namespace bgm {

GridSpec guidance_grid_spec(const Scene& scene, const RunConfig& config) {
  return scene_grid_spec(scene.bounds, config.grid.resolution, config.grid.local_side_m / 2.0);
}

std::vector<LocalMap> local_maps_for_samples(const Scene& scene,
                                             const std::vector<TrajectorySample>& samples,
                                             const RunConfig& config) {
  const GridSpec spec = guidance_grid_spec(scene, config);
  const auto windows = windows_for_dataset(scene, config.record_window);
  const int side = config.local_side_cells();

  // Each distinct window is rasterized once and shared by its samples.
  std::map<const SavedWindow*, GuidanceMap> maps;
  std::vector<LocalMap> locals;
  locals.reserve(samples.size());
  for (const auto& s : samples) {
    const SavedWindow* w = window_for_prediction(windows, s.t1_frame);
    if (!w) {
      locals.push_back(zero_local(s.agent_id, side));
      continue;
    }
    auto it = maps.find(w);
    if (it == maps.end()) it = maps.emplace(w, rasterize(w->window, spec)).first;
    locals.push_back(
        extract_local(it->second, s.agent_id, s.observed.back(), config.grid.local_side_m / 2.0));
  }
  return locals;
}

std::vector<LocalMap> local_maps_from_map(const GuidanceMap& map,
                                          const std::vector<TrajectorySample>& samples,
                                          const RunConfig& config) {
  std::vector<LocalMap> locals;
  locals.reserve(samples.size());
  for (const auto& s : samples)
    locals.push_back(
        extract_local(map, s.agent_id, s.observed.back(), config.grid.local_side_m / 2.0));
  return locals;
}

namespace {

TrajPoint observed_displacement(const TrajectorySample& s) {
  return s.observed.front() - s.observed.back();
}

}  // namespace

ScenePredictions predict_scene_with_maps(const Scene& scene,
                                         const std::vector<TrajectorySample>& samples,
                                         const std::vector<LocalMap>& maps, const Model& model,
                                         const RunConfig& config,
                                         const PipelineOptions& options) {
  if (maps.size() != samples.size())
    throw std::invalid_argument("predict_scene: maps do not align with samples");

  ScenePredictions out;
  out.scene = scene.name;
  out.records.resize(samples.size());

  const int n = static_cast<int>(samples.size());
#pragma omp parallel for schedule(dynamic) if (options.parallel)
  for (int i = 0; i < n; ++i) {
    const auto& s = samples[i];
    PredictionRecord& rec = out.records[i];
    rec.agent_id = s.agent_id;
    rec.t0 = s.t0;
    rec.t1_frame = s.t1_frame;
    rec.observed = s.observed;
    rec.ground_truth = s.ground_truth;
    rec.had_map = maps[i].center_cell.in_bounds;

    nn::Tensor seq = model.encode_history(s.observed);
    nn::Tensor ctx =
        options.use_context ? model.encode_context(maps[i]) : model.zero_context_feature();
    rec.preliminary = model.decode_preliminary(seq, ctx, s.observed.back());
    rec.refined = rec.preliminary;
    if (options.keep_features) {
      rec.seq_feature = std::move(seq);
      rec.ctx_feature = std::move(ctx);
    }
  }
  for (const auto& rec : out.records)
    if (!rec.had_map) ++out.samples_without_map;

  if (options.use_social) {
    // Samples sharing a prediction start refine against each other's
    // preliminary predictions; refinement never feeds back into neighbors.
    std::map<int64_t, std::vector<int>> groups;
    for (int i = 0; i < n; ++i) groups[samples[i].t0].push_back(i);
    for (const auto& [t0, members] : groups) {
      const int m = static_cast<int>(members.size());
#pragma omp parallel for schedule(dynamic) if (options.parallel)
      for (int gi = 0; gi < m; ++gi) {
        const int i = members[gi];
        PredictionRecord& rec = out.records[i];
        social::NeighborSet neighbors;
        for (int j : members) {
          if (j == i) continue;
          neighbors.push_back({samples[j].agent_id, out.records[j].preliminary,
                               observed_displacement(samples[j])});
        }
        social::EnergyField field = social::build_energy_field(
            samples[i].agent_id, rec.preliminary, observed_displacement(samples[i]), neighbors,
            config.social);
        social::RefineResult refined = social::refine(rec.preliminary, field, config.social);
        rec.refined = std::move(refined.points);
        rec.refine_orders = refined.orders;
      }
    }
  }
  return out;
}

ScenePredictions predict_scene(const Scene& scene, const std::vector<TrajectorySample>& samples,
                               const Model& model, const RunConfig& config,
                               const PipelineOptions& options) {
  auto maps = local_maps_for_samples(scene, samples, config);
  return predict_scene_with_maps(scene, samples, maps, model, config, options);
}

}  // namespace bgm
