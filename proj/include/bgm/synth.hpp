#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bgm/config.hpp"
#include "bgm/dataset.hpp"

namespace bgm::synth {

/// Deterministic crowd scene: agents enter at staggered frames and walk
/// constant-speed circular arcs, so futures are predictable from history
/// but not by straight-line extrapolation.
struct SynthSpec {
  std::string name = "synth";
  uint64_t seed = 1;
  int n_agents = 40;
  int n_frames = 200;
  double extent = 18.0;         // meters; entry positions fall in this box
  double speed_min = 0.25;      // meters per frame
  double speed_max = 0.5;
  double turn_min = 0.03;       // radians per frame, sign randomized
  double turn_max = 0.11;
  int min_track = 30;
  int max_track = 70;
};

Scene make_arc_scene(const SynthSpec& spec);

/// Scene whose dominant walking direction rotates across three equal time
/// periods (for the dynamic-map experiment).
Scene make_flow_shift_scene(const std::string& name, uint64_t seed, int n_agents = 60,
                            int n_frames = 240);

/// Five arc scenes with distinct seeds, for leave-one-out runs.
std::vector<Scene> make_benchmark_scenes(uint64_t seed);

/// Config tuned to the synthetic corpus (denser record windows; dataset
/// paths left empty since scenes are built in memory).
RunConfig synth_config();

}  // namespace bgm::synth
