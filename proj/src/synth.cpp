#include "bgm/synth.hpp"

#include <cmath>

#include "bgm/layers.hpp"

namespace bgm::synth {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Scene make_arc_scene(const SynthSpec& spec) {
  nn::Rng rng(spec.seed);
  Scene scene;
  scene.name = spec.name;

  for (int a = 0; a < spec.n_agents; ++a) {
    const int track_len =
        spec.min_track + static_cast<int>(rng.uniform(0, spec.max_track - spec.min_track + 1));
    const int latest_entry = std::max(1, spec.n_frames - track_len);
    const int entry = static_cast<int>(rng.uniform(0, latest_entry));
    TrajPoint pos{rng.uniform(0.0, spec.extent), rng.uniform(0.0, spec.extent)};
    double heading = rng.uniform(0.0, 2.0 * kPi);
    const double speed = rng.uniform(spec.speed_min, spec.speed_max);
    double omega = rng.uniform(spec.turn_min, spec.turn_max);
    if (rng.uniform(0.0, 1.0) < 0.5) omega = -omega;

    AgentTrack track;
    track.agent_id = a + 1;
    for (int f = 0; f < track_len && entry + f < spec.n_frames; ++f) {
      track.frames.emplace_back(entry + f, pos);
      scene.bounds.expand(pos);
      heading += omega;
      pos = pos + speed * TrajPoint{std::cos(heading), std::sin(heading)};
    }
    scene.tracks.push_back(std::move(track));
  }
  return scene;
}

Scene make_flow_shift_scene(const std::string& name, uint64_t seed, int n_agents, int n_frames) {
  nn::Rng rng(seed);
  Scene scene;
  scene.name = name;
  const double period_dirs[3] = {kPi / 4.0, -kPi / 4.0, 0.0};

  for (int a = 0; a < n_agents; ++a) {
    const int track_len = 30 + static_cast<int>(rng.uniform(0, 25));
    const int entry = static_cast<int>(rng.uniform(0, std::max(1, n_frames - track_len)));
    const int period = std::min(2, entry / (n_frames / 3));
    TrajPoint pos{rng.uniform(0.0, 16.0), rng.uniform(0.0, 16.0)};
    double heading = period_dirs[period] + rng.uniform(-0.25, 0.25);
    const double speed = rng.uniform(0.28, 0.45);
    double omega = rng.uniform(0.02, 0.06);
    if (rng.uniform(0.0, 1.0) < 0.5) omega = -omega;

    AgentTrack track;
    track.agent_id = a + 1;
    for (int f = 0; f < track_len && entry + f < n_frames; ++f) {
      track.frames.emplace_back(entry + f, pos);
      scene.bounds.expand(pos);
      heading += omega;
      pos = pos + speed * TrajPoint{std::cos(heading), std::sin(heading)};
    }
    scene.tracks.push_back(std::move(track));
  }
  return scene;
}

std::vector<Scene> make_benchmark_scenes(uint64_t seed) {
  std::vector<Scene> scenes;
  const char* names[5] = {"synth_a", "synth_b", "synth_c", "synth_d", "synth_e"};
  for (int i = 0; i < 5; ++i) {
    SynthSpec spec;
    spec.name = names[i];
    spec.seed = seed + static_cast<uint64_t>(i) * 1000003ULL;
    spec.n_agents = 36 + 4 * i;
    scenes.push_back(make_arc_scene(spec));
  }
  return scenes;
}

RunConfig synth_config() {
  RunConfig c;
  c.record_window.t_max = 30;
  c.record_window.n_min = 20;
  c.record_window.n_max = 400;
  return c;
}

}  // namespace bgm::synth
