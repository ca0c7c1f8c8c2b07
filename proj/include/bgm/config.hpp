#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

#include "bgm/dataset.hpp"
#include "bgm/model.hpp"
#include "bgm/record_window.hpp"
#include "bgm/social.hpp"

namespace bgm {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

uint64_t fnv1a64(std::string_view bytes);
std::string hex64(uint64_t v);

/// Declarative run configuration. Every constant has a baked-in default;
/// a config file only overrides. Unknown keys are rejected.
struct RunConfig {
  struct Dataset {
    std::map<std::string, std::string> paths;  // scene name -> annotation file
    double frame_interval_s = 0.4;
  } dataset;

  struct Horizon {
    int t_obs = 8;
    int t_pred = 12;
    int stride = 1;
  } horizon;

  WindowConfig record_window;  // t_max=150, n_min=50, n_max=1000

  struct Grid {
    double resolution = 0.25;   // guidance map meters per cell
    double local_side_m = 8.0;  // local map side length in meters
  } grid;

  struct Train {
    int epochs = 500;
    double lr = 0.01;
    double final_lr_frac = 0.0;  // linear ramp-down target as a fraction of lr
    uint64_t seed = 1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int grad_block = 16;
  } train;

  social::SocialParams social;
  bool scalar_scale_weights = false;
  std::string out_dir = "out";

  static RunConfig load(const std::string& path);
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  std::string canonical_dump() const;  // sorted keys, stable float formatting
  uint64_t fingerprint() const { return fnv1a64(canonical_dump()); }
  void validate() const;

  HorizonConfig horizon_config() const { return {horizon.t_obs, horizon.t_pred}; }
  ModelConfig model_config() const;
  int local_side_cells() const;
};

}  // namespace bgm
