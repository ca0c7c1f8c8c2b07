#include "bgm/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace bgm {

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("config: unknown key '" + where + it.key() + "'");
}

template <typename T>
void read(const json& j, const char* key, T* out) {
  if (j.contains(key)) *out = j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  reject_unknown(j, {"dataset", "horizon", "record_window", "grid", "train", "social", "model",
                     "out_dir"},
                 "");

  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    reject_unknown(d, {"paths", "frame_interval_s"}, "dataset.");
    if (d.contains("paths"))
      c.dataset.paths = d.at("paths").get<std::map<std::string, std::string>>();
    read(d, "frame_interval_s", &c.dataset.frame_interval_s);
  }
  if (j.contains("horizon")) {
    const auto& h = j.at("horizon");
    reject_unknown(h, {"t_obs", "t_pred", "stride"}, "horizon.");
    read(h, "t_obs", &c.horizon.t_obs);
    read(h, "t_pred", &c.horizon.t_pred);
    read(h, "stride", &c.horizon.stride);
  }
  if (j.contains("record_window")) {
    const auto& r = j.at("record_window");
    reject_unknown(r, {"t_max", "n_min", "n_max"}, "record_window.");
    read(r, "t_max", &c.record_window.t_max);
    read(r, "n_min", &c.record_window.n_min);
    read(r, "n_max", &c.record_window.n_max);
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    reject_unknown(g, {"resolution", "local_side_m"}, "grid.");
    read(g, "resolution", &c.grid.resolution);
    read(g, "local_side_m", &c.grid.local_side_m);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    reject_unknown(t,
                   {"epochs", "lr", "final_lr_frac", "seed", "beta1", "beta2", "adam_eps",
                    "grad_block"},
                   "train.");
    read(t, "epochs", &c.train.epochs);
    read(t, "lr", &c.train.lr);
    read(t, "final_lr_frac", &c.train.final_lr_frac);
    read(t, "seed", &c.train.seed);
    read(t, "beta1", &c.train.beta1);
    read(t, "beta2", &c.train.beta2);
    read(t, "adam_eps", &c.train.adam_eps);
    read(t, "grad_block", &c.train.grad_block);
  }
  if (j.contains("social")) {
    const auto& s = j.at("social");
    reject_unknown(s,
                   {"lambda_d", "lambda_i", "lambda_s", "r_d", "r_i", "r_s", "theta", "epsilon",
                    "k_max", "resolution", "v_cap"},
                   "social.");
    read(s, "lambda_d", &c.social.lambda_d);
    read(s, "lambda_i", &c.social.lambda_i);
    read(s, "lambda_s", &c.social.lambda_s);
    read(s, "r_d", &c.social.r_d);
    read(s, "r_i", &c.social.r_i);
    read(s, "r_s", &c.social.r_s);
    read(s, "theta", &c.social.theta);
    read(s, "epsilon", &c.social.epsilon);
    read(s, "k_max", &c.social.k_max);
    read(s, "resolution", &c.social.resolution);
    read(s, "v_cap", &c.social.v_cap);
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    reject_unknown(m, {"scalar_scale_weights"}, "model.");
    read(m, "scalar_scale_weights", &c.scalar_scale_weights);
  }
  read(j, "out_dir", &c.out_dir);
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return from_json(j);
}

json RunConfig::to_json() const {
  json j;
  j["dataset"]["paths"] = dataset.paths;
  j["dataset"]["frame_interval_s"] = dataset.frame_interval_s;
  j["horizon"] = {{"t_obs", horizon.t_obs}, {"t_pred", horizon.t_pred},
                  {"stride", horizon.stride}};
  j["record_window"] = {{"t_max", record_window.t_max}, {"n_min", record_window.n_min},
                        {"n_max", record_window.n_max}};
  j["grid"] = {{"resolution", grid.resolution}, {"local_side_m", grid.local_side_m}};
  j["train"] = {{"epochs", train.epochs},       {"lr", train.lr},
                {"final_lr_frac", train.final_lr_frac}, {"seed", train.seed},
                {"beta1", train.beta1},       {"beta2", train.beta2},
                {"adam_eps", train.adam_eps}, {"grad_block", train.grad_block}};
  j["social"] = {{"lambda_d", social.lambda_d}, {"lambda_i", social.lambda_i},
                 {"lambda_s", social.lambda_s}, {"r_d", social.r_d},
                 {"r_i", social.r_i},           {"r_s", social.r_s},
                 {"theta", social.theta},       {"epsilon", social.epsilon},
                 {"k_max", social.k_max},       {"resolution", social.resolution},
                 {"v_cap", social.v_cap}};
  j["model"] = {{"scalar_scale_weights", scalar_scale_weights}};
  j["out_dir"] = out_dir;
  return j;
}

std::string RunConfig::canonical_dump() const {
  // nlohmann::json objects iterate in sorted key order, and doubles are
  // emitted with shortest round-trip formatting, so this string is stable.
  // out_dir is a location, not behavior, and stays out of the fingerprint.
  nlohmann::json j = to_json();
  j.erase("out_dir");
  return j.dump();
}

void RunConfig::validate() const {
  if (horizon.t_obs < 2) throw ConfigError("config: horizon.t_obs must be >= 2");
  if (horizon.t_pred < 1) throw ConfigError("config: horizon.t_pred must be >= 1");
  if (horizon.stride < 1) throw ConfigError("config: horizon.stride must be >= 1");
  if (dataset.frame_interval_s <= 0)
    throw ConfigError("config: dataset.frame_interval_s must be positive");
  if (record_window.t_max < 1) throw ConfigError("config: record_window.t_max must be >= 1");
  if (record_window.n_min < 0 || record_window.n_min > record_window.n_max)
    throw ConfigError("config: need 0 <= record_window.n_min <= record_window.n_max");
  if (grid.resolution <= 0) throw ConfigError("config: grid.resolution must be positive");
  if (grid.local_side_m <= 0) throw ConfigError("config: grid.local_side_m must be positive");
  if (train.epochs < 0) throw ConfigError("config: train.epochs must be >= 0");
  if (train.lr <= 0) throw ConfigError("config: train.lr must be positive");
  if (train.final_lr_frac < 0 || train.final_lr_frac > 1)
    throw ConfigError("config: train.final_lr_frac must be in [0, 1]");
  if (train.grad_block < 1) throw ConfigError("config: train.grad_block must be >= 1");
  if (social.r_d <= 0 || social.r_i <= 0 || social.r_s <= 0)
    throw ConfigError("config: social radii must be positive");
  if (social.theta <= 0) throw ConfigError("config: social.theta must be positive");
  if (social.k_max < 1) throw ConfigError("config: social.k_max must be >= 1");
  if (social.resolution <= 0) throw ConfigError("config: social.resolution must be positive");
  if (social.v_cap <= 0) throw ConfigError("config: social.v_cap must be positive");
  const int side = local_side_cells();
  if (side % 4 != 0)
    throw ConfigError("config: local map side (" + std::to_string(side) +
                      " cells) must be divisible by 4");
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.t_obs = horizon.t_obs;
  m.t_pred = horizon.t_pred;
  m.local_side = local_side_cells();
  m.scalar_scale_weights = scalar_scale_weights;
  return m;
}

int RunConfig::local_side_cells() const {
  return bgm::local_side_cells(grid.local_side_m, grid.resolution);
}

}  // namespace bgm
