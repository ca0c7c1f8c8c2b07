#pragma once

#include <cstdint>
#include <string>

#include "bgm/layers.hpp"

namespace bgm::nn {

/// Binary checkpoint of named f64 tensors. Raw IEEE-754 bytes, so
/// save -> load -> save round-trips bitwise.
void save_checkpoint(const std::string& path, const ParamSet& params,
                     uint64_t config_fingerprint);

struct Checkpoint {
  ParamSet params;
  uint64_t config_fingerprint = 0;
};

Checkpoint load_checkpoint(const std::string& path);

/// Throws when the loaded tensors do not match `expected` name-for-name and
/// shape-for-shape.
void check_compatible(const ParamSet& loaded, const ParamSet& expected);

}  // namespace bgm::nn
