#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bgm/tape.hpp"
#include "bgm/tensor.hpp"

namespace bgm::nn {

/// Seedable RNG with a platform-independent uniform mapping.
struct Rng {
  std::mt19937_64 eng;
  explicit Rng(uint64_t seed) : eng(seed) {}
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;  // [0, 1)
    return lo + (hi - lo) * u;
  }
};

void xavier_uniform(Tensor& t, int fan_in, int fan_out, Rng& rng);

/// Named parameter tensors in fixed registration order. The order defines
/// gradient/optimizer alignment and the checkpoint layout.
struct ParamSet {
  std::vector<std::string> names;
  std::vector<Tensor> tensors;

  int add(std::string name, Tensor init) {
    names.push_back(std::move(name));
    tensors.push_back(std::move(init));
    return static_cast<int>(tensors.size() - 1);
  }
  size_t count() const { return tensors.size(); }
  int64_t total_size() const {
    int64_t n = 0;
    for (const auto& t : tensors) n += t.size();
    return n;
  }
  const Tensor* find(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return &tensors[i];
    return nullptr;
  }
};

/// Fused LSTM cell parameters on a tape. Gate rows are ordered
/// input, forget, candidate, output.
struct LstmIds {
  Tape::Id w_x;  // [4H, input]
  Tape::Id w_h;  // [4H, H]
  Tape::Id bias; // [4H]
};

/// One step of the standard cell: sigmoid input/forget/output gates, tanh
/// candidate. Returns (h', c').
std::pair<Tape::Id, Tape::Id> lstm_cell(Tape& tape, Tape::Id x, Tape::Id h, Tape::Id c,
                                        const LstmIds& p, int hidden);

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  int64_t step = 0;
  std::vector<Tensor> m;  // first moments, aligned with the ParamSet
  std::vector<Tensor> v;  // second moments

  static AdamState init(const ParamSet& params, AdamConfig cfg);
};

/// Textbook bias-corrected update, in place.
void adam_step(AdamState& state, ParamSet& params, const std::vector<Tensor>& grads);

}  // namespace bgm::nn
