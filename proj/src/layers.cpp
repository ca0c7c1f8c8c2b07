#include "bgm/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace bgm::nn {

void xavier_uniform(Tensor& t, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
}

std::pair<Tape::Id, Tape::Id> lstm_cell(Tape& tape, Tape::Id x, Tape::Id h, Tape::Id c,
                                        const LstmIds& p, int hidden) {
  Tape::Id gates = tape.add(tape.add(tape.matmul(p.w_x, x), tape.matmul(p.w_h, h)), p.bias);
  Tape::Id gi = tape.sigmoid(tape.slice(gates, 0, hidden));
  Tape::Id gf = tape.sigmoid(tape.slice(gates, hidden, hidden));
  Tape::Id gg = tape.tanh(tape.slice(gates, 2 * hidden, hidden));
  Tape::Id go = tape.sigmoid(tape.slice(gates, 3 * hidden, hidden));
  Tape::Id c_next = tape.add(tape.mul(gf, c), tape.mul(gi, gg));
  Tape::Id h_next = tape.mul(go, tape.tanh(c_next));
  return {h_next, c_next};
}

AdamState AdamState::init(const ParamSet& params, AdamConfig cfg) {
  AdamState s;
  s.cfg = cfg;
  s.m.reserve(params.count());
  s.v.reserve(params.count());
  for (const auto& t : params.tensors) {
    s.m.emplace_back(t.shape);
    s.v.emplace_back(t.shape);
  }
  return s;
}

void adam_step(AdamState& state, ParamSet& params, const std::vector<Tensor>& grads) {
  if (grads.size() != params.count())
    throw std::invalid_argument("adam_step: gradient list does not match parameter set");
  state.step += 1;
  const double b1 = state.cfg.beta1;
  const double b2 = state.cfg.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (size_t k = 0; k < params.count(); ++k) {
    Tensor& p = params.tensors[k];
    const Tensor& g = grads[k];
    if (!p.same_shape(g))
      throw std::invalid_argument("adam_step: shape mismatch for " + params.names[k] + ": " +
                                  p.shape_str() + " vs " + g.shape_str());
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    for (int64_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= state.cfg.lr * mhat / (std::sqrt(vhat) + state.cfg.eps);
    }
  }
}

}  // namespace bgm::nn
