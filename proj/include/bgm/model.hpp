#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bgm/dataset.hpp"
#include "bgm/guidance_map.hpp"
#include "bgm/layers.hpp"
#include "bgm/tape.hpp"

namespace bgm {

struct ModelConfig {
  int t_obs = 8;
  int t_pred = 12;
  int embed_dim = 64;
  int hidden_dim = 64;
  int feature_dim = 256;
  int conv1_channels = 8;
  int conv2_channels = 16;
  int local_side = 32;  // local map patch side in cells
  // Per-scale weights are matrices by default; the scalar variant keeps one
  // trainable coefficient per time scale instead.
  bool scalar_scale_weights = false;

  int decoder_hidden() const { return t_pred * 64; }
};

struct ParamIndex {
  int embed_w = -1, embed_b = -1;
  int lstm_wx = -1, lstm_wh = -1, lstm_b = -1;
  std::vector<int> scale_w;
  int scale_b = -1;
  int seq_w = -1, seq_b = -1;
  int conv1_w = -1, conv1_b = -1, conv2_w = -1, conv2_b = -1;
  int proj_w = -1, proj_b = -1;
  int dec1_w = -1, dec1_b = -1, dec2_w = -1, dec2_b = -1;
};

/// Trainable predictor: a shared-weight LSTM over every observation prefix
/// with per-scale mixing weights, a small CNN over the agent's local
/// guidance map, and a one-shot MLP decoder producing all predicted offsets
/// at once. Positions are handled relative to the last observed point.
class Model {
 public:
  ModelConfig cfg;
  nn::ParamSet params;
  ParamIndex idx;

  static Model init(const ModelConfig& cfg, uint64_t seed);
  static Model from_checkpoint(const ModelConfig& cfg, nn::ParamSet loaded);

  /// Parameters registered on a tape. Frozen binding skips gradient
  /// tracking; use it for inference.
  struct Bound {
    nn::Tape* tape = nullptr;
    std::vector<nn::Tape::Id> ids;  // aligned with params order
  };
  Bound bind(nn::Tape& tape, bool frozen = false) const;

  /// Sequence feature from observed positions relative to the last one.
  nn::Tape::Id history_feature(Bound& b, const std::vector<TrajPoint>& observed_rel) const;
  /// Context feature from a [1, side, side] patch normalized to [0, 1].
  nn::Tape::Id context_feature(Bound& b, const nn::Tensor& patch01) const;
  /// Joint decode to t_pred*2 offsets relative to the last observed point.
  nn::Tape::Id preliminary_offsets(Bound& b, nn::Tape::Id seq, nn::Tape::Id ctx) const;
  /// Euclidean-norm loss summed over predicted steps for one sample.
  nn::Tape::Id sample_loss(Bound& b, const TrajectorySample& s, const nn::Tensor& patch01,
                           bool use_context) const;

  // Eager single-sample paths on frozen parameters.
  nn::Tensor encode_history(const std::vector<TrajPoint>& observed) const;
  nn::Tensor encode_context(const LocalMap& local) const;
  std::vector<TrajPoint> decode_preliminary(const nn::Tensor& seq, const nn::Tensor& ctx,
                                            TrajPoint last_observed) const;
  std::vector<TrajPoint> predict(const TrajectorySample& sample, const LocalMap& local,
                                 bool use_context = true) const;

  nn::Tensor zero_context_feature() const { return nn::Tensor({cfg.feature_dim}); }
};

/// Patch counts scaled into [0, 1] by the patch maximum (at least 1).
nn::Tensor normalized_patch(const LocalMap& local);

struct TrainExample {
  const TrajectorySample* sample = nullptr;
  const LocalMap* local = nullptr;
};

struct TrainingDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  int epochs = 500;
  double lr = 0.01;
  // The step size ramps linearly from lr to lr * final_lr_frac over the run;
  // the norm loss keeps unit-scale gradients near the optimum, so a fixed
  // rate would leave the parameters cycling at an lr-sized error floor.
  double final_lr_frac = 0.0;
  uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  bool use_context = true;
  bool parallel = true;
  int grad_block = 16;  // per-sample gradient slots held at once
  std::function<void(int, double, double)> on_epoch;  // (epoch, loss_sum, train_ade)
};

struct TrainResult {
  std::vector<double> epoch_loss;  // summed over samples and steps
  std::vector<double> epoch_ade;
};

/// Full-batch training of the preliminary predictor. The social refinement
/// stage is not part of the training path. Deterministic for a fixed seed:
/// per-sample gradients are reduced in sample order regardless of threading.
TrainResult train(Model& model, const std::vector<TrainExample>& examples,
                  const TrainConfig& cfg);

/// Loss-gradient over a batch, summed in sample order. `loss_sum` receives
/// the summed per-sample losses.
std::vector<nn::Tensor> batch_gradient(const Model& model,
                                       const std::vector<TrainExample>& examples,
                                       bool use_context, bool parallel, int grad_block,
                                       double* loss_sum);
std::vector<nn::Tensor> batch_gradient_serial(const Model& model,
                                              const std::vector<TrainExample>& examples,
                                              bool use_context, double* loss_sum);

std::vector<std::vector<TrajPoint>> predict_batch(const Model& model,
                                                  const std::vector<TrainExample>& examples,
                                                  bool use_context, bool parallel);

}  // namespace bgm
