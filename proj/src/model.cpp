#include "bgm/model.hpp"

#include <omp.h>

#include <cmath>

#include "bgm/checkpoint.hpp"

namespace bgm {

using nn::Tape;
using nn::Tensor;

namespace {

std::vector<TrajPoint> relativize(const std::vector<TrajPoint>& pts, TrajPoint anchor) {
  std::vector<TrajPoint> rel;
  rel.reserve(pts.size());
  for (auto p : pts) rel.push_back(p - anchor);
  return rel;
}

Tensor flat_points(const std::vector<TrajPoint>& pts) {
  Tensor t({static_cast<int>(pts.size()) * 2});
  for (size_t i = 0; i < pts.size(); ++i) {
    t[2 * i] = pts[i].x;
    t[2 * i + 1] = pts[i].y;
  }
  return t;
}

}  // namespace

Model Model::init(const ModelConfig& cfg, uint64_t seed) {
  Model m;
  m.cfg = cfg;
  const int e = cfg.embed_dim;
  const int h = cfg.hidden_dim;
  const int f = cfg.feature_dim;
  const int c1 = cfg.conv1_channels;
  const int c2 = cfg.conv2_channels;
  const int pooled = cfg.local_side / 4;
  if (cfg.local_side % 4 != 0)
    throw std::invalid_argument("model: local_side must be divisible by 4 for two 2x2 pools");
  const int flat = c2 * pooled * pooled;
  const int dh = cfg.decoder_hidden();

  auto& p = m.params;
  auto& ix = m.idx;
  ix.embed_w = p.add("embed.w", Tensor({e, 2}));
  ix.embed_b = p.add("embed.b", Tensor({e}));
  ix.lstm_wx = p.add("lstm.w_x", Tensor({4 * h, e}));
  ix.lstm_wh = p.add("lstm.w_h", Tensor({4 * h, h}));
  ix.lstm_b = p.add("lstm.b", Tensor({4 * h}));
  for (int t = 1; t <= cfg.t_obs; ++t) {
    std::vector<int> shape = cfg.scalar_scale_weights ? std::vector<int>{1}
                                                      : std::vector<int>{h, h};
    ix.scale_w.push_back(p.add("scale.w" + std::to_string(t), Tensor(shape)));
  }
  ix.scale_b = p.add("scale.b", Tensor({h}));
  ix.seq_w = p.add("seq.w", Tensor({f, h}));
  ix.seq_b = p.add("seq.b", Tensor({f}));
  ix.conv1_w = p.add("ctx.conv1.w", Tensor({c1, 1, 3, 3}));
  ix.conv1_b = p.add("ctx.conv1.b", Tensor({c1}));
  ix.conv2_w = p.add("ctx.conv2.w", Tensor({c2, c1, 3, 3}));
  ix.conv2_b = p.add("ctx.conv2.b", Tensor({c2}));
  ix.proj_w = p.add("ctx.proj.w", Tensor({f, flat}));
  ix.proj_b = p.add("ctx.proj.b", Tensor({f}));
  ix.dec1_w = p.add("dec.l1.w", Tensor({dh, 2 * f}));
  ix.dec1_b = p.add("dec.l1.b", Tensor({dh}));
  ix.dec2_w = p.add("dec.l2.w", Tensor({cfg.t_pred * 2, dh}));
  ix.dec2_b = p.add("dec.l2.b", Tensor({cfg.t_pred * 2}));

  nn::Rng rng(seed);
  auto xavier = [&](int index, int fan_in, int fan_out) {
    nn::xavier_uniform(p.tensors[index], fan_in, fan_out, rng);
  };
  xavier(ix.embed_w, 2, e);
  xavier(ix.lstm_wx, e, h);
  xavier(ix.lstm_wh, h, h);
  for (int w : ix.scale_w) {
    if (cfg.scalar_scale_weights)
      p.tensors[w][0] = 1.0 / cfg.t_obs;
    else
      xavier(w, h, h);
  }
  xavier(ix.seq_w, h, f);
  xavier(ix.conv1_w, 1 * 9, c1 * 9);
  xavier(ix.conv2_w, c1 * 9, c2 * 9);
  xavier(ix.proj_w, flat, f);
  xavier(ix.dec1_w, 2 * f, dh);
  xavier(ix.dec2_w, dh, cfg.t_pred * 2);
  // Open forget gates at the start; everything else stays zero.
  for (int i = h; i < 2 * h; ++i) p.tensors[ix.lstm_b][i] = 1.0;
  return m;
}

Model Model::from_checkpoint(const ModelConfig& cfg, nn::ParamSet loaded) {
  Model expected = Model::init(cfg, 0);
  nn::check_compatible(loaded, expected.params);
  expected.params = std::move(loaded);
  return expected;
}

Model::Bound Model::bind(Tape& tape, bool frozen) const {
  Bound b;
  b.tape = &tape;
  b.ids.reserve(params.count());
  for (const auto& t : params.tensors) b.ids.push_back(frozen ? tape.leaf(t) : tape.param(&t));
  return b;
}

Tape::Id Model::history_feature(Bound& b, const std::vector<TrajPoint>& observed_rel) const {
  if (static_cast<int>(observed_rel.size()) != cfg.t_obs)
    throw std::invalid_argument("history_feature: expected " + std::to_string(cfg.t_obs) +
                                " observed points, got " + std::to_string(observed_rel.size()));
  Tape& t = *b.tape;
  const int h = cfg.hidden_dim;
  nn::LstmIds lstm{b.ids[idx.lstm_wx], b.ids[idx.lstm_wh], b.ids[idx.lstm_b]};

  // One pass over the sequence gives the final hidden state of every prefix,
  // since all prefixes share weights and the zero initial state.
  Tape::Id hid = t.leaf(Tensor({h}));
  Tape::Id cell = t.leaf(Tensor({h}));
  Tape::Id acc = b.ids[idx.scale_b];
  for (int step = 0; step < cfg.t_obs; ++step) {
    Tape::Id pt = t.leaf(Tensor::from({2}, {observed_rel[step].x, observed_rel[step].y}));
    Tape::Id embedded = t.add(t.matmul(b.ids[idx.embed_w], pt), b.ids[idx.embed_b]);
    auto [h_next, c_next] = nn::lstm_cell(t, embedded, hid, cell, lstm, h);
    hid = h_next;
    cell = c_next;
    Tape::Id weighted = cfg.scalar_scale_weights ? t.mul(hid, b.ids[idx.scale_w[step]])
                                                 : t.matmul(b.ids[idx.scale_w[step]], hid);
    acc = t.add(acc, weighted);
  }
  return t.relu(t.add(t.matmul(b.ids[idx.seq_w], acc), b.ids[idx.seq_b]));
}

Tape::Id Model::context_feature(Bound& b, const Tensor& patch01) const {
  if (patch01.rank() != 3 || patch01.dim(0) != 1 || patch01.dim(1) != cfg.local_side ||
      patch01.dim(2) != cfg.local_side)
    throw std::invalid_argument("context_feature: expected patch [1," +
                                std::to_string(cfg.local_side) + "," +
                                std::to_string(cfg.local_side) + "], got " + patch01.shape_str());
  Tape& t = *b.tape;
  Tape::Id x = t.leaf(patch01);
  x = t.avg_pool2(t.relu(t.conv2d(x, b.ids[idx.conv1_w], b.ids[idx.conv1_b])));
  x = t.avg_pool2(t.relu(t.conv2d(x, b.ids[idx.conv2_w], b.ids[idx.conv2_b])));
  x = t.flatten(x);
  return t.add(t.matmul(b.ids[idx.proj_w], x), b.ids[idx.proj_b]);
}

Tape::Id Model::preliminary_offsets(Bound& b, Tape::Id seq, Tape::Id ctx) const {
  Tape& t = *b.tape;
  Tape::Id joint = t.concat(seq, ctx);
  Tape::Id hidden = t.relu(t.add(t.matmul(b.ids[idx.dec1_w], joint), b.ids[idx.dec1_b]));
  return t.add(t.matmul(b.ids[idx.dec2_w], hidden), b.ids[idx.dec2_b]);
}

Tape::Id Model::sample_loss(Bound& b, const TrajectorySample& s, const Tensor& patch01,
                            bool use_context) const {
  Tape& t = *b.tape;
  const TrajPoint anchor = s.observed.back();
  Tape::Id seq = history_feature(b, relativize(s.observed, anchor));
  Tape::Id ctx =
      use_context ? context_feature(b, patch01) : t.leaf(Tensor({cfg.feature_dim}));
  Tape::Id pred = preliminary_offsets(b, seq, ctx);
  Tape::Id truth = t.leaf(flat_points(relativize(s.ground_truth, anchor)));
  Tape::Id diff = t.add(pred, t.scalar_mul(truth, -1.0));
  Tape::Id loss = t.leaf(Tensor::scalar(0.0));
  for (int step = 0; step < cfg.t_pred; ++step)
    loss = t.add(loss, t.sqrt(t.sum_of_squares(t.slice(diff, 2 * step, 2))));
  return loss;
}

Tensor Model::encode_history(const std::vector<TrajPoint>& observed) const {
  Tape tape;
  Bound b = bind(tape, /*frozen=*/true);
  Tape::Id f = history_feature(b, relativize(observed, observed.back()));
  return tape.value(f);
}

Tensor Model::encode_context(const LocalMap& local) const {
  Tape tape;
  Bound b = bind(tape, /*frozen=*/true);
  Tape::Id f = context_feature(b, normalized_patch(local));
  return tape.value(f);
}

std::vector<TrajPoint> Model::decode_preliminary(const Tensor& seq, const Tensor& ctx,
                                                 TrajPoint last_observed) const {
  Tape tape;
  Bound b = bind(tape, /*frozen=*/true);
  Tape::Id out = preliminary_offsets(b, tape.leaf(seq), tape.leaf(ctx));
  const Tensor& offsets = tape.value(out);
  std::vector<TrajPoint> pred(cfg.t_pred);
  for (int i = 0; i < cfg.t_pred; ++i)
    pred[i] = last_observed + TrajPoint{offsets[2 * i], offsets[2 * i + 1]};
  return pred;
}

std::vector<TrajPoint> Model::predict(const TrajectorySample& sample, const LocalMap& local,
                                      bool use_context) const {
  Tensor seq = encode_history(sample.observed);
  Tensor ctx = use_context ? encode_context(local) : zero_context_feature();
  return decode_preliminary(seq, ctx, sample.observed.back());
}

Tensor normalized_patch(const LocalMap& local) {
  Tensor t({1, local.side, local.side});
  int32_t maxv = 1;
  for (int32_t c : local.patch) maxv = std::max(maxv, c);
  for (size_t i = 0; i < local.patch.size(); ++i)
    t[i] = static_cast<double>(local.patch[i]) / static_cast<double>(maxv);
  return t;
}

namespace {

std::vector<Tensor> sample_gradient(const Model& model, const TrainExample& ex, bool use_context,
                                    double* loss_out) {
  Tape tape;
  Model::Bound b = model.bind(tape);
  Tensor patch01 = use_context && ex.local
                       ? normalized_patch(*ex.local)
                       : Tensor({1, model.cfg.local_side, model.cfg.local_side});
  Tape::Id loss = model.sample_loss(b, *ex.sample, patch01, use_context);
  *loss_out = tape.value(loss)[0];
  tape.backward(loss);
  std::vector<Tensor> grads;
  grads.reserve(b.ids.size());
  for (auto id : b.ids) grads.push_back(tape.take_grad(id));
  return grads;
}

}  // namespace

std::vector<Tensor> batch_gradient(const Model& model, const std::vector<TrainExample>& examples,
                                   bool use_context, bool parallel, int grad_block,
                                   double* loss_sum) {
  std::vector<Tensor> total;
  total.reserve(model.params.count());
  for (const auto& t : model.params.tensors) total.emplace_back(t.shape);
  double loss = 0.0;

  const int n = static_cast<int>(examples.size());
  const int block = std::max(1, grad_block);
  std::vector<std::vector<Tensor>> slot(block);
  std::vector<double> losses(block, 0.0);
  for (int start = 0; start < n; start += block) {
    const int m = std::min(block, n - start);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int s = 0; s < m; ++s)
      slot[s] = sample_gradient(model, examples[start + s], use_context, &losses[s]);
    // Reduce in sample order so the result is independent of threading.
    for (int s = 0; s < m; ++s) {
      loss += losses[s];
      for (size_t k = 0; k < total.size(); ++k) {
        const Tensor& g = slot[s][k];
        for (int64_t i = 0; i < g.size(); ++i) total[k][i] += g[i];
      }
      slot[s].clear();
    }
  }
  if (loss_sum) *loss_sum = loss;
  return total;
}

std::vector<Tensor> batch_gradient_serial(const Model& model,
                                          const std::vector<TrainExample>& examples,
                                          bool use_context, double* loss_sum) {
  std::vector<Tensor> total;
  total.reserve(model.params.count());
  for (const auto& t : model.params.tensors) total.emplace_back(t.shape);
  double loss = 0.0;
  for (const auto& ex : examples) {
    double l = 0.0;
    auto grads = sample_gradient(model, ex, use_context, &l);
    loss += l;
    for (size_t k = 0; k < total.size(); ++k)
      for (int64_t i = 0; i < grads[k].size(); ++i) total[k][i] += grads[k][i];
  }
  if (loss_sum) *loss_sum = loss;
  return total;
}

TrainResult train(Model& model, const std::vector<TrainExample>& examples,
                  const TrainConfig& cfg) {
  if (examples.empty()) throw std::invalid_argument("train: empty training set");
  nn::AdamState adam =
      nn::AdamState::init(model.params, {cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps});
  TrainResult result;
  result.epoch_loss.reserve(cfg.epochs);
  result.epoch_ade.reserve(cfg.epochs);

  const double n = static_cast<double>(examples.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double progress = cfg.epochs > 1 ? static_cast<double>(epoch - 1) / (cfg.epochs - 1) : 0.0;
    adam.cfg.lr = cfg.lr * (1.0 - (1.0 - cfg.final_lr_frac) * progress);
    double loss_sum = 0.0;
    auto grads = batch_gradient(model, examples, cfg.use_context, cfg.parallel, cfg.grad_block,
                                &loss_sum);
    if (!std::isfinite(loss_sum))
      throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch) +
                             " (loss=" + std::to_string(loss_sum) + ", lr=" +
                             std::to_string(cfg.lr) + ")");
    // Step size is per-sample; the reported loss stays a plain sum.
    for (auto& g : grads)
      for (int64_t i = 0; i < g.size(); ++i) g[i] /= n;
    nn::adam_step(adam, model.params, grads);

    const double ade = loss_sum / (n * model.cfg.t_pred);
    result.epoch_loss.push_back(loss_sum);
    result.epoch_ade.push_back(ade);
    if (cfg.on_epoch) cfg.on_epoch(epoch, loss_sum, ade);
  }
  return result;
}

std::vector<std::vector<TrajPoint>> predict_batch(const Model& model,
                                                  const std::vector<TrainExample>& examples,
                                                  bool use_context, bool parallel) {
  const int n = static_cast<int>(examples.size());
  std::vector<std::vector<TrajPoint>> out(n);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int i = 0; i < n; ++i) {
    const auto& ex = examples[i];
    LocalMap zero;
    const LocalMap* local = ex.local;
    if (!local) {
      zero = zero_local(ex.sample->agent_id, model.cfg.local_side);
      local = &zero;
    }
    out[i] = model.predict(*ex.sample, *local, use_context);
  }
  return out;
}

}  // namespace bgm
