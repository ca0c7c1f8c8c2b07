#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "bgm/checkpoint.hpp"
#include "bgm/layers.hpp"
#include "support/oracles.hpp"

using namespace bgm::nn;

TEST_SUITE("layers") {

TEST_CASE("lstm cell with all-zero parameters silences the output") {
  const int hidden = 4, input = 3;
  Tape tape;
  LstmIds ids{tape.leaf(Tensor({4 * hidden, input})), tape.leaf(Tensor({4 * hidden, hidden})),
              tape.leaf(Tensor({4 * hidden}))};
  Tape::Id x = tape.leaf(Tensor::from({input}, {0.3, -0.2, 1.0}));
  Tape::Id h = tape.leaf(Tensor({hidden}));
  Tape::Id c = tape.leaf(Tensor({hidden}));
  auto [h1, c1] = lstm_cell(tape, x, h, c, ids, hidden);
  for (int i = 0; i < hidden; ++i) {
    CHECK(tape.value(h1)[i] == 0.0);  // sigmoid(0) * tanh(0)
    CHECK(tape.value(c1)[i] == 0.0);
  }
}

TEST_CASE("lstm cell matches a gate-by-gate scalar reference") {
  const int hidden = 5, input = 3;
  Rng rng(13);
  Tensor w_x({4 * hidden, input});
  Tensor w_h({4 * hidden, hidden});
  Tensor bias({4 * hidden});
  xavier_uniform(w_x, input, hidden, rng);
  xavier_uniform(w_h, hidden, hidden, rng);
  for (int64_t i = 0; i < bias.size(); ++i) bias[i] = rng.uniform(-0.5, 0.5);
  std::vector<double> x{0.4, -1.2, 0.7}, h0{0.1, -0.3, 0.2, 0.0, 0.5},
      c0{-0.2, 0.4, 0.0, 0.9, -0.6};

  Tape tape;
  LstmIds ids{tape.leaf(w_x), tape.leaf(w_h), tape.leaf(bias)};
  auto [h1, c1] = lstm_cell(tape, tape.leaf(Tensor::from({input}, x)),
                            tape.leaf(Tensor::from({hidden}, h0)),
                            tape.leaf(Tensor::from({hidden}, c0)), ids, hidden);

  auto ref = oracles::lstm_step_reference(x, h0, c0, w_x, w_h, bias, hidden);
  for (int i = 0; i < hidden; ++i) {
    CHECK(tape.value(h1)[i] == doctest::Approx(ref.h[i]).epsilon(1e-12));
    CHECK(tape.value(c1)[i] == doctest::Approx(ref.c[i]).epsilon(1e-12));
  }
}

TEST_CASE("lstm cell gradients pass a finite-difference check") {
  const int hidden = 3, input = 2;
  Rng rng(29);
  auto rand_tensor = [&](std::vector<int> shape) {
    Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-0.8, 0.8);
    return t;
  };
  auto report = oracles::gradient_check(
      {rand_tensor({4 * hidden, input}), rand_tensor({4 * hidden, hidden}),
       rand_tensor({4 * hidden}), rand_tensor({input}), rand_tensor({hidden}),
       rand_tensor({hidden})},
      [=](Tape& t, const std::vector<Tape::Id>& in) {
        LstmIds ids{in[0], in[1], in[2]};
        auto [h1, c1] = lstm_cell(t, in[3], in[4], in[5], ids, hidden);
        return t.add(t.sum_of_squares(h1), t.sum(c1));
      });
  CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("adam leaves parameters alone under zero gradients") {
  ParamSet params;
  params.add("w", Tensor::from({3}, {1.0, -2.0, 3.0}));
  AdamState state = AdamState::init(params, {});
  adam_step(state, params, {Tensor({3})});
  CHECK(params.tensors[0].v == std::vector<double>{1.0, -2.0, 3.0});
}

TEST_CASE("first adam step moves by about the learning rate") {
  // With bias correction the first update is lr * g / (|g| + eps).
  ParamSet params;
  params.add("w", Tensor::from({2}, {0.0, 0.0}));
  AdamState state = AdamState::init(params, {0.01, 0.9, 0.999, 1e-8});
  adam_step(state, params, {Tensor::from({2}, {0.5, -2.0})});
  CHECK(params.tensors[0][0] == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(params.tensors[0][1] == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("adam trajectories are deterministic") {
  auto run = []() {
    ParamSet params;
    params.add("w", Tensor::from({2}, {1.0, 1.0}));
    AdamState state = AdamState::init(params, {});
    for (int i = 0; i < 20; ++i) {
      Tensor g = Tensor::from({2}, {params.tensors[0][0], 0.3 * params.tensors[0][1]});
      adam_step(state, params, {g});
    }
    return params.tensors[0].v;
  };
  CHECK(run() == run());
}

TEST_CASE("adam rejects mismatched gradient shapes") {
  ParamSet params;
  params.add("w", Tensor({3}));
  AdamState state = AdamState::init(params, {});
  CHECK_THROWS_WITH_AS(adam_step(state, params, {Tensor({4})}), doctest::Contains("w"),
                       std::invalid_argument);
}

TEST_CASE("seeded rng and xavier init are reproducible") {
  Rng a(1234), b(1234);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform(-1, 1) == b.uniform(-1, 1));
  Tensor t1({20, 10}), t2({20, 10});
  Rng ra(7), rb(7);
  xavier_uniform(t1, 10, 20, ra);
  xavier_uniform(t2, 10, 20, rb);
  CHECK(t1.v == t2.v);
  const double limit = std::sqrt(6.0 / 30.0);
  for (int64_t i = 0; i < t1.size(); ++i) CHECK(std::abs(t1[i]) <= limit);
}

TEST_CASE("checkpoints round-trip bitwise") {
  Rng rng(77);
  ParamSet params;
  Tensor w({6, 4});
  xavier_uniform(w, 4, 6, rng);
  w[0] = 0.1 + 0.2;  // deliberately non-representable decimal
  params.add("layer.w", std::move(w));
  params.add("layer.b", Tensor::from({2}, {1e-300, -3.25}));

  const auto path = std::filesystem::temp_directory_path() / "bgm_ckpt_test.bgm";
  save_checkpoint(path.string(), params, 0x1122334455667788ULL);
  Checkpoint loaded = load_checkpoint(path.string());
  CHECK(loaded.config_fingerprint == 0x1122334455667788ULL);
  REQUIRE(loaded.params.count() == 2);
  CHECK(loaded.params.names == params.names);
  CHECK(loaded.params.tensors[0].v == params.tensors[0].v);
  CHECK(loaded.params.tensors[1].v == params.tensors[1].v);

  // second save of the loaded set is byte-identical
  const auto path2 = std::filesystem::temp_directory_path() / "bgm_ckpt_test2.bgm";
  save_checkpoint(path2.string(), loaded.params, loaded.config_fingerprint);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)), {});
  std::string b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);
  std::filesystem::remove(path);
  std::filesystem::remove(path2);

  ParamSet other;
  other.add("layer.w", Tensor({6, 4}));
  CHECK_THROWS_AS(check_compatible(loaded.params, other), std::runtime_error);
}

}  // TEST_SUITE
