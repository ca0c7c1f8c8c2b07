#include "doctest.h"

#include "bgm/layers.hpp"
#include "bgm/tape.hpp"
#include "support/oracles.hpp"

using namespace bgm::nn;
using oracles::gradient_check;

TEST_SUITE("tape") {

namespace {

Tensor randn(std::vector<int> shape, Rng& rng, double lo = -1.5, double hi = 1.5) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("relu clamps negatives") {
  Tape tape;
  Tape::Id x = tape.leaf(Tensor::from({3}, {-1.0, 0.0, 2.0}));
  const Tensor& y = tape.value(tape.relu(x));
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 0.0);
  CHECK(y[2] == 2.0);
}

TEST_CASE("valid conv of ones against a ones kernel sums the window") {
  Tape tape;
  Tape::Id x = tape.leaf(Tensor::from({1, 3, 3}, std::vector<double>(9, 1.0)));
  Tape::Id w = tape.leaf(Tensor::from({1, 1, 3, 3}, std::vector<double>(9, 1.0)));
  Tape::Id b = tape.leaf(Tensor({1}));
  const Tensor& y = tape.value(tape.conv2d(x, w, b, Pad::valid));
  REQUIRE(y.size() == 1);
  CHECK(y[0] == 9.0);
}

TEST_CASE("matmul by identity is identity") {
  Tape tape;
  Tensor eye({3, 3});
  for (int i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
  Tensor a = Tensor::from({3, 2}, {1, 2, 3, 4, 5, 6});
  const Tensor& y = tape.value(tape.matmul(tape.leaf(eye), tape.leaf(a)));
  CHECK(y.v == a.v);
}

TEST_CASE("shape mismatches name the op and both shapes") {
  Tape tape;
  Tape::Id a = tape.leaf(Tensor({2, 3}));
  Tape::Id b = tape.leaf(Tensor({2, 3}));
  CHECK_THROWS_WITH_AS(tape.matmul(a, b), doctest::Contains("matmul"), ShapeError);
  CHECK_THROWS_WITH_AS(tape.add(a, tape.leaf(Tensor({4}))), doctest::Contains("[2x3]"),
                       ShapeError);
  CHECK_THROWS_AS(tape.concat(a, b), ShapeError);
  CHECK_THROWS_AS(tape.slice(tape.leaf(Tensor({4})), 2, 5), ShapeError);
}

TEST_CASE("backward of sum_of_squares doubles the input") {
  Tape tape;
  Tape::Id w = tape.var(Tensor::from({1}, {3.0}));
  Tape::Id loss = tape.sum_of_squares(w);
  tape.backward(loss);
  CHECK(tape.grad(w)[0] == doctest::Approx(6.0));
}

TEST_CASE("parameters the loss never touches get a zero gradient") {
  Tape tape;
  Tape::Id used = tape.var(Tensor::from({2}, {1.0, 2.0}));
  Tape::Id unused = tape.var(Tensor::from({3}, {5.0, 5.0, 5.0}));
  Tape::Id loss = tape.sum_of_squares(used);
  tape.backward(loss);
  REQUIRE(tape.grad(unused).size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(tape.grad(unused)[i] == 0.0);
}

TEST_CASE("non-scalar loss is rejected") {
  Tape tape;
  Tape::Id v = tape.var(Tensor({3}));
  CHECK_THROWS_AS(tape.backward(v), std::invalid_argument);
}

TEST_CASE("forward evaluation is bitwise deterministic") {
  Rng rng(3);
  Tensor a = randn({4, 4}, rng);
  Tensor x = randn({4}, rng);
  auto run = [&]() {
    Tape tape;
    return tape.value(tape.tanh(tape.matmul(tape.leaf(a), tape.leaf(x)))).v;
  };
  CHECK(run() == run());
}

TEST_CASE("avg pool preserves the mean exactly") {
  Rng rng(9);
  Tensor x = randn({2, 4, 6}, rng);
  Tape tape;
  Tape::Id pooled = tape.avg_pool2(tape.leaf(x));
  const Tensor& y = tape.value(pooled);
  double mean_x = 0.0, mean_y = 0.0;
  for (int64_t i = 0; i < x.size(); ++i) mean_x += x[i];
  for (int64_t i = 0; i < y.size(); ++i) mean_y += y[i];
  mean_x /= static_cast<double>(x.size());
  mean_y /= static_cast<double>(y.size());
  CHECK(mean_y == doctest::Approx(mean_x).epsilon(1e-12));
}

TEST_CASE("every primitive passes a finite-difference check on random shapes") {
  Rng rng(42);
  const double tol = 1e-4;
  for (int trial = 0; trial < 6; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform(0, 3));
    const int k = 2 + static_cast<int>(rng.uniform(0, 3));
    const int n = 2 + static_cast<int>(rng.uniform(0, 3));

    CAPTURE(trial);
    // matmul (2d x 2d) -> sum
    CHECK(gradient_check({randn({m, k}, rng), randn({k, n}, rng)},
                         [](Tape& t, const std::vector<Tape::Id>& in) {
                           return t.sum(t.matmul(in[0], in[1]));
                         })
              .max_rel_err < tol);
    // matmul (2d x 1d) through tanh
    CHECK(gradient_check({randn({m, k}, rng), randn({k}, rng)},
                         [](Tape& t, const std::vector<Tape::Id>& in) {
                           return t.sum(t.tanh(t.matmul(in[0], in[1])));
                         })
              .max_rel_err < tol);
    // add, mul, scalar_mul, sigmoid, relu chain
    CHECK(gradient_check({randn({m * k}, rng), randn({m * k}, rng)},
                         [](Tape& t, const std::vector<Tape::Id>& in) {
                           Tape::Id s = t.add(t.mul(in[0], in[1]), t.scalar_mul(in[1], 0.3));
                           return t.sum(t.relu(t.sigmoid(s)));
                         })
              .max_rel_err < tol);
    // scalar broadcast mul
    CHECK(gradient_check({randn({m, k}, rng), randn({1}, rng)},
                         [](Tape& t, const std::vector<Tape::Id>& in) {
                           return t.sum(t.mul(in[0], in[1]));
                         })
              .max_rel_err < tol);
    // concat + slice
    CHECK(gradient_check({randn({m}, rng), randn({k}, rng)},
                         [=](Tape& t, const std::vector<Tape::Id>& in) {
                           Tape::Id c = t.concat(in[0], in[1]);
                           return t.sum_of_squares(t.slice(c, 1, m + k - 2));
                         })
              .max_rel_err < tol);
    // conv (same and valid) + avg pool + flatten
    CHECK(gradient_check({randn({2, 4, 4}, rng), randn({3, 2, 3, 3}, rng), randn({3}, rng)},
                         [](Tape& t, const std::vector<Tape::Id>& in) {
                           Tape::Id y = t.conv2d(in[0], in[1], in[2], Pad::same);
                           return t.sum(t.flatten(t.avg_pool2(y)));
                         })
              .max_rel_err < tol);
    CHECK(gradient_check({randn({2, 5, 5}, rng), randn({1, 2, 3, 3}, rng), randn({1}, rng)},
                         [](Tape& t, const std::vector<Tape::Id>& in) {
                           return t.sum_of_squares(t.conv2d(in[0], in[1], in[2], Pad::valid));
                         })
              .max_rel_err < tol);
    // sqrt of a positive quantity
    CHECK(gradient_check({randn({m}, rng, 0.5, 2.0)},
                         [](Tape& t, const std::vector<Tape::Id>& in) {
                           return t.sum(t.sqrt(in[0]));
                         })
              .max_rel_err < tol);
    // sum_of_squares -> sqrt (the per-step norm used by the loss)
    CHECK(gradient_check({randn({2}, rng, 0.5, 1.5)},
                         [](Tape& t, const std::vector<Tape::Id>& in) {
                           return t.sqrt(t.sum_of_squares(in[0]));
                         })
              .max_rel_err < tol);
  }
}

TEST_CASE("gradients flow through a small random network") {
  Rng rng(7);
  auto build = [](Tape& t, const std::vector<Tape::Id>& in) {
    Tape::Id h = t.tanh(t.add(t.matmul(in[0], in[3]), in[1]));
    Tape::Id out = t.matmul(in[2], h);
    return t.sum_of_squares(out);
  };
  auto report = gradient_check(
      {randn({5, 3}, rng), randn({5}, rng), randn({2, 5}, rng), randn({3}, rng)}, build);
  CHECK(report.checked == 15 + 5 + 10 + 3);
  CHECK(report.max_rel_err < 1e-5);
}

}  // TEST_SUITE
