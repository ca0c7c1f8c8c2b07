#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bgm/eval.hpp"
#include "bgm/layers.hpp"
#include "support/oracles.hpp"

using namespace bgm;

TEST_SUITE("eval") {

namespace {

std::vector<TrajPoint> offset_path(const std::vector<TrajPoint>& base, TrajPoint off) {
  std::vector<TrajPoint> out;
  for (auto p : base) out.push_back(p + off);
  return out;
}

}  // namespace

TEST_CASE("ade basics: zero, constant offset, two-step mean") {
  std::vector<TrajPoint> truth{{0, 0}, {1, 0}, {2, 0}};
  CHECK(ade(truth, truth) == 0.0);
  CHECK(ade(offset_path(truth, {0, 1}), truth) == 1.0);

  std::vector<TrajPoint> t2{{0, 0}, {0, 0}};
  std::vector<TrajPoint> p2{{1, 0}, {3, 0}};
  CHECK(ade(p2, t2) == 2.0);
  CHECK_THROWS_AS(ade(p2, truth), std::invalid_argument);
}

TEST_CASE("fde basics: zero, final offset, single step") {
  std::vector<TrajPoint> truth{{0, 0}, {1, 0}, {2, 0}};
  CHECK(fde(truth, truth) == 0.0);
  std::vector<TrajPoint> pred{{5, 5}, {9, 9}, {2, 2}};
  CHECK(fde(pred, truth) == 2.0);

  std::vector<TrajPoint> one_t{{3, 4}};
  std::vector<TrajPoint> one_p{{0, 0}};
  CHECK(fde(one_p, one_t) == 5.0);
  CHECK(fde(one_p, one_t) == ade(one_p, one_t));
  CHECK_THROWS_AS(fde({}, {}), std::invalid_argument);
}

TEST_CASE("metrics are invariant under joint rigid motions") {
  nn::Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<TrajPoint> truth, pred;
    for (int i = 0; i < 6; ++i) {
      truth.push_back({rng.uniform(-4, 4), rng.uniform(-4, 4)});
      pred.push_back({rng.uniform(-4, 4), rng.uniform(-4, 4)});
    }
    const double a0 = ade(pred, truth);
    const double f0 = fde(pred, truth);
    const double angle = rng.uniform(0, 6.28318);
    const TrajPoint shift{rng.uniform(-9, 9), rng.uniform(-9, 9)};
    auto rigid = [&](TrajPoint p) {
      return TrajPoint{p.x * std::cos(angle) - p.y * std::sin(angle) + shift.x,
                       p.x * std::sin(angle) + p.y * std::cos(angle) + shift.y};
    };
    std::vector<TrajPoint> truth_m, pred_m;
    for (auto p : truth) truth_m.push_back(rigid(p));
    for (auto p : pred) pred_m.push_back(rigid(p));
    CHECK(ade(pred_m, truth_m) == doctest::Approx(a0).epsilon(1e-10));
    CHECK(fde(pred_m, truth_m) == doctest::Approx(f0).epsilon(1e-10));
  }
}

namespace {

TrajectorySample sample_from(const std::vector<TrajPoint>& observed) {
  TrajectorySample s;
  s.observed = observed;
  return s;
}

}  // namespace

TEST_CASE("linear baseline continues straight lines exactly") {
  std::vector<TrajPoint> obs;
  for (int t = 0; t < 8; ++t) obs.push_back({0.5 * t, 1.0 - 0.25 * t});
  auto pred = linear_baseline(sample_from(obs), 12);
  REQUIRE(pred.size() == 12);
  for (int t = 0; t < 12; ++t) {
    CHECK(pred[t].x == doctest::Approx(0.5 * (8 + t)).epsilon(1e-12));
    CHECK(pred[t].y == doctest::Approx(1.0 - 0.25 * (8 + t)).epsilon(1e-12));
  }
}

TEST_CASE("linear baseline repeats a stationary point") {
  std::vector<TrajPoint> obs(8, TrajPoint{2.5, -1.0});
  auto pred = linear_baseline(sample_from(obs), 5);
  for (auto p : pred) {
    CHECK(p.x == doctest::Approx(2.5));
    CHECK(p.y == doctest::Approx(-1.0));
  }
}

TEST_CASE("linear baseline matches the normal-equation oracle on a parabola") {
  std::vector<TrajPoint> obs;
  for (int t = 0; t < 8; ++t)
    obs.push_back({0.1 * t * t, 3.0 - 0.05 * t * t});
  auto pred = linear_baseline(sample_from(obs), 6);
  auto oracle = oracles::normal_equation_fit(obs, 6);
  REQUIRE(pred.size() == oracle.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    CHECK(pred[i].x == doctest::Approx(oracle[i].x).epsilon(1e-10));
    CHECK(pred[i].y == doctest::Approx(oracle[i].y).epsilon(1e-10));
  }
}

TEST_CASE("aggregate averages per scene (unweighted) and per sample (weighted)") {
  std::vector<SceneMetrics> rows{{"a", 0.2, 0.4, 10}, {"b", 0.6, 1.2, 30}};
  MetricReport report = aggregate(rows, "bgm", 0x42);
  CHECK(report.avg_ade == doctest::Approx(0.4));
  CHECK(report.avg_fde == doctest::Approx(0.8));
  CHECK(report.weighted_ade == doctest::Approx((0.2 * 10 + 0.6 * 30) / 40.0));
  CHECK(report.total_samples == 40);

  auto j = report.to_json();
  CHECK(j["variant"] == "bgm");
  CHECK(j["config_fingerprint"] == "0000000000000042");
  CHECK(j["per_scene"].size() == 2);
  CHECK(report.table().find("average") != std::string::npos);
}

TEST_CASE("per-sample error dump reproduces the report averages") {
  ScenePredictions preds;
  preds.scene = "audit";
  nn::Rng rng(6);
  for (int i = 0; i < 12; ++i) {
    PredictionRecord rec;
    rec.agent_id = i;
    rec.t0 = i;
    for (int t = 0; t < 4; ++t) {
      rec.ground_truth.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3)});
      rec.refined.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3)});
    }
    preds.records.push_back(rec);
  }
  std::vector<PerSampleError> dump;
  SceneMetrics metrics = score_scene(preds, &dump);
  REQUIRE(dump.size() == preds.records.size());
  double mean_ade = 0.0, mean_fde = 0.0;
  for (const auto& e : dump) {
    mean_ade += e.ade;
    mean_fde += e.fde;
  }
  mean_ade /= static_cast<double>(dump.size());
  mean_fde /= static_cast<double>(dump.size());
  CHECK(metrics.ade == doctest::Approx(mean_ade).epsilon(1e-12));
  CHECK(metrics.fde == doctest::Approx(mean_fde).epsilon(1e-12));

  const auto path = std::filesystem::temp_directory_path() / "bgm_errors_test.csv";
  write_error_csv(path.string(), dump, 0xbeef);
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "# config_fingerprint=000000000000beef");
  REQUIRE(std::getline(in, line));
  CHECK(line == "scene,agent_id,t0,ade,fde");
  double sum = 0.0;
  int rows = 0;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    std::string scene;
    long long agent, t0;
    double a, f;
    row >> scene >> agent >> t0 >> a >> f;
    sum += a;
    ++rows;
  }
  CHECK(rows == 12);
  CHECK(sum / 12.0 == doctest::Approx(metrics.ade).epsilon(1e-12));
  std::filesystem::remove(path);
}

}  // TEST_SUITE
