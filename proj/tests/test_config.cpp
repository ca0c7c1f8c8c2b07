#include "doctest.h"

#include "bgm/config.hpp"

using namespace bgm;

TEST_SUITE("config") {

TEST_CASE("defaults carry the documented constants") {
  RunConfig c;
  CHECK(c.horizon.t_obs == 8);
  CHECK(c.horizon.t_pred == 12);
  CHECK(c.dataset.frame_interval_s == 0.4);
  CHECK(c.grid.resolution == 0.25);
  CHECK(c.grid.local_side_m == 8.0);
  CHECK(c.local_side_cells() == 32);
  CHECK(c.train.epochs == 500);
  CHECK(c.train.lr == 0.01);
  CHECK(c.train.final_lr_frac == 0.0);
  CHECK(c.social.lambda_d == 1.0);
  CHECK(c.social.lambda_i == 1.0);
  CHECK(c.social.lambda_s == 0.2);
  CHECK(c.social.r_d == 2.0);
  CHECK(c.social.r_i == 1.5);
  CHECK(c.social.r_s == 0.1);
  CHECK(c.social.theta == 0.001);
  CHECK(c.social.k_max == 10);
  CHECK(c.social.resolution == 0.1);
  CHECK(c.record_window.t_max == 150);
  CHECK(c.record_window.n_min == 50);
  CHECK(c.record_window.n_max == 1000);
}

TEST_CASE("overrides apply through the documented keys") {
  nlohmann::json j{{"record_window", {{"t_max", 30}, {"n_min", 5}, {"n_max", 90}}},
                   {"social", {{"lambda_s", 0.5}, {"epsilon", 0.001}, {"v_cap", 4.0}}},
                   {"train", {{"epochs", 7}, {"lr", 0.2}, {"seed", 99}, {"final_lr_frac", 0.1}}},
                   {"horizon", {{"stride", 3}}},
                   {"model", {{"scalar_scale_weights", true}}}};
  RunConfig c = RunConfig::from_json(j);
  CHECK(c.record_window.t_max == 30);
  CHECK(c.social.lambda_s == 0.5);
  CHECK(c.social.epsilon == 0.001);
  CHECK(c.social.v_cap == 4.0);
  CHECK(c.train.epochs == 7);
  CHECK(c.train.seed == 99);
  CHECK(c.train.final_lr_frac == 0.1);
  CHECK(c.horizon.stride == 3);
  CHECK(c.scalar_scale_weights);
  CHECK(c.model_config().scalar_scale_weights);
}

TEST_CASE("unknown keys are rejected with their path") {
  CHECK_THROWS_WITH_AS(RunConfig::from_json({{"typo", 1}}), doctest::Contains("typo"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(RunConfig::from_json({{"social", {{"lambda_x", 1.0}}}}),
                       doctest::Contains("social.lambda_x"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json({{"train", {{"momentum", 0.9}}}}), ConfigError);
}

TEST_CASE("invalid values fail validation") {
  CHECK_THROWS_AS(RunConfig::from_json({{"horizon", {{"t_obs", 1}}}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json({{"grid", {{"resolution", -0.5}}}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json({{"record_window", {{"n_min", 10}, {"n_max", 2}}}}),
                  ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json({{"social", {{"theta", 0.0}}}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json({{"train", {{"final_lr_frac", 1.5}}}}), ConfigError);
}

TEST_CASE("fingerprint is stable and sensitive") {
  RunConfig a, b;
  CHECK(a.fingerprint() == b.fingerprint());
  b.train.seed = 2;
  CHECK(a.fingerprint() != b.fingerprint());

  RunConfig c = RunConfig::from_json(a.to_json());
  CHECK(c.fingerprint() == a.fingerprint());
  CHECK(hex64(0x1a2b) == "0000000000001a2b");
}

}  // TEST_SUITE
