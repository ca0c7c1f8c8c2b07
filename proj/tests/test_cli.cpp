#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "bgm/cli.hpp"
#include "bgm/config.hpp"
#include "bgm/synth.hpp"

using namespace bgm;
namespace fs = std::filesystem;

TEST_SUITE("cli") {

namespace {

int run_cli(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"bgm"};
  argv.insert(argv.end(), args.begin(), args.end());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

struct Corpus {
  fs::path dir;
  std::string config_path;

  Corpus() {
    dir = fs::temp_directory_path() / "bgm_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);

    RunConfig config = synth::synth_config();
    config.train.epochs = 3;
    config.horizon.stride = 4;
    config.out_dir = (dir / "out").string();
    for (const char* name : {"tiny_a", "tiny_b"}) {
      synth::SynthSpec spec;
      spec.name = name;
      spec.seed = name[5];
      spec.n_agents = 8;
      spec.n_frames = 70;
      Scene scene = synth::make_arc_scene(spec);
      const std::string path = (dir / (std::string(name) + ".txt")).string();
      write_annotations(scene, path);
      config.dataset.paths[name] = path;
    }
    config_path = (dir / "config.json").string();
    std::ofstream out(config_path);
    out << config.to_json().dump(2) << "\n";
  }
  ~Corpus() { fs::remove_all(dir); }

  std::string out(const std::string& rel) const { return (dir / "out" / rel).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("usage and config problems exit with code 2") {
  CHECK(run_cli({"no-such-command"}) == 2);
  CHECK(run_cli({"predict", "--scene", "x"}) == 2);  // missing required flag

  const auto dir = fs::temp_directory_path() / "bgm_cli_cfg";
  fs::create_directories(dir);
  const auto bad = dir / "bad.json";
  {
    std::ofstream out(bad);
    out << "{\"not_a_key\": 1}\n";
  }
  CHECK(run_cli({"train", "--config", bad.string().c_str()}) == 2);

  const auto missing_data = dir / "missing.json";
  {
    std::ofstream out(missing_data);
    out << "{\"dataset\": {\"paths\": {\"ghost\": \"/nonexistent/ghost.txt\"}}}\n";
  }
  CHECK(run_cli({"train", "--config", missing_data.string().c_str()}) == 2);
  fs::remove_all(dir);
}

TEST_CASE("train, predict, eval, render and verify cooperate on a tiny corpus") {
  Corpus corpus;

  // --- train (hold out tiny_a), deterministic across reruns
  REQUIRE(run_cli({"train", "--config", corpus.config_path.c_str(), "--scene", "tiny_a",
                   "--quiet"}) == 0);
  const std::string ckpt = corpus.out("ckpt_tiny_a.bgm");
  REQUIRE(fs::exists(ckpt));
  const std::string first_bytes = slurp(ckpt);
  CHECK(fs::exists(corpus.out("loss_tiny_a.csv")));
  CHECK(fs::exists(corpus.out("samples_tiny_b.jsonl")));

  REQUIRE(run_cli({"train", "--config", corpus.config_path.c_str(), "--scene", "tiny_a",
                   "--quiet"}) == 0);
  CHECK(slurp(ckpt) == first_bytes);

  // --- unknown scene name
  CHECK(run_cli({"train", "--config", corpus.config_path.c_str(), "--scene", "nope",
                 "--quiet"}) == 2);

  // --- predict with and without the social stage
  REQUIRE(run_cli({"predict", "--config", corpus.config_path.c_str(), "--scene", "tiny_a",
                   "--checkpoint", ckpt.c_str()}) == 0);
  const std::string full_jsonl = slurp(corpus.out("predictions_tiny_a.jsonl"));
  REQUIRE(run_cli({"predict", "--config", corpus.config_path.c_str(), "--scene", "tiny_a",
                   "--checkpoint", ckpt.c_str(), "--no-social", "--render", "--render-limit",
                   "2"}) == 0);
  const std::string nosocial_jsonl = slurp(corpus.out("predictions_tiny_a.jsonl"));

  auto parse_rows = [](const std::string& text) {
    std::vector<nlohmann::json> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) rows.push_back(nlohmann::json::parse(line));
    return rows;
  };
  auto full_rows = parse_rows(full_jsonl);
  auto ns_rows = parse_rows(nosocial_jsonl);
  REQUIRE(full_rows.size() == ns_rows.size());
  REQUIRE(full_rows.size() > 1);
  CHECK(full_rows[0]["samples"] == full_rows.size() - 1);
  for (size_t i = 1; i < ns_rows.size(); ++i) {
    CHECK(ns_rows[i]["refined"] == ns_rows[i]["preliminary"]);  // social skipped
    CHECK(ns_rows[i]["preliminary"] == full_rows[i]["preliminary"]);
  }
  CHECK(fs::exists(corpus.out("renders")));

  // --- dimension mismatch between checkpoint and config is a runtime error
  const auto small_cfg = corpus.dir / "small.json";
  {
    RunConfig c = RunConfig::load(corpus.config_path);
    c.grid.local_side_m = 4.0;  // 16-cell local map, different conv stack
    std::ofstream out(small_cfg);
    out << c.to_json().dump() << "\n";
  }
  CHECK(run_cli({"predict", "--config", small_cfg.string().c_str(), "--scene", "tiny_a",
                 "--checkpoint", ckpt.c_str()}) == 1);

  // --- eval needs the other checkpoint; train it on demand
  CHECK(run_cli({"eval", "--config", corpus.config_path.c_str()}) == 2);  // missing ckpt_tiny_b
  REQUIRE(run_cli({"eval", "--config", corpus.config_path.c_str(), "--train-missing"}) == 0);
  REQUIRE(fs::exists(corpus.out("report_bgm.json")));
  REQUIRE(fs::exists(corpus.out("report_linear.json")));
  auto report = nlohmann::json::parse(slurp(corpus.out("report_bgm.json")));
  CHECK(report["per_scene"].size() == 2);
  CHECK(report["total_samples"].get<int>() > 0);

  // --- render guidance maps
  REQUIRE(run_cli({"render", "--config", corpus.config_path.c_str(), "--scene", "tiny_b",
                   "--limit", "2"}) == 0);
  CHECK(fs::exists(corpus.out("map_tiny_b_total.png")));

  // --- verify: all artifacts carry the same fingerprint
  CHECK(run_cli({"verify", "--config", corpus.config_path.c_str(), ckpt.c_str(),
                 corpus.out("report_bgm.json").c_str(), corpus.out("loss_tiny_a.csv").c_str(),
                 corpus.out("predictions_tiny_a.jsonl").c_str(),
                 corpus.out("map_tiny_b_total.png").c_str()}) == 0);

  // a config with a different seed must be flagged
  const auto other_cfg = corpus.dir / "other.json";
  {
    RunConfig c = RunConfig::load(corpus.config_path);
    c.train.seed = 777;
    std::ofstream out(other_cfg);
    out << c.to_json().dump() << "\n";
  }
  CHECK(run_cli({"verify", "--config", other_cfg.string().c_str(), ckpt.c_str()}) == 1);
}

}  // TEST_SUITE
