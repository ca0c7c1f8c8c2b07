#include "bgm/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "bgm/checkpoint.hpp"
#include "bgm/eval.hpp"
#include "bgm/pipeline.hpp"
#include "bgm/render.hpp"

namespace bgm::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<uint64_t> seed;
};

RunConfig effective_config(const CommonArgs& args) {
  RunConfig config = args.config_path.empty() ? RunConfig{} : RunConfig::load(args.config_path);
  if (args.seed) config.train.seed = *args.seed;
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  config.validate();
  return config;
}

Scene load_scene(const RunConfig& config, const std::string& name) {
  auto it = config.dataset.paths.find(name);
  if (it == config.dataset.paths.end())
    throw UsageError("scene '" + name + "' is not listed under dataset.paths");
  if (!fs::exists(it->second))
    throw UsageError("dataset file for scene '" + name + "' not found: " + it->second);
  Scene scene = parse_annotations(it->second);
  scene.name = name;
  scene.frame_interval_s = config.dataset.frame_interval_s;
  return scene;
}

std::vector<Scene> load_all_scenes(const RunConfig& config) {
  if (config.dataset.paths.empty())
    throw UsageError("config has no dataset.paths entries");
  std::vector<Scene> scenes;
  for (const auto& [name, path] : config.dataset.paths) scenes.push_back(load_scene(config, name));
  return scenes;
}

struct PreparedScene {
  const Scene* scene = nullptr;
  std::vector<TrajectorySample> samples;
  std::vector<LocalMap> locals;
};

PreparedScene prepare(const Scene& scene, const RunConfig& config) {
  PreparedScene p;
  p.scene = &scene;
  p.samples = build_samples(scene, config.horizon_config(), config.horizon.stride);
  p.locals = local_maps_for_samples(scene, p.samples, config);
  return p;
}

void write_loss_csv(const std::string& path, const TrainResult& result, uint64_t fingerprint) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write loss log: " + path);
  out << "# config_fingerprint=" << hex64(fingerprint) << "\n";
  out << "epoch,loss,train_ade\n";
  char line[96];
  for (size_t e = 0; e < result.epoch_loss.size(); ++e) {
    std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g\n", e + 1, result.epoch_loss[e],
                  result.epoch_ade[e]);
    out << line;
  }
}

std::string checkpoint_name(const std::string& tag) { return "ckpt_" + tag + ".bgm"; }

TrainConfig train_config_from(const RunConfig& config) {
  TrainConfig tc;
  tc.epochs = config.train.epochs;
  tc.lr = config.train.lr;
  tc.final_lr_frac = config.train.final_lr_frac;
  tc.seed = config.train.seed;
  tc.beta1 = config.train.beta1;
  tc.beta2 = config.train.beta2;
  tc.adam_eps = config.train.adam_eps;
  tc.grad_block = config.train.grad_block;
  return tc;
}

Model train_leave_one_out(const std::vector<Scene>& scenes, const std::string& held_out,
                          const RunConfig& config, TrainResult* result_out) {
  std::vector<PreparedScene> prepared;
  for (const auto& scene : scenes)
    if (scene.name != held_out) prepared.push_back(prepare(scene, config));

  std::vector<TrainExample> examples;
  for (const auto& p : prepared)
    for (size_t i = 0; i < p.samples.size(); ++i)
      examples.push_back({&p.samples[i], &p.locals[i]});
  if (examples.empty()) throw std::runtime_error("no training samples for held-out " + held_out);

  Model model = Model::init(config.model_config(), config.train.seed);
  TrainResult result = train(model, examples, train_config_from(config));
  if (result_out) *result_out = std::move(result);
  return model;
}

int cmd_train(const CommonArgs& common, const std::string& held_out_name, bool quiet) {
  RunConfig config = effective_config(common);
  const uint64_t fp = config.fingerprint();
  fs::create_directories(config.out_dir);

  std::vector<Scene> scenes = load_all_scenes(config);
  const std::string tag = held_out_name.empty() ? "all" : held_out_name;
  if (!held_out_name.empty()) {
    bool known = false;
    for (const auto& s : scenes) known |= s.name == held_out_name;
    if (!known) throw UsageError("unknown scene name: " + held_out_name);
  }

  std::vector<PreparedScene> prepared;
  for (const auto& scene : scenes)
    if (held_out_name.empty() || scene.name != held_out_name)
      prepared.push_back(prepare(scene, config));

  std::vector<TrainExample> examples;
  for (const auto& p : prepared) {
    SampleSet set{p.scene->name, p.samples};
    write_sample_manifest(config.out_dir + "/samples_" + p.scene->name + ".jsonl", set, fp);
    for (size_t i = 0; i < p.samples.size(); ++i)
      examples.push_back({&p.samples[i], &p.locals[i]});
  }
  if (examples.empty()) throw std::runtime_error("no training samples");
  if (!quiet)
    std::cout << "training on " << examples.size() << " samples (" << prepared.size()
              << " scenes), " << config.train.epochs << " epochs\n";

  Model model = Model::init(config.model_config(), config.train.seed);
  TrainConfig tc = train_config_from(config);
  if (!quiet)
    tc.on_epoch = [](int epoch, double loss, double ade) {
      if (epoch % 50 == 0 || epoch == 1)
        std::cout << "epoch " << epoch << "  loss " << loss << "  train_ade " << ade << "\n";
    };
  TrainResult result = train(model, examples, tc);

  const std::string ckpt = config.out_dir + "/" + checkpoint_name(tag);
  nn::save_checkpoint(ckpt, model.params, fp);
  write_loss_csv(config.out_dir + "/loss_" + tag + ".csv", result, fp);
  if (!quiet) std::cout << "checkpoint written: " << ckpt << "\n";
  return 0;
}

nlohmann::json points_json(const std::vector<TrajPoint>& pts) {
  nlohmann::json arr = nlohmann::json::array();
  for (auto p : pts) arr.push_back({p.x, p.y});
  return arr;
}

int cmd_predict(const CommonArgs& common, const std::string& scene_name,
                const std::string& checkpoint_path, bool no_social, bool no_context, bool render,
                int render_limit) {
  RunConfig config = effective_config(common);
  const uint64_t fp = config.fingerprint();
  fs::create_directories(config.out_dir);
  if (!fs::exists(checkpoint_path)) throw UsageError("checkpoint not found: " + checkpoint_path);

  Scene scene = load_scene(config, scene_name);
  auto samples = build_samples(scene, config.horizon_config(), config.horizon.stride);
  nn::Checkpoint ckpt = nn::load_checkpoint(checkpoint_path);
  Model model = Model::from_checkpoint(config.model_config(), std::move(ckpt.params));

  PipelineOptions options;
  options.use_social = !no_social;
  options.use_context = !no_context;
  ScenePredictions preds = predict_scene(scene, samples, model, config, options);

  const std::string out_path = config.out_dir + "/predictions_" + scene_name + ".jsonl";
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  nlohmann::json meta{{"type", "meta"},
                      {"scene", scene_name},
                      {"config_fingerprint", hex64(fp)},
                      {"social", options.use_social},
                      {"context", options.use_context},
                      {"samples", preds.records.size()}};
  out << meta.dump() << "\n";
  for (const auto& rec : preds.records) {
    nlohmann::json row{{"agent_id", rec.agent_id},
                       {"t0", rec.t0},
                       {"preliminary", points_json(rec.preliminary)},
                       {"refined", points_json(rec.refined)}};
    out << row.dump() << "\n";
  }
  std::cout << "wrote " << preds.records.size() << " predictions to " << out_path << "\n";

  if (render) {
    const std::string render_dir = config.out_dir + "/renders";
    fs::create_directories(render_dir);
    const GridSpec spec = guidance_grid_spec(scene, config);
    const auto windows = windows_for_dataset(scene, config.record_window);
    RenderOptions ropt;
    ropt.pixels_per_cell = 3;
    ropt.config_fingerprint = fp;
    const int limit = std::min<int>(render_limit, static_cast<int>(preds.records.size()));
    for (int i = 0; i < limit; ++i) {
      const auto& rec = preds.records[i];
      const SavedWindow* w = window_for_prediction(windows, rec.t1_frame);
      GuidanceMap backdrop =
          w ? rasterize(w->window, spec) : rasterize_positions({}, spec);
      std::vector<TrajectoryLayer> layers{
          {rec.observed, 80, 160, 255},
          {rec.ground_truth, 80, 255, 80},
          {rec.preliminary, 255, 80, 80},
          {rec.refined, 255, 220, 60},
      };
      char name[160];
      std::snprintf(name, sizeof(name), "%s/sample_%04d_agent%lld_t%lld.png",
                    render_dir.c_str(), i, static_cast<long long>(rec.agent_id),
                    static_cast<long long>(rec.t0));
      render_trajectories(backdrop, layers, name, ropt);
    }
    std::cout << "rendered " << limit << " samples under " << render_dir << "\n";
  }
  return 0;
}

int cmd_eval(const CommonArgs& common, const std::string& checkpoint_dir, bool train_missing,
             bool no_social, bool no_context, bool all_variants, bool dynamic_map,
             const std::string& dynamic_scene) {
  RunConfig config = effective_config(common);
  const uint64_t fp = config.fingerprint();
  fs::create_directories(config.out_dir);

  std::vector<Scene> scenes = load_all_scenes(config);
  std::vector<SampleSet> sets;
  for (const auto& scene : scenes)
    sets.push_back({scene.name,
                    build_samples(scene, config.horizon_config(), config.horizon.stride)});

  auto params_for = [&](const std::string& held_out) -> Model {
    const std::string path = (checkpoint_dir.empty() ? config.out_dir : checkpoint_dir) + "/" +
                             checkpoint_name(held_out);
    if (fs::exists(path)) {
      nn::Checkpoint ckpt = nn::load_checkpoint(path);
      return Model::from_checkpoint(config.model_config(), std::move(ckpt.params));
    }
    if (!train_missing) throw UsageError("missing checkpoint: " + path);
    std::cout << "training model for held-out scene " << held_out << "\n";
    Model model = train_leave_one_out(scenes, held_out, config, nullptr);
    nn::save_checkpoint(path, model.params, fp);
    return model;
  };

  auto emit = [&](const PipelineOptions& options) {
    BenchmarkInput input;
    input.scenes = &scenes;
    input.sample_sets = &sets;
    input.params_for = params_for;
    input.options = options;
    BenchmarkResult result = run_benchmark(input, config);
    const std::string base = config.out_dir + "/report_" + result.report.variant;
    std::ofstream js(base + ".json");
    js << result.report.to_json().dump(2) << "\n";
    std::ofstream txt(base + ".txt");
    txt << result.report.table();
    write_error_csv(base + "_errors.csv", result.errors, fp);
    std::cout << result.report.table() << "\n";
  };

  std::vector<PipelineOptions> variants;
  if (all_variants) {
    variants.push_back({true, true, true, false});
    PipelineOptions ns;
    ns.use_social = false;
    variants.push_back(ns);
    PipelineOptions nc;
    nc.use_context = false;
    variants.push_back(nc);
  } else {
    PipelineOptions opt;
    opt.use_social = !no_social;
    opt.use_context = !no_context;
    variants.push_back(opt);
  }
  for (const auto& v : variants) emit(v);

  {
    BenchmarkResult linear = run_linear_baseline(scenes, sets, config);
    std::ofstream js(config.out_dir + "/report_linear.json");
    js << linear.report.to_json().dump(2) << "\n";
    std::ofstream txt(config.out_dir + "/report_linear.txt");
    txt << linear.report.table();
    std::cout << linear.report.table() << "\n";
  }

  if (dynamic_map) {
    if (dynamic_scene.empty()) throw UsageError("--dynamic-map requires --scene NAME");
    const Scene* target = nullptr;
    const SampleSet* target_set = nullptr;
    for (size_t i = 0; i < scenes.size(); ++i)
      if (scenes[i].name == dynamic_scene) {
        target = &scenes[i];
        target_set = &sets[i];
      }
    if (!target) throw UsageError("unknown scene name: " + dynamic_scene);
    Model model = params_for(dynamic_scene);
    PipelineOptions options;
    DynamicMapResult result =
        dynamic_map_experiment(*target, target_set->samples, model, config, options);
    std::ofstream js(config.out_dir + "/dynamic_map_" + dynamic_scene + ".json");
    js << result.to_json(fp).dump(2) << "\n";
    std::ofstream txt(config.out_dir + "/dynamic_map_" + dynamic_scene + ".txt");
    txt << result.table();
    std::cout << result.table();
  }
  return 0;
}

int cmd_render(const CommonArgs& common, const std::string& scene_name, int limit,
               int pixels_per_cell, bool dump_csv) {
  RunConfig config = effective_config(common);
  const uint64_t fp = config.fingerprint();
  fs::create_directories(config.out_dir);

  Scene scene = load_scene(config, scene_name);
  const GridSpec spec = guidance_grid_spec(scene, config);
  const auto windows = windows_for_dataset(scene, config.record_window);
  RenderOptions opt;
  opt.pixels_per_cell = pixels_per_cell;
  opt.config_fingerprint = fp;

  const int n = std::min<int>(limit, static_cast<int>(windows.size()));
  for (int i = 0; i < n; ++i) {
    GuidanceMap map = rasterize(windows[i].window, spec);
    char name[160];
    std::snprintf(name, sizeof(name), "%s/map_%s_window%02d.png", config.out_dir.c_str(),
                  scene_name.c_str(), i);
    render_map(map, name, opt);
  }

  std::vector<TrajPoint> all;
  for (const auto& t : scene.tracks)
    for (const auto& [f, p] : t.frames) all.push_back(p);
  GuidanceMap total = rasterize_positions(all, spec);
  render_map(total, config.out_dir + "/map_" + scene_name + "_total.png", opt);
  if (dump_csv) write_grid_csv(total, config.out_dir + "/map_" + scene_name + "_total.csv");
  std::cout << "rendered " << n << " window maps and the total map for " << scene_name
            << " (saved windows: " << windows.size() << ")\n";
  return 0;
}

std::optional<std::string> artifact_fingerprint(const std::string& path) {
  const std::string ext = fs::path(path).extension().string();
  if (ext == ".bgm") return hex64(nn::load_checkpoint(path).config_fingerprint);
  if (ext == ".png") {
    auto texts = read_png_config_text(path);
    if (texts.empty()) return std::nullopt;
    return texts.front();
  }
  if (ext == ".json") {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    if (j.contains("config_fingerprint")) return j.at("config_fingerprint").get<std::string>();
    return std::nullopt;
  }
  if (ext == ".jsonl") {
    std::ifstream in(path);
    std::string first;
    if (!std::getline(in, first)) return std::nullopt;
    nlohmann::json j = nlohmann::json::parse(first);
    if (j.contains("config_fingerprint")) return j.at("config_fingerprint").get<std::string>();
    return std::nullopt;
  }
  if (ext == ".csv") {
    std::ifstream in(path);
    std::string first;
    if (!std::getline(in, first)) return std::nullopt;
    const std::string tag = "# config_fingerprint=";
    if (first.rfind(tag, 0) == 0) return first.substr(tag.size());
    return std::nullopt;
  }
  return std::nullopt;
}

int cmd_verify(const std::string& config_path, const std::vector<std::string>& paths) {
  std::optional<std::string> expected;
  if (!config_path.empty()) expected = hex64(RunConfig::load(config_path).fingerprint());

  int failures = 0;
  for (const auto& path : paths) {
    if (!fs::exists(path)) {
      std::cout << path << ": MISSING\n";
      ++failures;
      continue;
    }
    std::optional<std::string> got;
    try {
      got = artifact_fingerprint(path);
    } catch (const std::exception& e) {
      std::cout << path << ": UNREADABLE (" << e.what() << ")\n";
      ++failures;
      continue;
    }
    if (!got) {
      std::cout << path << ": no fingerprint found\n";
      ++failures;
      continue;
    }
    if (!expected) expected = got;
    if (*got == *expected) {
      std::cout << path << ": ok (" << *got << ")\n";
    } else {
      std::cout << path << ": MISMATCH (" << *got << " != " << *expected << ")\n";
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"dynamic guidance-map trajectory prediction pipeline"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string scene_name, checkpoint_path, checkpoint_dir;
  bool no_social = false, no_context = false, render = false, train_missing = false;
  bool all_variants = false, dynamic_map = false, quiet = false, dump_csv = false;
  int render_limit = 16, window_limit = 4, pixels_per_cell = 4;
  std::vector<std::string> verify_paths;
  uint64_t seed_value = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "run config file (JSON)");
    sub->add_option("--out", common.out_dir, "output directory override");
    sub->add_option("--seed", seed_value, "seed override")->each([&](const std::string&) {
      common.seed = seed_value;
    });
  };

  CLI::App* train_cmd = app.add_subcommand("train", "train the predictor");
  add_common(train_cmd);
  train_cmd->add_option("--scene", scene_name, "held-out scene (trains on the others)");
  train_cmd->add_flag("--quiet", quiet, "suppress progress output");

  CLI::App* predict_cmd = app.add_subcommand("predict", "predict a scene with a checkpoint");
  add_common(predict_cmd);
  predict_cmd->add_option("--scene", scene_name, "scene to predict")->required();
  predict_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  predict_cmd->add_flag("--no-social", no_social, "skip social refinement");
  predict_cmd->add_flag("--no-context", no_context, "zero the context feature");
  predict_cmd->add_flag("--render", render, "render per-sample images");
  predict_cmd->add_option("--render-limit", render_limit, "max rendered samples");

  CLI::App* eval_cmd = app.add_subcommand("eval", "leave-one-out benchmark");
  add_common(eval_cmd);
  eval_cmd->add_option("--checkpoint-dir", checkpoint_dir, "directory with ckpt_<scene>.bgm");
  eval_cmd->add_flag("--train-missing", train_missing, "train any missing checkpoint");
  eval_cmd->add_flag("--no-social", no_social, "skip social refinement");
  eval_cmd->add_flag("--no-context", no_context, "zero the context feature");
  eval_cmd->add_flag("--all-variants", all_variants, "emit full, no-social and no-context reports");
  eval_cmd->add_flag("--dynamic-map", dynamic_map, "run the record-period map experiment");
  eval_cmd->add_option("--scene", scene_name, "target scene for --dynamic-map");

  CLI::App* render_cmd = app.add_subcommand("render", "render guidance maps for a scene");
  add_common(render_cmd);
  render_cmd->add_option("--scene", scene_name, "scene to render")->required();
  render_cmd->add_option("--limit", window_limit, "max windows to render");
  render_cmd->add_option("--pixels-per-cell", pixels_per_cell, "pixel block per cell");
  render_cmd->add_flag("--dump-csv", dump_csv, "also dump the total map as CSV");

  CLI::App* verify_cmd = app.add_subcommand("verify", "check artifact config fingerprints");
  verify_cmd->add_option("--config", common.config_path, "expected config");
  verify_cmd->add_option("paths", verify_paths, "artifacts to check")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*train_cmd) return cmd_train(common, scene_name, quiet);
    if (*predict_cmd)
      return cmd_predict(common, scene_name, checkpoint_path, no_social, no_context, render,
                         render_limit);
    if (*eval_cmd)
      return cmd_eval(common, checkpoint_dir, train_missing, no_social, no_context, all_variants,
                      dynamic_map, scene_name);
    if (*render_cmd)
      return cmd_render(common, scene_name, window_limit, pixels_per_cell, dump_csv);
    if (*verify_cmd) return cmd_verify(common.config_path, verify_paths);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace bgm::cli
