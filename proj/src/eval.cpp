#include "bgm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bgm {

double ade(const std::vector<TrajPoint>& prediction, const std::vector<TrajPoint>& truth) {
  if (prediction.size() != truth.size())
    throw std::invalid_argument("ade: length mismatch (" + std::to_string(prediction.size()) +
                                " vs " + std::to_string(truth.size()) + ")");
  if (prediction.empty()) throw std::invalid_argument("ade: empty trajectories");
  double sum = 0.0;
  for (size_t i = 0; i < prediction.size(); ++i) sum += dist(prediction[i], truth[i]);
  return sum / static_cast<double>(prediction.size());
}

double fde(const std::vector<TrajPoint>& prediction, const std::vector<TrajPoint>& truth) {
  if (prediction.empty() || truth.empty()) throw std::invalid_argument("fde: empty trajectories");
  if (prediction.size() != truth.size())
    throw std::invalid_argument("fde: length mismatch (" + std::to_string(prediction.size()) +
                                " vs " + std::to_string(truth.size()) + ")");
  return dist(prediction.back(), truth.back());
}

std::vector<TrajPoint> linear_baseline(const TrajectorySample& sample, int t_pred) {
  const auto& obs = sample.observed;
  const int n = static_cast<int>(obs.size());
  if (n < 2) throw std::invalid_argument("linear_baseline: need at least 2 observed points");

  const double t_mean = (n - 1) / 2.0;
  double sxx = 0.0;
  for (int t = 0; t < n; ++t) sxx += (t - t_mean) * (t - t_mean);
  double bx = 0.0, by = 0.0, mx = 0.0, my = 0.0;
  for (int t = 0; t < n; ++t) {
    mx += obs[t].x;
    my += obs[t].y;
  }
  mx /= n;
  my /= n;
  for (int t = 0; t < n; ++t) {
    bx += (t - t_mean) * (obs[t].x - mx);
    by += (t - t_mean) * (obs[t].y - my);
  }
  bx /= sxx;
  by /= sxx;

  std::vector<TrajPoint> pred;
  pred.reserve(t_pred);
  for (int t = n; t < n + t_pred; ++t)
    pred.push_back({mx + bx * (t - t_mean), my + by * (t - t_mean)});
  return pred;
}

MetricReport aggregate(const std::vector<SceneMetrics>& per_scene, const std::string& variant,
                       uint64_t fingerprint) {
  MetricReport r;
  r.per_scene = per_scene;
  r.variant = variant;
  r.config_fingerprint = fingerprint;
  double wa = 0.0, wf = 0.0;
  for (const auto& s : per_scene) {
    r.avg_ade += s.ade;
    r.avg_fde += s.fde;
    wa += s.ade * static_cast<double>(s.samples);
    wf += s.fde * static_cast<double>(s.samples);
    r.total_samples += s.samples;
  }
  if (!per_scene.empty()) {
    r.avg_ade /= static_cast<double>(per_scene.size());
    r.avg_fde /= static_cast<double>(per_scene.size());
  }
  if (r.total_samples > 0) {
    r.weighted_ade = wa / static_cast<double>(r.total_samples);
    r.weighted_fde = wf / static_cast<double>(r.total_samples);
  }
  return r;
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  j["variant"] = variant;
  j["config_fingerprint"] = hex64(config_fingerprint);
  j["per_scene"] = nlohmann::json::array();
  for (const auto& s : per_scene)
    j["per_scene"].push_back(
        {{"scene", s.scene}, {"ade", s.ade}, {"fde", s.fde}, {"samples", s.samples}});
  j["average"] = {{"ade", avg_ade}, {"fde", avg_fde}};
  j["weighted"] = {{"ade", weighted_ade}, {"fde", weighted_fde}};
  j["total_samples"] = total_samples;
  return j;
}

std::string MetricReport::table() const {
  std::ostringstream os;
  char line[160];
  os << "variant: " << variant << "\n";
  std::snprintf(line, sizeof(line), "%-10s %10s %10s %10s\n", "scene", "ADE", "FDE", "samples");
  os << line;
  for (const auto& s : per_scene) {
    std::snprintf(line, sizeof(line), "%-10s %10.3f %10.3f %10lld\n", s.scene.c_str(), s.ade,
                  s.fde, static_cast<long long>(s.samples));
    os << line;
  }
  std::snprintf(line, sizeof(line), "%-10s %10.3f %10.3f %10lld\n", "average", avg_ade, avg_fde,
                static_cast<long long>(total_samples));
  os << line;
  std::snprintf(line, sizeof(line), "%-10s %10.3f %10.3f\n", "weighted", weighted_ade,
                weighted_fde);
  os << line;
  return os.str();
}

SceneMetrics score_scene(const ScenePredictions& preds, std::vector<PerSampleError>* dump) {
  SceneMetrics m;
  m.scene = preds.scene;
  m.samples = static_cast<int64_t>(preds.records.size());
  if (preds.records.empty()) return m;
  double sa = 0.0, sf = 0.0;
  for (const auto& rec : preds.records) {
    const double a = ade(rec.refined, rec.ground_truth);
    const double f = fde(rec.refined, rec.ground_truth);
    sa += a;
    sf += f;
    if (dump) dump->push_back({preds.scene, rec.agent_id, rec.t0, a, f});
  }
  m.ade = sa / static_cast<double>(preds.records.size());
  m.fde = sf / static_cast<double>(preds.records.size());
  return m;
}

void write_error_csv(const std::string& path, const std::vector<PerSampleError>& errors,
                     uint64_t fingerprint) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write error csv: " + path);
  out << "# config_fingerprint=" << hex64(fingerprint) << "\n";
  out << "scene,agent_id,t0,ade,fde\n";
  char line[200];
  for (const auto& e : errors) {
    std::snprintf(line, sizeof(line), "%s,%lld,%lld,%.17g,%.17g\n", e.scene.c_str(),
                  static_cast<long long>(e.agent_id), static_cast<long long>(e.t0), e.ade, e.fde);
    out << line;
  }
}

BenchmarkResult run_benchmark(const BenchmarkInput& input, const RunConfig& config) {
  const auto& scenes = *input.scenes;
  const auto& sets = *input.sample_sets;
  BenchmarkResult result;
  std::vector<SceneMetrics> per_scene;
  for (size_t i = 0; i < scenes.size(); ++i) {
    Model model = input.params_for(scenes[i].name);
    ScenePredictions preds =
        predict_scene(scenes[i], sets[i].samples, model, config, input.options);
    per_scene.push_back(score_scene(preds, &result.errors));
    result.predictions.push_back(std::move(preds));
  }
  std::string variant = "bgm";
  if (!input.options.use_social) variant += "_no_social";
  if (!input.options.use_context) variant += "_no_context";
  result.report = aggregate(per_scene, variant, config.fingerprint());
  return result;
}

BenchmarkResult run_linear_baseline(const std::vector<Scene>& scenes,
                                    const std::vector<SampleSet>& sets,
                                    const RunConfig& config) {
  BenchmarkResult result;
  std::vector<SceneMetrics> per_scene;
  for (size_t i = 0; i < scenes.size(); ++i) {
    ScenePredictions preds;
    preds.scene = scenes[i].name;
    for (const auto& s : sets[i].samples) {
      PredictionRecord rec;
      rec.agent_id = s.agent_id;
      rec.t0 = s.t0;
      rec.t1_frame = s.t1_frame;
      rec.observed = s.observed;
      rec.ground_truth = s.ground_truth;
      rec.preliminary = linear_baseline(s, config.horizon.t_pred);
      rec.refined = rec.preliminary;
      preds.records.push_back(std::move(rec));
    }
    per_scene.push_back(score_scene(preds, &result.errors));
    result.predictions.push_back(std::move(preds));
  }
  result.report = aggregate(per_scene, "linear", config.fingerprint());
  return result;
}

DynamicMapResult dynamic_map_experiment(const Scene& scene,
                                        const std::vector<TrajectorySample>& samples,
                                        const Model& model, const RunConfig& config,
                                        const PipelineOptions& options) {
  const auto windows = windows_for_dataset(scene, config.record_window);
  if (windows.size() < 3)
    throw std::runtime_error("dynamic_map_experiment: scene '" + scene.name + "' yields only " +
                             std::to_string(windows.size()) +
                             " record windows; need at least 3 (tune record_window.*)");

  // Contiguous thirds of the saved windows define the three record periods.
  const size_t n = windows.size();
  std::array<std::pair<size_t, size_t>, 3> groups{};  // [begin, end)
  groups[0] = {0, n / 3};
  groups[1] = {n / 3, 2 * n / 3};
  groups[2] = {2 * n / 3, n};

  DynamicMapResult result;
  const GridSpec spec = guidance_grid_spec(scene, config);
  std::array<GuidanceMap, 3> maps;
  for (int g = 0; g < 3; ++g) {
    std::vector<TrajPoint> positions;
    for (size_t w = groups[g].first; w < groups[g].second; ++w)
      positions.insert(positions.end(), windows[w].window.positions.begin(),
                       windows[w].window.positions.end());
    maps[g] = rasterize_positions(positions, spec);
    result.period_frames[g] = {windows[groups[g].first].window.frames.front(),
                               windows[groups[g].second - 1].window.frames.back()};
  }

  std::array<std::vector<TrajectorySample>, 3> test_sets;
  for (const auto& s : samples)
    for (int g = 0; g < 3; ++g)
      if (s.t1_frame >= result.period_frames[g].first &&
          s.t1_frame <= result.period_frames[g].second) {
        test_sets[g].push_back(s);
        break;
      }
  for (int g = 0; g < 3; ++g) {
    result.set_sizes[g] = static_cast<int64_t>(test_sets[g].size());
    if (test_sets[g].empty())
      throw std::runtime_error("dynamic_map_experiment: period " + std::to_string(g) +
                               " has no test samples");
  }

  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) {
      auto locals = local_maps_from_map(maps[y], test_sets[x], config);
      ScenePredictions preds =
          predict_scene_with_maps(scene, test_sets[x], locals, model, config, options);
      SceneMetrics m = score_scene(preds);
      result.ade[x][y] = m.ade;
      result.fde[x][y] = m.fde;
    }

  for (int d = 0; d < 3; ++d) {
    result.diag_min_row[d] =
        result.ade[d][d] <= result.ade[d][0] && result.ade[d][d] <= result.ade[d][1] &&
        result.ade[d][d] <= result.ade[d][2];
    result.diag_min_col[d] =
        result.ade[d][d] <= result.ade[0][d] && result.ade[d][d] <= result.ade[1][d] &&
        result.ade[d][d] <= result.ade[2][d];
  }
  return result;
}

nlohmann::json DynamicMapResult::to_json(uint64_t fingerprint) const {
  nlohmann::json j;
  j["config_fingerprint"] = hex64(fingerprint);
  j["period_frames"] = nlohmann::json::array();
  for (const auto& [a, b] : period_frames) j["period_frames"].push_back({a, b});
  j["set_sizes"] = set_sizes;
  j["ade"] = ade;
  j["fde"] = fde;
  j["diag_min_row"] = diag_min_row;
  j["diag_min_col"] = diag_min_col;
  return j;
}

std::string DynamicMapResult::table() const {
  std::ostringstream os;
  char line[200];
  os << "test set vs record-period map (ADE/FDE)\n";
  for (int x = 0; x < 3; ++x) {
    std::snprintf(line, sizeof(line),
                  "X_%c (%lld samples): %.3f/%.3f  %.3f/%.3f  %.3f/%.3f\n",
                  static_cast<char>('a' + x), static_cast<long long>(set_sizes[x]), ade[x][0],
                  fde[x][0], ade[x][1], fde[x][1], ade[x][2], fde[x][2]);
    os << line;
  }
  os << "diagonal minimal per row:";
  for (bool b : diag_min_row) os << ' ' << (b ? "yes" : "no");
  os << "\ndiagonal minimal per column:";
  for (bool b : diag_min_col) os << ' ' << (b ? "yes" : "no");
  os << "\n";
  return os.str();
}

}  // namespace bgm
