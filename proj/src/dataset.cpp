#include "bgm/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace bgm {

int64_t Scene::frame_step() const {
  auto frames = distinct_frames();
  int64_t step = 0;
  for (size_t i = 1; i < frames.size(); ++i) {
    int64_t d = frames[i] - frames[i - 1];
    if (step == 0 || d < step) step = d;
  }
  return step > 0 ? step : 1;
}

std::vector<int64_t> Scene::distinct_frames() const {
  std::set<int64_t> ids;
  for (const auto& t : tracks)
    for (const auto& [f, p] : t.frames) ids.insert(f);
  return {ids.begin(), ids.end()};
}

namespace {

bool parse_number(const std::string& tok, double* out) {
  try {
    size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) return false;
    *out = v;
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

bool integral(double v, int64_t* out) {
  if (v != std::floor(v)) return false;
  *out = static_cast<int64_t>(v);
  return true;
}

std::string stem_of(const std::string& path) {
  size_t slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  size_t dot = base.find_last_of('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

}  // namespace

Scene parse_annotation_text(const std::string& text, const std::string& name) {
  Scene scene;
  scene.name = name;

  std::map<int64_t, size_t> track_index;  // agent id -> tracks slot
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  int64_t records = 0;
  while (std::getline(in, line)) {
    ++line_no;
    for (char& c : line)
      if (c == ',' || c == '\t' || c == '\r') c = ' ';
    std::istringstream row(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (row >> tok) tokens.push_back(tok);
    if (tokens.empty() || tokens[0][0] == '#') continue;
    if (tokens.size() != 4)
      throw ParseError(name + ":" + std::to_string(line_no) + ": expected 4 fields, got " +
                       std::to_string(tokens.size()));
    double vals[4];
    for (int i = 0; i < 4; ++i)
      if (!parse_number(tokens[i], &vals[i]) || !std::isfinite(vals[i]))
        throw ParseError(name + ":" + std::to_string(line_no) + ": bad field '" + tokens[i] + "'");
    int64_t frame = 0, agent = 0;
    if (!integral(vals[0], &frame))
      throw ParseError(name + ":" + std::to_string(line_no) + ": frame id is not an integer");
    if (!integral(vals[1], &agent))
      throw ParseError(name + ":" + std::to_string(line_no) + ": agent id is not an integer");

    auto it = track_index.find(agent);
    if (it == track_index.end()) {
      it = track_index.emplace(agent, scene.tracks.size()).first;
      scene.tracks.push_back({agent, {}});
    }
    TrajPoint p{vals[2], vals[3]};
    scene.tracks[it->second].frames.emplace_back(frame, p);
    scene.bounds.expand(p);
    ++records;
  }
  if (records == 0) throw ParseError(name + ": no records");

  for (auto& track : scene.tracks) {
    std::stable_sort(track.frames.begin(), track.frames.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t i = 1; i < track.frames.size(); ++i)
      if (track.frames[i].first == track.frames[i - 1].first)
        throw ParseError(name + ": duplicate frame " + std::to_string(track.frames[i].first) +
                         " for agent " + std::to_string(track.agent_id));
  }
  return scene;
}

Scene parse_annotations(const std::string& path, AnnotationFormat) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open annotation file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_annotation_text(buf.str(), stem_of(path));
}

std::string annotation_text(const Scene& scene) {
  std::string out;
  char line[128];
  for (const auto& track : scene.tracks)
    for (const auto& [frame, p] : track.frames) {
      std::snprintf(line, sizeof(line), "%lld %lld %.17g %.17g\n",
                    static_cast<long long>(frame), static_cast<long long>(track.agent_id), p.x,
                    p.y);
      out += line;
    }
  return out;
}

void write_annotations(const Scene& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write annotation file: " + path);
  out << annotation_text(scene);
}

bool same_scene(const Scene& a, const Scene& b) {
  if (a.tracks.size() != b.tracks.size()) return false;
  for (size_t i = 0; i < a.tracks.size(); ++i) {
    const auto& ta = a.tracks[i];
    const auto& tb = b.tracks[i];
    if (ta.agent_id != tb.agent_id || ta.frames.size() != tb.frames.size()) return false;
    for (size_t j = 0; j < ta.frames.size(); ++j) {
      if (ta.frames[j].first != tb.frames[j].first) return false;
      if (ta.frames[j].second.x != tb.frames[j].second.x) return false;
      if (ta.frames[j].second.y != tb.frames[j].second.y) return false;
    }
  }
  return true;
}

std::vector<TrajectorySample> build_samples(const Scene& scene, const HorizonConfig& horizon,
                                            int stride) {
  if (horizon.t_obs < 2 || horizon.t_pred < 1)
    throw std::invalid_argument("horizon requires t_obs >= 2 and t_pred >= 1");
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");

  const int total = horizon.total();
  const int64_t step = scene.frame_step();
  std::vector<TrajectorySample> samples;

  for (const auto& track : scene.tracks) {
    const auto& frames = track.frames;
    if (static_cast<int>(frames.size()) < total) continue;
    for (size_t k = 0; k + total <= frames.size(); k += stride) {
      bool consecutive = true;
      for (int j = 0; j + 1 < total; ++j)
        if (frames[k + j + 1].first - frames[k + j].first != step) {
          consecutive = false;
          break;
        }
      if (!consecutive) continue;

      TrajectorySample s;
      s.agent_id = track.agent_id;
      s.t0 = frames[k].first;
      s.t1_frame = frames[k + horizon.t_obs].first;
      s.observed.reserve(horizon.t_obs);
      s.ground_truth.reserve(horizon.t_pred);
      for (int j = 0; j < horizon.t_obs; ++j) s.observed.push_back(frames[k + j].second);
      for (int j = 0; j < horizon.t_pred; ++j)
        s.ground_truth.push_back(frames[k + horizon.t_obs + j].second);

      const int64_t window_end = s.t0 + static_cast<int64_t>(total) * step;  // exclusive
      for (const auto& other : scene.tracks) {
        if (other.agent_id == track.agent_id) continue;
        bool present = std::any_of(other.frames.begin(), other.frames.end(), [&](const auto& fp) {
          return fp.first >= s.t0 && fp.first < window_end;
        });
        if (present) s.neighbor_ids.push_back(other.agent_id);
      }
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

std::pair<std::vector<SampleSet>, std::vector<SampleSet>> split_leave_one_out(
    const std::vector<SampleSet>& all, const std::string& held_out) {
  bool found = false;
  std::vector<SampleSet> train, test;
  for (const auto& set : all) {
    if (set.scene == held_out) {
      found = true;
      test.push_back(set);
    } else {
      train.push_back(set);
    }
  }
  if (!found) throw std::invalid_argument("unknown scene name: " + held_out);
  return {std::move(train), std::move(test)};
}

void write_sample_manifest(const std::string& path, const SampleSet& set,
                           uint64_t config_fingerprint) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sample manifest: " + path);
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(config_fingerprint));
  nlohmann::json meta{{"type", "meta"}, {"scene", set.scene}, {"config_fingerprint", hex},
                      {"samples", set.samples.size()}};
  out << meta.dump() << "\n";
  for (const auto& s : set.samples) {
    nlohmann::json rec;
    rec["agent_id"] = s.agent_id;
    rec["t0"] = s.t0;
    rec["t1_frame"] = s.t1_frame;
    auto points = [](const std::vector<TrajPoint>& pts) {
      nlohmann::json arr = nlohmann::json::array();
      for (auto p : pts) arr.push_back({p.x, p.y});
      return arr;
    };
    rec["observed"] = points(s.observed);
    rec["ground_truth"] = points(s.ground_truth);
    rec["neighbor_ids"] = s.neighbor_ids;
    out << rec.dump() << "\n";
  }
}

}  // namespace bgm
