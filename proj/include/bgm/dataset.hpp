#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bgm/geometry.hpp"

namespace bgm {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One agent's annotated positions, ordered by frame id.
struct AgentTrack {
  int64_t agent_id = 0;
  std::vector<std::pair<int64_t, TrajPoint>> frames;  // strictly increasing frame ids
};

struct Scene {
  std::string name;
  double frame_interval_s = 0.4;
  std::vector<AgentTrack> tracks;  // first-appearance order
  Bounds bounds;

  /// Smallest positive gap between consecutive annotated frame ids in the
  /// scene; annotations at this stride count as consecutive time steps.
  int64_t frame_step() const;
  std::vector<int64_t> distinct_frames() const;  // sorted
};

struct HorizonConfig {
  int t_obs = 8;
  int t_pred = 12;
  int total() const { return t_obs + t_pred; }
};

/// One prediction instance: a full observation/ground-truth window cut from a
/// track, with the agents co-present anywhere in that window.
struct TrajectorySample {
  int64_t agent_id = 0;
  int64_t t0 = 0;        // frame id of the first observed position
  int64_t t1_frame = 0;  // frame id of the first predicted position
  std::vector<TrajPoint> observed;
  std::vector<TrajPoint> ground_truth;
  std::vector<int64_t> neighbor_ids;
};

/// Samples of a single scene, kept together for split bookkeeping.
struct SampleSet {
  std::string scene;
  std::vector<TrajectorySample> samples;
};

enum class AnnotationFormat { frame_rows };

/// Parses whitespace- or comma-delimited rows `frame_id agent_id x y` (world
/// meters). Blank lines and lines starting with '#' are skipped. Throws
/// ParseError with the line number on malformed rows and on duplicate
/// (frame, agent) pairs.
Scene parse_annotations(const std::string& path,
                        AnnotationFormat format = AnnotationFormat::frame_rows);
Scene parse_annotation_text(const std::string& text, const std::string& name);

/// Writes a scene back out in the canonical row format, grouped by track.
void write_annotations(const Scene& scene, const std::string& path);
std::string annotation_text(const Scene& scene);

bool same_scene(const Scene& a, const Scene& b);

/// Cuts one sample per agent per window start with t_obs + t_pred consecutive
/// annotated frames. Gaps are skipped, never interpolated.
std::vector<TrajectorySample> build_samples(const Scene& scene, const HorizonConfig& horizon,
                                            int stride = 1);

/// Leave-one-out split by scene name. Throws on an unknown name.
std::pair<std::vector<SampleSet>, std::vector<SampleSet>> split_leave_one_out(
    const std::vector<SampleSet>& all, const std::string& held_out);

/// JSON-lines sample manifest (one record per sample, meta record first).
void write_sample_manifest(const std::string& path, const SampleSet& set,
                           uint64_t config_fingerprint);

}  // namespace bgm
