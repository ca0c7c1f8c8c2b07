#include "bgm/record_window.hpp"

#include <map>
#include <stdexcept>

namespace bgm {

std::vector<SavedWindow> scan_record_windows(const std::vector<FrameDetections>& stream,
                                             const WindowConfig& config) {
  if (config.t_max < 1) throw std::invalid_argument("record window: t_max must be >= 1");
  if (config.n_min < 0 || config.n_min > config.n_max)
    throw std::invalid_argument("record window: need 0 <= n_min <= n_max");

  std::vector<SavedWindow> saved;
  RecordWindow acc;
  for (const auto& det : stream) {
    acc.frames.push_back(det.frame);
    acc.positions.insert(acc.positions.end(), det.points.begin(), det.points.end());

    const auto count = static_cast<int>(acc.positions.size());
    const auto span = static_cast<int>(acc.frames.size());
    if (count >= config.n_max || (span >= config.t_max && count >= config.n_min)) {
      saved.push_back({det.frame, std::move(acc)});
      acc = RecordWindow{};
    } else if (span >= config.t_max) {
      acc = RecordWindow{};  // too sparse; drop, keep the last saved window
    }
  }
  return saved;
}

std::optional<RecordWindow> select_record_window(
    const std::vector<std::vector<TrajPoint>>& detections, const WindowConfig& config, int t_p) {
  if (t_p > static_cast<int>(detections.size()))
    throw std::invalid_argument("select_record_window: t_p exceeds provided frames");
  std::vector<FrameDetections> stream;
  stream.reserve(t_p);
  for (int f = 1; f <= t_p; ++f) stream.push_back({f, detections[f - 1]});
  auto saved = scan_record_windows(stream, config);
  if (saved.empty()) return std::nullopt;
  return saved.back().window;
}

std::vector<SavedWindow> windows_for_dataset(const Scene& scene, const WindowConfig& config) {
  if (scene.tracks.empty()) throw std::invalid_argument("windows_for_dataset: empty scene");

  std::map<int64_t, std::vector<TrajPoint>> by_frame;
  for (const auto& frame : scene.distinct_frames()) by_frame[frame] = {};
  for (const auto& track : scene.tracks)
    for (const auto& [frame, p] : track.frames) by_frame[frame].push_back(p);

  std::vector<FrameDetections> stream;
  stream.reserve(by_frame.size());
  for (auto& [frame, points] : by_frame) stream.push_back({frame, std::move(points)});
  return scan_record_windows(stream, config);
}

const SavedWindow* window_for_prediction(const std::vector<SavedWindow>& windows,
                                         int64_t t1_frame) {
  const SavedWindow* best = nullptr;
  for (const auto& w : windows) {
    if (w.saved_at < t1_frame) best = &w;
  }
  return best;
}

}  // namespace bgm
