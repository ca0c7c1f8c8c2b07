#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bgm/dataset.hpp"
#include "bgm/geometry.hpp"

namespace bgm {

struct WindowConfig {
  int t_max = 150;   // max frames accumulated before the window must resolve
  int n_min = 50;    // minimum positions for a full-length window to be kept
  int n_max = 1000;  // position count that closes a window immediately
};

/// A record period with the positions detected during it.
struct RecordWindow {
  std::vector<int64_t> frames;      // contiguous frame ids
  std::vector<TrajPoint> positions;  // frame order, then per-frame input order
};

struct FrameDetections {
  int64_t frame = 0;
  std::vector<TrajPoint> points;
};

/// A window together with the frame whose ingestion closed it.
struct SavedWindow {
  int64_t saved_at = 0;
  RecordWindow window;
};

/// Streaming window selection. Frames accumulate until either the position
/// count reaches n_max, or the window spans t_max frames; a full-length
/// window is kept only when it holds at least n_min positions, otherwise the
/// accumulator is discarded (a previously saved window is preserved).
std::vector<SavedWindow> scan_record_windows(const std::vector<FrameDetections>& stream,
                                             const WindowConfig& config);

/// Runs the scan over frames 1..t_p of `detections` and returns the last
/// window saved by then, or nothing if no window was ever kept.
std::optional<RecordWindow> select_record_window(
    const std::vector<std::vector<TrajPoint>>& detections, const WindowConfig& config, int t_p);

/// All windows saved while streaming a scene's annotated frames in order.
/// Detections within a frame follow the scene's track order.
std::vector<SavedWindow> windows_for_dataset(const Scene& scene, const WindowConfig& config);

/// Latest window saved strictly before the prediction start, so a sample's
/// map never contains positions from its prediction interval. Null when no
/// window was saved early enough; callers fall back to an empty map.
const SavedWindow* window_for_prediction(const std::vector<SavedWindow>& windows,
                                         int64_t t1_frame);

}  // namespace bgm
