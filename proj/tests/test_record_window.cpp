#include "doctest.h"

#include <algorithm>

#include "bgm/layers.hpp"
#include "bgm/record_window.hpp"

using namespace bgm;

TEST_SUITE("record_window") {

namespace {

std::vector<std::vector<TrajPoint>> frames_with_counts(const std::vector<int>& counts) {
  std::vector<std::vector<TrajPoint>> frames;
  int serial = 0;
  for (int c : counts) {
    std::vector<TrajPoint> pts;
    for (int i = 0; i < c; ++i) pts.push_back({static_cast<double>(++serial), 0.0});
    frames.push_back(std::move(pts));
  }
  return frames;
}

}  // namespace

TEST_CASE("count threshold closes the window with all positions") {
  // 3 frames x 2 detections; hand trace: counts 2, 4, 6 -> save at frame 3.
  auto detections = frames_with_counts({2, 2, 2});
  WindowConfig cfg{10, 1, 6};
  auto window = select_record_window(detections, cfg, 3);
  REQUIRE(window.has_value());
  CHECK(window->frames == std::vector<int64_t>{1, 2, 3});
  REQUIRE(window->positions.size() == 6);
  CHECK(window->positions.front().x == 1.0);
  CHECK(window->positions.back().x == 6.0);
}

TEST_CASE("all-empty frames never save") {
  auto detections = frames_with_counts({0, 0, 0, 0, 0, 0});
  WindowConfig cfg{2, 1, 10};
  CHECK_FALSE(select_record_window(detections, cfg, 6).has_value());
}

TEST_CASE("a sparse window discards without clobbering the saved one") {
  // frame 1 has one detection (saves immediately at n_max=1); frames 2..5
  // are empty and hit the discard branch only.
  auto detections = frames_with_counts({1, 0, 0, 0, 0});
  WindowConfig cfg{2, 1, 1};
  auto window = select_record_window(detections, cfg, 5);
  REQUIRE(window.has_value());
  CHECK(window->frames == std::vector<int64_t>{1});
  REQUIRE(window->positions.size() == 1);
  CHECK(window->positions[0].x == 1.0);
}

TEST_CASE("t_p beyond the stream is rejected") {
  auto detections = frames_with_counts({1, 1});
  CHECK_THROWS_AS(select_record_window(detections, WindowConfig{}, 3), std::invalid_argument);
}

namespace {

Scene one_point_per_frame_scene(int n_frames) {
  Scene scene;
  scene.name = "stream";
  AgentTrack track;
  track.agent_id = 1;
  for (int f = 1; f <= n_frames; ++f) {
    TrajPoint p{static_cast<double>(f), 1.0};
    track.frames.emplace_back(f, p);
    scene.bounds.expand(p);
  }
  scene.tracks.push_back(track);
  return scene;
}

}  // namespace

TEST_CASE("dataset scan enumerates saves in order (hand traced)") {
  // 40 frames, 1 detection each; t_max=10, n_min=5, n_max=50: every 10th
  // frame closes a full-length window with 10 positions.
  Scene scene = one_point_per_frame_scene(40);
  WindowConfig cfg{10, 5, 50};
  auto windows = windows_for_dataset(scene, cfg);
  REQUIRE(windows.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(windows[i].saved_at == 10 * (i + 1));
    CHECK(windows[i].window.frames.size() == 10);
    CHECK(windows[i].window.frames.front() == 10 * i + 1);
    CHECK(windows[i].window.positions.size() == 10);
  }
}

TEST_CASE("saved windows are disjoint, ordered, and within count bounds") {
  nn::Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<int> counts;
    int max_batch = 0;
    for (int f = 0; f < 60; ++f) {
      int c = static_cast<int>(rng.uniform(0, 5));
      max_batch = std::max(max_batch, c);
      counts.push_back(c);
    }
    WindowConfig cfg{1 + static_cast<int>(rng.uniform(0, 8)),
                     static_cast<int>(rng.uniform(0, 4)),
                     1 + static_cast<int>(rng.uniform(0, 12))};
    cfg.n_min = std::min(cfg.n_min, cfg.n_max);

    std::vector<FrameDetections> stream;
    auto frames = frames_with_counts(counts);
    for (size_t f = 0; f < frames.size(); ++f)
      stream.push_back({static_cast<int64_t>(f + 1), frames[f]});
    auto saved = scan_record_windows(stream, cfg);

    int64_t last_frame = 0;
    for (const auto& w : saved) {
      CHECK(static_cast<int>(w.window.positions.size()) >= cfg.n_min);
      CHECK(static_cast<int>(w.window.positions.size()) <= cfg.n_max + max_batch);
      REQUIRE(!w.window.frames.empty());
      CHECK(w.window.frames.front() > last_frame);  // disjoint and ordered
      for (size_t i = 1; i < w.window.frames.size(); ++i)
        CHECK(w.window.frames[i] == w.window.frames[i - 1] + 1);
      CHECK(w.saved_at == w.window.frames.back());
      last_frame = w.window.frames.back();
    }
  }
}

TEST_CASE("within-frame detection order does not change selection") {
  Scene scene;
  scene.name = "two";
  for (int id = 1; id <= 2; ++id) {
    AgentTrack track;
    track.agent_id = id;
    for (int f = 1; f <= 12; ++f)
      track.frames.emplace_back(f, TrajPoint{static_cast<double>(f), static_cast<double>(id)});
    scene.tracks.push_back(track);
  }
  Scene swapped = scene;
  std::swap(swapped.tracks[0], swapped.tracks[1]);

  WindowConfig cfg{6, 1, 100};
  auto a = windows_for_dataset(scene, cfg);
  auto b = windows_for_dataset(swapped, cfg);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].saved_at == b[i].saved_at);
    CHECK(a[i].window.frames == b[i].window.frames);
    // positions follow frame order, then track order within a frame
    auto sorted_x = [](const RecordWindow& w) {
      std::vector<double> xs;
      for (auto p : w.positions) xs.push_back(p.x);
      std::sort(xs.begin(), xs.end());
      return xs;
    };
    CHECK(sorted_x(a[i].window) == sorted_x(b[i].window));
  }
}

TEST_CASE("prediction lookup picks the latest window saved before t1") {
  std::vector<SavedWindow> windows;
  SavedWindow w1;
  w1.saved_at = 10;
  w1.window.frames = {1, 10};
  SavedWindow w2;
  w2.saved_at = 20;
  w2.window.frames = {11, 20};
  windows.push_back(w1);
  windows.push_back(w2);

  // A window whose record period overlaps the prediction interval is not
  // usable; at t1=15 only the first window exists without future frames.
  CHECK(window_for_prediction(windows, 15)->saved_at == 10);
  CHECK(window_for_prediction(windows, 21)->saved_at == 20);
  CHECK(window_for_prediction(windows, 11)->saved_at == 10);
  CHECK(window_for_prediction(windows, 10) == nullptr);
  CHECK(window_for_prediction(windows, 5) == nullptr);
}

TEST_CASE("no saved window before the first save point") {
  Scene scene = one_point_per_frame_scene(25);
  auto windows = windows_for_dataset(scene, WindowConfig{10, 5, 50});
  CHECK(window_for_prediction(windows, 9) == nullptr);
  REQUIRE(window_for_prediction(windows, 11) != nullptr);
  // no future leakage: every frame of the chosen window precedes t1
  for (int64_t t1 : {11, 15, 20, 25}) {
    const SavedWindow* w = window_for_prediction(windows, t1);
    if (!w) continue;
    for (int64_t f : w->window.frames) CHECK(f < t1);
  }
}

}  // TEST_SUITE
