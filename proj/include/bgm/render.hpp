#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bgm/guidance_map.hpp"

namespace bgm::social {
struct EnergyField;
}

namespace bgm {

struct RenderOptions {
  int pixels_per_cell = 4;
  std::optional<uint64_t> config_fingerprint;  // embedded as a tEXt chunk
};

/// 8-bit PNG writer (no interlace, filter 0). Output bytes are a pure
/// function of the input.
void write_png_gray(const std::string& path, int height, int width,
                    const std::vector<uint8_t>& pixels,
                    const std::vector<std::pair<std::string, std::string>>& text = {});
void write_png_rgb(const std::string& path, int height, int width,
                   const std::vector<uint8_t>& rgb,
                   const std::vector<std::pair<std::string, std::string>>& text = {});

/// Max-normalized grayscale rendering, one pixel block per cell.
void render_map(const GuidanceMap& map, const std::string& path, const RenderOptions& = {});
void render_map(const LocalMap& local, const std::string& path, const RenderOptions& = {});
/// Diverging heat rendering (blue low, yellow high).
void render_map(const social::EnergyField& field, const std::string& path,
                const RenderOptions& = {});

/// Guidance-map backdrop with observed / ground-truth / predicted paths
/// drawn in distinct colors.
struct TrajectoryLayer {
  std::vector<TrajPoint> points;
  uint8_t r = 255, g = 255, b = 255;
};
void render_trajectories(const GuidanceMap& backdrop, const std::vector<TrajectoryLayer>& layers,
                         const std::string& path, const RenderOptions& = {});

/// Values of all tEXt chunks keyed `bgm-config` (for artifact verification).
std::vector<std::string> read_png_config_text(const std::string& path);

}  // namespace bgm
