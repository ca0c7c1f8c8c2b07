#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bgm/geometry.hpp"
#include "bgm/record_window.hpp"

namespace bgm {

/// World-to-grid mapping. Rows index x, columns index y.
struct GridSpec {
  TrajPoint origin;          // world coords of the corner of cell (0, 0)
  double resolution = 0.25;  // meters per cell
  int rows = 0;
  int cols = 0;
};

struct GridCell {
  int row = 0;
  int col = 0;
  bool in_bounds = false;
};

GridCell world_to_grid(TrajPoint p, const GridSpec& spec);
TrajPoint cell_center(const GridSpec& spec, int row, int col);

/// Grid spec covering `bounds` padded by pad_m on every side.
GridSpec scene_grid_spec(const Bounds& bounds, double resolution, double pad_m);

/// Scene-wide occupancy counts of recorded positions.
struct GuidanceMap {
  GridSpec spec;
  std::vector<int32_t> counts;  // rows * cols, row-major
  int64_t dropped = 0;          // positions outside the grid

  int32_t at(int row, int col) const { return counts[static_cast<size_t>(row) * spec.cols + col]; }
  int64_t total() const;
};

GuidanceMap rasterize(const RecordWindow& window, const GridSpec& spec);
GuidanceMap rasterize_serial(const RecordWindow& window, const GridSpec& spec);
GuidanceMap rasterize_positions(const std::vector<TrajPoint>& positions, const GridSpec& spec);

/// Square agent-centered crop of the guidance map, zero-padded at the scene
/// edge. Side = round(2l / resolution) cells.
struct LocalMap {
  int64_t agent_id = 0;
  int side = 0;
  std::vector<int32_t> patch;  // side * side, row-major
  GridCell center_cell;        // agent's last observed cell in map coords

  int32_t at(int row, int col) const { return patch[static_cast<size_t>(row) * side + col]; }
};

LocalMap extract_local(const GuidanceMap& map, int64_t agent_id, TrajPoint agent_last_pos,
                       double half_side_m);

/// All-zero patch for samples with no usable record window.
LocalMap zero_local(int64_t agent_id, int side);

/// Raw count-grid dump, one CSV row per grid row (debugging aid).
void write_grid_csv(const GuidanceMap& map, const std::string& path);

int local_side_cells(double local_side_m, double resolution);

}  // namespace bgm
