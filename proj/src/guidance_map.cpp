#include "bgm/guidance_map.hpp"

#include <omp.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace bgm {

GridCell world_to_grid(TrajPoint p, const GridSpec& spec) {
  GridCell cell;
  cell.row = static_cast<int>(std::floor((p.x - spec.origin.x) / spec.resolution));
  cell.col = static_cast<int>(std::floor((p.y - spec.origin.y) / spec.resolution));
  cell.in_bounds = cell.row >= 0 && cell.row < spec.rows && cell.col >= 0 && cell.col < spec.cols;
  return cell;
}

TrajPoint cell_center(const GridSpec& spec, int row, int col) {
  return {spec.origin.x + (row + 0.5) * spec.resolution,
          spec.origin.y + (col + 0.5) * spec.resolution};
}

GridSpec scene_grid_spec(const Bounds& bounds, double resolution, double pad_m) {
  if (resolution <= 0) throw std::invalid_argument("grid resolution must be positive");
  GridSpec spec;
  spec.resolution = resolution;
  spec.origin = {bounds.min.x - pad_m, bounds.min.y - pad_m};
  spec.rows = std::max(1, static_cast<int>(std::ceil((bounds.max.x + pad_m - spec.origin.x) /
                                                     resolution)) + 1);
  spec.cols = std::max(1, static_cast<int>(std::ceil((bounds.max.y + pad_m - spec.origin.y) /
                                                     resolution)) + 1);
  return spec;
}

int64_t GuidanceMap::total() const {
  return std::accumulate(counts.begin(), counts.end(), int64_t{0});
}

GuidanceMap rasterize_positions(const std::vector<TrajPoint>& positions, const GridSpec& spec) {
  GuidanceMap map;
  map.spec = spec;
  map.counts.assign(static_cast<size_t>(spec.rows) * spec.cols, 0);

  const auto n = static_cast<int64_t>(positions.size());
#pragma omp parallel
  {
    std::vector<int32_t> local(map.counts.size(), 0);
    int64_t local_dropped = 0;
#pragma omp for nowait
    for (int64_t i = 0; i < n; ++i) {
      GridCell cell = world_to_grid(positions[i], spec);
      if (cell.in_bounds)
        ++local[static_cast<size_t>(cell.row) * spec.cols + cell.col];
      else
        ++local_dropped;
    }
#pragma omp critical
    {
      for (size_t c = 0; c < local.size(); ++c) map.counts[c] += local[c];
      map.dropped += local_dropped;
    }
  }
  return map;
}

GuidanceMap rasterize(const RecordWindow& window, const GridSpec& spec) {
  return rasterize_positions(window.positions, spec);
}

GuidanceMap rasterize_serial(const RecordWindow& window, const GridSpec& spec) {
  GuidanceMap map;
  map.spec = spec;
  map.counts.assign(static_cast<size_t>(spec.rows) * spec.cols, 0);
  for (const auto& p : window.positions) {
    GridCell cell = world_to_grid(p, spec);
    if (cell.in_bounds)
      ++map.counts[static_cast<size_t>(cell.row) * spec.cols + cell.col];
    else
      ++map.dropped;
  }
  return map;
}

int local_side_cells(double local_side_m, double resolution) {
  return std::max(1, static_cast<int>(std::lround(local_side_m / resolution)));
}

LocalMap extract_local(const GuidanceMap& map, int64_t agent_id, TrajPoint agent_last_pos,
                       double half_side_m) {
  if (half_side_m <= 0) throw std::invalid_argument("local map half side must be positive");
  const int side = local_side_cells(2.0 * half_side_m, map.spec.resolution);

  LocalMap local;
  local.agent_id = agent_id;
  local.side = side;
  local.patch.assign(static_cast<size_t>(side) * side, 0);
  local.center_cell = world_to_grid(agent_last_pos, map.spec);

  const int row0 = local.center_cell.row - side / 2;
  const int col0 = local.center_cell.col - side / 2;
  for (int r = 0; r < side; ++r) {
    const int mr = row0 + r;
    if (mr < 0 || mr >= map.spec.rows) continue;
    for (int c = 0; c < side; ++c) {
      const int mc = col0 + c;
      if (mc < 0 || mc >= map.spec.cols) continue;
      local.patch[static_cast<size_t>(r) * side + c] = map.at(mr, mc);
    }
  }
  return local;
}

void write_grid_csv(const GuidanceMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write grid csv: " + path);
  for (int r = 0; r < map.spec.rows; ++r) {
    for (int c = 0; c < map.spec.cols; ++c) {
      if (c) out << ',';
      out << map.at(r, c);
    }
    out << '\n';
  }
}

LocalMap zero_local(int64_t agent_id, int side) {
  LocalMap local;
  local.agent_id = agent_id;
  local.side = side;
  local.patch.assign(static_cast<size_t>(side) * side, 0);
  local.center_cell = {0, 0, false};
  return local;
}

}  // namespace bgm
