#include "bgm/social.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bgm::social {

namespace {
constexpr double kDegenerateDisp = 1e-12;
}

double kernel(TrajPoint p, TrajPoint source, double r, double a) {
  const double d = dist(p, source);
  if (d > r) return 0.0;
  return a - (a / r) * d;
}

double direction_weight(TrajPoint disp_own, TrajPoint disp_other) {
  const double n1 = norm(disp_own);
  const double n2 = norm(disp_other);
  if (n1 < kDegenerateDisp || n2 < kDegenerateDisp) return 0.0;
  return dot(disp_own, disp_other) / (n1 * n2);
}

double velocity_ratio(TrajPoint disp_own, TrajPoint disp_other, double v_cap) {
  const double n1 = norm(disp_own);
  const double n2 = norm(disp_other);
  if (n1 < kDegenerateDisp) return v_cap;
  return std::clamp(n2 / n1, 0.0, v_cap);
}

GridSpec field_extent(const std::vector<TrajPoint>& own_prediction, const NeighborSet& neighbors,
                      const SocialParams& params) {
  Bounds box;
  for (auto p : own_prediction) box.expand(p);
  for (const auto& nb : neighbors)
    for (auto p : nb.prediction) box.expand(p);
  if (box.empty()) throw std::invalid_argument("field_extent: no predicted points");
  const double pad = std::max({params.r_d, params.r_i, params.r_s}) + params.resolution;
  return scene_grid_spec(box, params.resolution, pad);
}

namespace {

EnergyField make_field(int64_t owner, const std::vector<TrajPoint>& own_prediction,
                       TrajPoint own_displacement, const NeighborSet& neighbors,
                       const SocialParams& params, bool parallel) {
  if (own_prediction.empty())
    throw std::invalid_argument("build_energy_field: empty own prediction");
  EnergyField field;
  field.owner = owner;
  field.params = params;
  field.spec = field_extent(own_prediction, neighbors, params);
  const size_t cells = static_cast<size_t>(field.spec.rows) * field.spec.cols;
  field.values.assign(cells, 0.0);
  field.destination.assign(cells, 0.0);
  field.interplay.assign(cells, 0.0);
  field.etiquette.assign(cells, 0.0);

  // Direction/speed weights depend only on the pair, not the cell.
  std::vector<double> weights(neighbors.size());
  for (size_t j = 0; j < neighbors.size(); ++j)
    weights[j] = direction_weight(own_displacement, neighbors[j].displacement) *
                 velocity_ratio(own_displacement, neighbors[j].displacement, params.v_cap);

  const int rows = field.spec.rows;
  const int cols = field.spec.cols;
#pragma omp parallel for schedule(static) if (parallel)
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const TrajPoint p = cell_center(field.spec, r, c);
      double e_dest = 0.0;
      for (auto q : own_prediction) e_dest += kernel(p, q, params.r_d, -1.0);
      double e_inter = 0.0;
      double e_etiq = 0.0;
      for (size_t j = 0; j < neighbors.size(); ++j) {
        for (auto q : neighbors[j].prediction) {
          e_inter += weights[j] * kernel(p, q, params.r_i, -1.0);
          e_etiq += kernel(p, q, params.r_s, 1.0);
        }
      }
      const size_t i = static_cast<size_t>(r) * cols + c;
      field.destination[i] = e_dest;
      field.interplay[i] = e_inter;
      field.etiquette[i] = e_etiq;
      field.values[i] =
          params.lambda_d * e_dest + params.lambda_i * e_inter + params.lambda_s * e_etiq;
    }
  }
  return field;
}

}  // namespace

EnergyField build_energy_field(int64_t owner, const std::vector<TrajPoint>& own_prediction,
                               TrajPoint own_displacement, const NeighborSet& neighbors,
                               const SocialParams& params) {
  return make_field(owner, own_prediction, own_displacement, neighbors, params, true);
}

EnergyField build_energy_field_serial(int64_t owner, const std::vector<TrajPoint>& own_prediction,
                                      TrajPoint own_displacement, const NeighborSet& neighbors,
                                      const SocialParams& params) {
  return make_field(owner, own_prediction, own_displacement, neighbors, params, false);
}

bool EnergyField::covers(TrajPoint p) const {
  const GridCell cell = world_to_grid(p, spec);
  return cell.in_bounds;
}

namespace {

struct BilinearFrame {
  int r0, c0, r1, c1;
  double fr, fc;  // interpolation fractions along rows / cols
};

BilinearFrame frame_at(const GridSpec& spec, TrajPoint p) {
  const double u = (p.x - spec.origin.x) / spec.resolution - 0.5;
  const double v = (p.y - spec.origin.y) / spec.resolution - 0.5;
  BilinearFrame f;
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  f.r0 = std::clamp(static_cast<int>(fu), 0, spec.rows - 1);
  f.c0 = std::clamp(static_cast<int>(fv), 0, spec.cols - 1);
  f.r1 = std::min(f.r0 + 1, spec.rows - 1);
  f.c1 = std::min(f.c0 + 1, spec.cols - 1);
  f.fr = std::clamp(u - fu, 0.0, 1.0);
  f.fc = std::clamp(v - fv, 0.0, 1.0);
  return f;
}

}  // namespace

double EnergyField::value_at(TrajPoint p) const {
  if (!covers(p)) return 0.0;
  const BilinearFrame f = frame_at(spec, p);
  const double v00 = at(f.r0, f.c0), v01 = at(f.r0, f.c1);
  const double v10 = at(f.r1, f.c0), v11 = at(f.r1, f.c1);
  const double top = v00 + (v01 - v00) * f.fc;
  const double bot = v10 + (v11 - v10) * f.fc;
  return top + (bot - top) * f.fr;
}

TrajPoint EnergyField::gradient_at(TrajPoint p) const {
  if (!covers(p)) return {0.0, 0.0};
  auto cell_grad = [&](int r, int c) -> TrajPoint {
    const int rm = std::max(r - 1, 0), rp = std::min(r + 1, spec.rows - 1);
    const int cm = std::max(c - 1, 0), cp = std::min(c + 1, spec.cols - 1);
    const double dx = (at(rp, c) - at(rm, c)) / ((rp - rm) * spec.resolution);
    const double dy = (at(r, cp) - at(r, cm)) / ((cp - cm) * spec.resolution);
    return {dx, dy};
  };
  const BilinearFrame f = frame_at(spec, p);
  const TrajPoint g00 = cell_grad(f.r0, f.c0), g01 = cell_grad(f.r0, f.c1);
  const TrajPoint g10 = cell_grad(f.r1, f.c0), g11 = cell_grad(f.r1, f.c1);
  const TrajPoint top = g00 + f.fc * (g01 - g00);
  const TrajPoint bot = g10 + f.fc * (g11 - g10);
  return top + f.fr * (bot - top);
}

double discriminant(const EnergyField& field, const std::vector<TrajPoint>& prediction,
                    int64_t* outside_count) {
  double total = 0.0;
  int64_t outside = 0;
  for (auto p : prediction) {
    if (!field.covers(p)) {
      ++outside;
      continue;
    }
    total += field.value_at(p);
  }
  if (outside_count) *outside_count += outside;
  return total;
}

RefineResult refine(const std::vector<TrajPoint>& prediction, const EnergyField& field,
                    const SocialParams& params) {
  RefineResult result;
  result.points = prediction;
  double d_prev = discriminant(field, result.points);
  result.d_trace.push_back(d_prev);

  for (int k = 1; k <= params.k_max; ++k) {
    result.orders = k;
    std::vector<TrajPoint> candidate(result.points.size());
    for (size_t i = 0; i < result.points.size(); ++i) {
      const TrajPoint g = field.gradient_at(result.points[i]);
      candidate[i] = result.points[i] - params.theta * g;
    }
    const double d_k = discriminant(field, candidate);
    result.d_trace.push_back(d_k);
    if (std::abs(d_k - d_prev) <= params.epsilon) return result;  // steady, keep previous points
    result.points = std::move(candidate);
    result.updates = k;
    d_prev = d_k;
  }
  return result;
}

}  // namespace bgm::social
