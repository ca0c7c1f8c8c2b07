#pragma once

#include <cstdint>
#include <vector>

#include "bgm/geometry.hpp"
#include "bgm/guidance_map.hpp"

namespace bgm::social {

struct SocialParams {
  double lambda_d = 1.0;  // destination weight (attractive)
  double lambda_i = 1.0;  // interplay weight (direction/speed scaled)
  double lambda_s = 0.2;  // etiquette weight (repulsive safe distance)
  double r_d = 2.0;       // meters
  double r_i = 1.5;
  double r_s = 0.1;
  double theta = 0.001;   // refinement step coefficient
  double epsilon = 1e-6;  // steady-value tolerance
  int k_max = 10;
  double resolution = 0.1;  // field meters per cell
  double v_cap = 10.0;      // bound on the relative-speed ratio
};

/// Linear-falloff energy cone: amplitude `a` at the source, zero at and
/// beyond radius `r`.
double kernel(TrajPoint p, TrajPoint source, double r, double a);

/// Cosine between two observed displacement vectors; 0 when either agent
/// barely moved (direction undefined).
double direction_weight(TrajPoint disp_own, TrajPoint disp_other);

/// Ratio of the other agent's displacement magnitude to one's own, clamped
/// to [0, v_cap].
double velocity_ratio(TrajPoint disp_own, TrajPoint disp_other, double v_cap);

/// A neighbor's preliminary prediction plus its observed displacement
/// (first observed minus last observed position).
struct NeighborTraj {
  int64_t agent_id = 0;
  std::vector<TrajPoint> prediction;
  TrajPoint displacement;
};
using NeighborSet = std::vector<NeighborTraj>;

/// Per-agent energy over a fine grid. Component grids are kept so the
/// weighted combination stays auditable cellwise.
struct EnergyField {
  int64_t owner = 0;
  GridSpec spec;
  std::vector<double> values;       // lambda-weighted combination
  std::vector<double> destination;  // own-path cones, amplitude -1
  std::vector<double> interplay;    // neighbor cones scaled by d*v, amplitude -1
  std::vector<double> etiquette;    // neighbor cones, amplitude +1
  SocialParams params;

  double at(int row, int col) const { return values[static_cast<size_t>(row) * spec.cols + col]; }
  /// Bilinear interpolation between cell centers; zero outside the grid.
  double value_at(TrajPoint p) const;
  bool covers(TrajPoint p) const;
  /// Central-difference gradient at cell centers, bilinearly interpolated.
  TrajPoint gradient_at(TrajPoint p) const;
};

/// Grid extent: bounding box of all involved predicted points padded by the
/// largest radius (everything farther contributes zero).
GridSpec field_extent(const std::vector<TrajPoint>& own_prediction, const NeighborSet& neighbors,
                      const SocialParams& params);

EnergyField build_energy_field(int64_t owner, const std::vector<TrajPoint>& own_prediction,
                               TrajPoint own_displacement, const NeighborSet& neighbors,
                               const SocialParams& params);
EnergyField build_energy_field_serial(int64_t owner, const std::vector<TrajPoint>& own_prediction,
                                      TrajPoint own_displacement, const NeighborSet& neighbors,
                                      const SocialParams& params);

/// Total interpolated energy along a path. Points outside the field count
/// as zero and are tallied in `outside_count` when given.
double discriminant(const EnergyField& field, const std::vector<TrajPoint>& prediction,
                    int64_t* outside_count = nullptr);

struct RefineResult {
  std::vector<TrajPoint> points;
  int updates = 0;               // accepted gradient steps
  int orders = 0;                // steps evaluated before stopping
  std::vector<double> d_trace;   // discriminant after each evaluation, d_trace[0] = initial
};

/// Iterative per-point descent on the field. Each step moves every point
/// against the local gradient; iteration stops once the discriminant is
/// steady (the triggering candidate is discarded) or after k_max steps.
RefineResult refine(const std::vector<TrajPoint>& prediction, const EnergyField& field,
                    const SocialParams& params);

}  // namespace bgm::social
