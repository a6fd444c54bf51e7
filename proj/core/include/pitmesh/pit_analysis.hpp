#pragma once

#include "pitmesh/mesh.hpp"
#include "pitmesh/mesh_adapt.hpp"

#include <optional>
#include <span>

namespace pitmesh::analysis {

struct Dimensions {
  double depth = 0.0;  // deepest chain vertex below y = 0
  double width = 0.0;  // widest single chain, corner to corner
};

Dimensions pit_dimensions(const TriMesh& mesh, std::span<const PitChain> chains);

// Standard deviation of the chain's distances from `center` divided by their mean.
double radial_deviation(const TriMesh& mesh, const PitChain& chain, const Vec2& center);

// A straight stretch of pit wall found as the longest run of consecutive
// edges whose directions stay inside a window of window_deg degrees.
struct WallFit {
  int first_edge = 0;
  int last_edge = 0;
  double length = 0.0;
  Vec2 point = Vec2::Zero();
  Vec2 direction = Vec2::UnitY();  // unit, fitted through the run's vertices
  double from_vertical_deg = 0.0;
};

// left == true searches from the left corner to the deepest vertex.
std::optional<WallFit> fit_wall(const TriMesh& mesh, const PitChain& chain, bool left,
                                double window_deg = 3.0);

// Angle between the two fitted walls of a V-shaped pit, in degrees.
double inter_wall_angle(const TriMesh& mesh, const PitChain& chain, double window_deg = 3.0);

double mean_edge_length(const TriMesh& mesh);

// Statistics over mesh edges (excluding edges of the pit chains) whose
// midpoint lies within `radius` of a pit.
struct NearPitEdges {
  int count = 0;
  double min_length = 0.0;
  double mean_length = 0.0;
};
NearPitEdges near_pit_edges(const TriMesh& mesh, std::span<const PitChain> chains, double radius);

// Takes the `fraction` of non-chain vertices nearest the pits and returns the
// `quantile` of their distances; small values mean tight clustering.
double cluster_extent(const TriMesh& mesh, std::span<const PitChain> chains, double fraction = 0.1,
                      double quantile = 0.75);

// max/min over cells of |K| sqrt(det M_K); 1 for perfect equidistribution.
double equidistribution_spread(const TriMesh& mesh, const adapt::MetricField& metric);

}  // namespace pitmesh::analysis
