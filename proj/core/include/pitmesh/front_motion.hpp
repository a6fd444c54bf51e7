#pragma once

#include "pitmesh/fem_laplace.hpp"
#include "pitmesh/mesh.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace pitmesh::front {

struct FrontParams {
  double dt = 0.5;                  // seconds
  double corner_close_factor = 1.5;  // times the mean pit edge length
  double merge_gap_tol = 1.0;       // micrometers
  double cfl = 0.2;                 // dt <= cfl * shortest pit edge / fastest speed

  void validate() const;
};

// Mean pit-edge length of the chain times corner_close_factor.
double corner_close_tolerance(const TriMesh& mesh, const PitChain& chain, const FrontParams& p);

// Replaces the Faraday speed (micrometers per second) at a chain vertex.
using SpeedOverride = std::function<double(int vertex, const Vec2& position, const Vec2& normal)>;

// Faraday speed in micrometers per second at every chain vertex, using the
// vertex normal for V_corr and the nodal potential.
std::vector<double> vertex_speeds(const TriMesh& mesh, const PitChain& chain,
                                  const Eigen::VectorXd& phi, const fem::PitFluxModel& model,
                                  const SpeedOverride& override_speed = {});

// Largest admissible front step: cfl * (shortest pit edge) / (fastest speed).
double stable_dt(const TriMesh& mesh, std::span<const PitChain> chains,
                 const Eigen::VectorXd& phi, const fem::PitFluxModel& model, const FrontParams& p,
                 const SpeedOverride& override_speed = {});

enum class CornerCase { Unchanged, Slid, Absorbed, Projected };

struct CornerUpdate {
  CornerCase left = CornerCase::Unchanged;
  CornerCase right = CornerCase::Unchanged;
};

// Re-seats both corners of the chain on y = 0 by extending the wall edge next
// to each corner. A corner that would travel farther than the close tolerance
// (or past the middle of its bottom edge) stays on the pit wall and the
// neighbouring surface vertex becomes the corner; that edge is retagged Pit.
CornerUpdate update_corners(TriMesh& mesh, PitChain& chain, const FrontParams& p,
                            std::optional<double> close_tol = std::nullopt);

// Where the wall line through `inner` and `outer` (outer nearer the corner)
// meets y = 0. Empty when the line is within 1e-12 of horizontal.
std::optional<Vec2> surface_intersection(const Vec2& inner, const Vec2& outer);

// Intersection of the lines through (l2, l1) and (r2, r1). Empty when the
// lines are less than min_angle_deg apart.
std::optional<Vec2> apex_from_walls(const Vec2& l2, const Vec2& l1, const Vec2& r2, const Vec2& r1,
                                    double min_angle_deg = 1.0);

// Next apex position for a merged chain. Falls back to the old apex shifted
// by fallback_shift when the walls are nearly parallel; never moves upward.
Vec2 track_apex(const TriMesh& mesh, const PitChain& chain, const Vec2& fallback_shift);

struct AdvanceReport {
  double max_speed = 0.0;  // micrometers per second
  double min_speed = 0.0;
  CornerUpdate corners;
  bool apex_fallback = false;
  int consumed_vertices = 0;
};

// Moves every chain vertex other than corners and the apex by dt * V_n along
// its vertex normal, then updates corners and the apex. Throws GeometryError
// if the resulting polyline intersects itself.
AdvanceReport advance_pit(TriMesh& mesh, PitChain& chain, const Eigen::VectorXd& phi,
                          const fem::PitFluxModel& model, const FrontParams& p, double dt,
                          const SpeedOverride& override_speed = {});

// Checks every chain for self-intersection, crossings between chains and
// interior vertices above y = 0. Returns a message per problem.
std::vector<std::string> front_problems(const TriMesh& mesh, std::span<const PitChain> chains);

struct MergeDescriptor {
  std::array<int, 2> edge{};  // left vertex, right vertex
  int left_pit = 0;
  int right_pit = 0;
  double gap = 0.0;
};

// The shortest bottom edge joining the right corner of one pit to the left
// corner of the next, if shorter than merge_gap_tol.
std::optional<MergeDescriptor> detect_merge(const TriMesh& mesh, std::span<const PitChain> chains,
                                            const FrontParams& p);

struct MergeResult {
  int apex = -1;       // vertex placed at the gap midpoint
  int relocated = -1;  // vertex moved onto the wall next to the apex
};

// Joins the two pits without touching topology: the gap edge becomes a pit
// edge, one endpoint moves to the gap midpoint and the other halfway to its
// wall neighbour. Chains are rebuilt and renumbered. Throws GeometryError
// if every choice inverts a cell.
MergeResult merge_pits(TriMesh& mesh, std::vector<PitChain>& chains, const MergeDescriptor& merge);

// Polygon area enclosed by a chain and the segment joining its corners.
double pit_area(const TriMesh& mesh, const PitChain& chain);

}  // namespace pitmesh::front
