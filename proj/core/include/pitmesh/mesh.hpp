#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pitmesh {

// Geometry is stored in micrometers throughout.
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// Numbering follows the electrolyte boundary pieces: 1 top (Dirichlet),
// 2 left, 3 right, 4 bottom (the uncorroded surface y = 0), 5 pit wall.
enum class BoundaryKind : int { Top = 1, Left = 2, Right = 3, Bottom = 4, Pit = 5 };

struct BoundaryTag {
  BoundaryKind kind = BoundaryKind::Bottom;
  int pit_id = -1;  // only meaningful for kind == Pit

  static BoundaryTag top() { return {BoundaryKind::Top, -1}; }
  static BoundaryTag left() { return {BoundaryKind::Left, -1}; }
  static BoundaryTag right() { return {BoundaryKind::Right, -1}; }
  static BoundaryTag bottom() { return {BoundaryKind::Bottom, -1}; }
  static BoundaryTag pit(int id) { return {BoundaryKind::Pit, id}; }

  bool is_pit() const { return kind == BoundaryKind::Pit; }
  friend bool operator==(const BoundaryTag&, const BoundaryTag&) = default;
};

std::string to_string(const BoundaryTag& tag);

struct BoundaryEdge {
  std::array<int, 2> v{};
  BoundaryTag tag;
};

using Triangle = std::array<int, 3>;

// Fixed-topology triangulation of the electrolyte. Triangles are kept
// counterclockwise; vertex and triangle counts never change during a run.
struct TriMesh {
  std::vector<Vec2> vertices;
  std::vector<Triangle> triangles;
  std::vector<BoundaryEdge> boundary_edges;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_cells() const { return static_cast<int>(triangles.size()); }
};

// Ordered pit front, left corner first. Corners sit on y = 0; after a merge
// the apex (ridge vertex between the former pits) is recorded as well.
struct PitChain {
  int pit_id = 0;
  std::vector<int> vertices;
  std::optional<int> apex;

  int left_corner() const { return vertices.front(); }
  int right_corner() const { return vertices.back(); }
  int size() const { return static_cast<int>(vertices.size()); }
};

// F_K(xi) = jacobian * xi + translation maps the reference triangle
// (0,0),(1,0),(0,1) onto the cell.
struct AffineMap {
  Mat2 jacobian;
  Vec2 translation;
  double area = 0.0;
};

inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

double cell_signed_area(const TriMesh& mesh, int cell);

// Throws InvertedElementError for a cell with non-positive area.
AffineMap affine_map(const TriMesh& mesh, int cell);

// One unit normal per chain edge, pointing out of the electrolyte into the metal.
std::vector<Vec2> face_normals(const TriMesh& mesh, const PitChain& chain);

// One unit normal per chain vertex: the normalized mean of the two adjacent
// face normals; corners take the normal of their single pit edge.
std::vector<Vec2> vertex_normals(const TriMesh& mesh, const PitChain& chain);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

// Minimum Euclidean distance from p to any pit-chain segment.
double min_distance_to_pit(const Vec2& p, std::span<const PitChain> chains, const TriMesh& mesh);

struct ValidationReport {
  std::vector<int> inverted_cells;
  std::vector<int> bad_cells;  // out-of-range or repeated vertex indices
  // Tagged edges not owned by exactly one triangle.
  std::vector<std::array<int, 2>> bad_boundary_edges;
  // Geometric boundary edges (one owning triangle) that carry no tag.
  std::vector<std::array<int, 2>> untagged_boundary_edges;
  std::vector<std::string> messages;

  bool ok() const { return messages.empty(); }
};

ValidationReport validate(const TriMesh& mesh);

// Swaps two indices of every clockwise triangle. Returns how many were flipped.
int orient_ccw(TriMesh& mesh);

int count_inverted(const TriMesh& mesh);
double min_cell_area(const TriMesh& mesh);
double total_area(const TriMesh& mesh);

// Ordered vertex loop built from the tagged boundary edges (counterclockwise).
std::vector<int> boundary_loop(const TriMesh& mesh);
double polygon_area(std::span<const Vec2> polygon);

// Rebuilds ordered chains from Pit-tagged edges. Corners are the chain
// endpoints; chains are sorted left to right and renumbered from 0.
std::vector<PitChain> chains_from_tags(TriMesh& mesh);

// Vertex-to-vertex adjacency through triangle edges.
std::vector<std::vector<int>> vertex_adjacency(const TriMesh& mesh);

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

// True when segments [p1,p2] and [q1,q2] cross or touch.
bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2);

}  // namespace pitmesh
