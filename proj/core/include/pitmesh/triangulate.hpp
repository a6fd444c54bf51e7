#pragma once

#include "pitmesh/mesh.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace pitmesh::geom {

// Electrolyte rectangle above the surface y = 0, in micrometers.
struct DomainSpec {
  double x_min = -20.0;
  double x_max = 20.0;
  double height = 20.0;
};

// Semi-elliptical cavity below the surface.
struct PitSpec {
  double center_x = 0.0;
  double width = 10.0;
  double depth = 5.0;
  int nodes = 61;  // including both corners
};

// Points of the half ellipse from the left corner to the right corner at
// equal parametric-angle spacing; the corners sit exactly on y = 0.
std::vector<Vec2> semi_ellipse(const PitSpec& pit);

// Counterclockwise boundary of the electrolyte with a tag for the edge
// leaving each point.
struct DomainPolygon {
  std::vector<Vec2> points;
  std::vector<BoundaryTag> edge_tags;
};

DomainPolygon domain_polygon(const DomainSpec& domain, std::span<const PitSpec> pits,
                             double target_h);

// Delaunay triangulation of a jittered hexagonal fill of the domain with the
// pit chains embedded as boundary edges. Same seed, same mesh.
TriMesh build_domain_mesh(const DomainSpec& domain, std::span<const PitSpec> pits, double target_h,
                          std::uint64_t seed, double jitter = 0.15);

// Delaunay triangulation of a point set (Bowyer-Watson), counterclockwise cells.
std::vector<Triangle> delaunay(std::span<const Vec2> points);

// nx by ny rectangle cells on [x0,x1]x[y0,y1], each split into four triangles
// around an added centre vertex. Edges are tagged top/left/right/bottom.
TriMesh structured_rectangle(double x0, double x1, double y0, double y1, int nx, int ny);

bool point_in_polygon(const Vec2& p, std::span<const Vec2> polygon);

}  // namespace pitmesh::geom
