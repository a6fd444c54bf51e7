#pragma once

#include "pitmesh/mesh.hpp"
#include "pitmesh/triangulate.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace pitmesh::testing {

// Unit square split along the diagonal (0,0)-(1,1), all edges tagged.
inline TriMesh unit_square() {
  TriMesh m;
  m.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  m.boundary_edges = {{{0, 1}, BoundaryTag::bottom()},
                      {{1, 2}, BoundaryTag::right()},
                      {{2, 3}, BoundaryTag::top()},
                      {{3, 0}, BoundaryTag::left()}};
  return m;
}

inline TriMesh single_triangle(const Vec2& a, const Vec2& b, const Vec2& c) {
  TriMesh m;
  m.vertices = {a, b, c};
  m.triangles = {{0, 1, 2}};
  m.boundary_edges = {{{0, 1}, BoundaryTag::bottom()},
                      {{1, 2}, BoundaryTag::right()},
                      {{2, 0}, BoundaryTag::left()}};
  return m;
}

// A mesh holding only the given points and one chain through all of them.
inline std::pair<TriMesh, PitChain> polyline(const std::vector<Vec2>& pts) {
  TriMesh m;
  m.vertices = pts;
  PitChain c;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) c.vertices.push_back(i);
  return {m, c};
}

// Lower half of the circle of radius r about the origin, left to right.
inline std::vector<Vec2> lower_semicircle(double r, int n) {
  std::vector<Vec2> pts;
  for (int k = 0; k < n; ++k) {
    const double t = std::numbers::pi * (1.0 + static_cast<double>(k) / (n - 1));
    pts.emplace_back(r * std::cos(t), r * std::sin(t));
  }
  pts.front() = {-r, 0.0};
  pts.back() = {r, 0.0};
  return pts;
}

// Coarse version of the default single-pit domain; fast enough for unit tests.
inline TriMesh small_pit_mesh(int pit_nodes = 21, double h = 1.5) {
  geom::DomainSpec d{-10.0, 10.0, 10.0};
  geom::PitSpec pit{0.0, 6.0, 3.0, pit_nodes};
  return geom::build_domain_mesh(d, std::span<const geom::PitSpec>(&pit, 1), h, 3);
}

}  // namespace pitmesh::testing
