#include "pitmesh/mesh.hpp"

#include "pitmesh/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

namespace pitmesh {

std::string to_string(const BoundaryTag& tag) {
  switch (tag.kind) {
    case BoundaryKind::Top: return "top";
    case BoundaryKind::Left: return "left";
    case BoundaryKind::Right: return "right";
    case BoundaryKind::Bottom: return "bottom";
    case BoundaryKind::Pit: return "pit(" + std::to_string(tag.pit_id) + ")";
  }
  return "?";
}

double cell_signed_area(const TriMesh& mesh, int cell) {
  const auto& t = mesh.triangles[cell];
  return signed_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
}

AffineMap affine_map(const TriMesh& mesh, int cell) {
  if (cell < 0 || cell >= mesh.num_cells()) {
    throw GeometryError("affine_map: cell index " + std::to_string(cell) + " out of range");
  }
  const auto& t = mesh.triangles[cell];
  const Vec2& p0 = mesh.vertices[t[0]];
  const Vec2& p1 = mesh.vertices[t[1]];
  const Vec2& p2 = mesh.vertices[t[2]];
  AffineMap map;
  map.jacobian.col(0) = p1 - p0;
  map.jacobian.col(1) = p2 - p0;
  map.translation = p0;
  map.area = signed_area(p0, p1, p2);
  if (!(map.area > 0.0)) {
    std::ostringstream os;
    os << "inverted element: cell " << cell << " has signed area " << map.area;
    throw InvertedElementError(cell, os.str());
  }
  return map;
}

std::vector<Vec2> face_normals(const TriMesh& mesh, const PitChain& chain) {
  if (chain.size() < 2) throw GeometryError("face_normals: chain needs at least one edge");
  std::vector<Vec2> normals;
  normals.reserve(chain.size() - 1);
  for (int k = 0; k + 1 < chain.size(); ++k) {
    const Vec2 t = mesh.vertices[chain.vertices[k + 1]] - mesh.vertices[chain.vertices[k]];
    const double len = t.norm();
    if (!(len > 0.0)) {
      throw GeometryError("zero-length pit edge between vertices " +
                          std::to_string(chain.vertices[k]) + " and " +
                          std::to_string(chain.vertices[k + 1]));
    }
    // The chain runs left to right with the electrolyte on its left; the
    // metal side is the clockwise rotation of the tangent.
    normals.emplace_back(t.y() / len, -t.x() / len);
  }
  return normals;
}

std::vector<Vec2> vertex_normals(const TriMesh& mesh, const PitChain& chain) {
  const auto faces = face_normals(mesh, chain);
  const int n = chain.size();
  std::vector<Vec2> normals(n);
  normals[0] = faces.front();
  normals[n - 1] = faces.back();
  for (int k = 1; k + 1 < n; ++k) {
    Vec2 avg = faces[k - 1] + faces[k];
    const double len = avg.norm();
    if (len < 1e-14) {
      throw GeometryError("vertex normal undefined at chain vertex " +
                          std::to_string(chain.vertices[k]) + " (edges fold back)");
    }
    normals[k] = avg / len;
  }
  return normals;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

double min_distance_to_pit(const Vec2& p, std::span<const PitChain> chains, const TriMesh& mesh) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& chain : chains) {
    if (chain.size() == 1) {
      best = std::min(best, (p - mesh.vertices[chain.vertices[0]]).norm());
      continue;
    }
    for (int k = 0; k + 1 < chain.size(); ++k) {
      best = std::min(best, point_segment_distance(p, mesh.vertices[chain.vertices[k]],
                                                   mesh.vertices[chain.vertices[k + 1]]));
    }
  }
  return best;
}

ValidationReport validate(const TriMesh& mesh) {
  ValidationReport report;
  const int nv = mesh.num_vertices();
  std::unordered_map<std::uint64_t, int> edge_owners;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.triangles[c];
    bool bad = false;
    for (int i = 0; i < 3; ++i) {
      if (t[i] < 0 || t[i] >= nv || t[i] == t[(i + 1) % 3]) bad = true;
    }
    if (bad) {
      report.bad_cells.push_back(c);
      report.messages.push_back("cell " + std::to_string(c) + " has invalid vertex indices");
      continue;
    }
    const double a = cell_signed_area(mesh, c);
    if (!(a > 0.0)) {
      report.inverted_cells.push_back(c);
      std::ostringstream os;
      os << "cell " << c << " is inverted or degenerate (signed area " << a << ")";
      report.messages.push_back(os.str());
    }
    for (int i = 0; i < 3; ++i) ++edge_owners[edge_key(t[i], t[(i + 1) % 3])];
  }

  std::unordered_map<std::uint64_t, int> tagged;
  std::map<int, int> pit_ids;
  for (const auto& e : mesh.boundary_edges) {
    const auto key = edge_key(e.v[0], e.v[1]);
    ++tagged[key];
    auto it = edge_owners.find(key);
    const int owners = it == edge_owners.end() ? 0 : it->second;
    if (owners != 1) {
      report.bad_boundary_edges.push_back(e.v);
      report.messages.push_back("boundary edge (" + std::to_string(e.v[0]) + "," +
                                std::to_string(e.v[1]) + ") belongs to " +
                                std::to_string(owners) + " cells");
    }
    if (e.tag.is_pit()) pit_ids[e.tag.pit_id] = 1;
  }
  for (const auto& [key, count] : tagged) {
    if (count > 1) {
      const int a = static_cast<int>(key >> 32);
      const int b = static_cast<int>(key & 0xffffffffu);
      report.messages.push_back("boundary edge (" + std::to_string(a) + "," + std::to_string(b) +
                                ") tagged " + std::to_string(count) + " times");
    }
  }
  for (const auto& [key, owners] : edge_owners) {
    if (owners == 1 && !tagged.count(key)) {
      const int a = static_cast<int>(key >> 32);
      const int b = static_cast<int>(key & 0xffffffffu);
      report.untagged_boundary_edges.push_back({a, b});
      report.messages.push_back("edge (" + std::to_string(a) + "," + std::to_string(b) +
                                ") is on the boundary but carries no tag");
    }
  }
  int expect = 0;
  for (const auto& [id, unused] : pit_ids) {
    if (id != expect) {
      report.messages.push_back("pit ids are not contiguous from 0 (found " + std::to_string(id) +
                                ", expected " + std::to_string(expect) + ")");
      break;
    }
    ++expect;
  }
  return report;
}

int orient_ccw(TriMesh& mesh) {
  int flipped = 0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    if (cell_signed_area(mesh, c) < 0.0) {
      std::swap(mesh.triangles[c][1], mesh.triangles[c][2]);
      ++flipped;
    }
  }
  return flipped;
}

int count_inverted(const TriMesh& mesh) {
  int n = 0;
  for (int c = 0; c < mesh.num_cells(); ++c) n += cell_signed_area(mesh, c) > 0.0 ? 0 : 1;
  return n;
}

double min_cell_area(const TriMesh& mesh) {
  double m = std::numeric_limits<double>::infinity();
  for (int c = 0; c < mesh.num_cells(); ++c) m = std::min(m, cell_signed_area(mesh, c));
  return m;
}

double total_area(const TriMesh& mesh) {
  double s = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) s += cell_signed_area(mesh, c);
  return s;
}

std::vector<int> boundary_loop(const TriMesh& mesh) {
  std::unordered_map<std::uint64_t, int> is_boundary;
  for (const auto& e : mesh.boundary_edges) is_boundary[edge_key(e.v[0], e.v[1])] = 1;
  std::unordered_map<int, int> next;
  for (const auto& t : mesh.triangles) {
    for (int i = 0; i < 3; ++i) {
      const int a = t[i];
      const int b = t[(i + 1) % 3];
      if (is_boundary.count(edge_key(a, b))) next[a] = b;
    }
  }
  if (next.empty()) return {};
  int start = next.begin()->first;
  for (const auto& [a, b] : next) start = std::min(start, a);
  std::vector<int> loop{start};
  int cur = next.at(start);
  while (cur != start) {
    loop.push_back(cur);
    auto it = next.find(cur);
    if (it == next.end() || loop.size() > next.size()) {
      throw GeometryError("boundary edges do not form a single closed loop");
    }
    cur = it->second;
  }
  return loop;
}

double polygon_area(std::span<const Vec2> polygon) {
  double s = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % n];
    s += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * s;
}

std::vector<PitChain> chains_from_tags(TriMesh& mesh) {
  std::map<int, std::vector<std::array<int, 2>>> by_pit;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag.is_pit()) by_pit[e.tag.pit_id].push_back(e.v);
  }
  std::vector<PitChain> chains;
  for (const auto& [id, edges] : by_pit) {
    std::unordered_map<int, std::vector<int>> adj;
    for (const auto& e : edges) {
      adj[e[0]].push_back(e[1]);
      adj[e[1]].push_back(e[0]);
    }
    std::vector<int> ends;
    for (const auto& [v, nb] : adj) {
      if (nb.size() == 1) ends.push_back(v);
      if (nb.size() > 2) {
        throw GeometryError("pit " + std::to_string(id) + " edges branch at vertex " +
                            std::to_string(v));
      }
    }
    if (ends.size() != 2) {
      throw GeometryError("pit " + std::to_string(id) + " edges do not form an open chain");
    }
    std::sort(ends.begin(), ends.end(), [&](int a, int b) {
      return mesh.vertices[a].x() < mesh.vertices[b].x();
    });
    PitChain chain;
    chain.pit_id = id;
    int prev = -1;
    int cur = ends[0];
    while (true) {
      chain.vertices.push_back(cur);
      int nxt = -1;
      for (int nb : adj[cur]) {
        if (nb != prev) nxt = nb;
      }
      if (nxt < 0 || cur == ends[1]) break;
      prev = cur;
      cur = nxt;
    }
    if (chain.size() != static_cast<int>(edges.size()) + 1) {
      throw GeometryError("pit " + std::to_string(id) + " chain is not connected");
    }
    chains.push_back(std::move(chain));
  }
  std::sort(chains.begin(), chains.end(), [&](const PitChain& a, const PitChain& b) {
    return mesh.vertices[a.left_corner()].x() < mesh.vertices[b.left_corner()].x();
  });
  std::map<int, int> renumber;
  for (int i = 0; i < static_cast<int>(chains.size()); ++i) {
    renumber[chains[i].pit_id] = i;
    chains[i].pit_id = i;
  }
  for (auto& e : mesh.boundary_edges) {
    if (e.tag.is_pit()) e.tag.pit_id = renumber.at(e.tag.pit_id);
  }
  return chains;
}

std::vector<std::vector<int>> vertex_adjacency(const TriMesh& mesh) {
  std::vector<std::vector<int>> adj(mesh.vertices.size());
  for (const auto& t : mesh.triangles) {
    for (int i = 0; i < 3; ++i) {
      const int a = t[i];
      const int b = t[(i + 1) % 3];
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

namespace {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

}  // namespace

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

}  // namespace pitmesh
