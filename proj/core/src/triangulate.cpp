#include "pitmesh/triangulate.hpp"

#include "pitmesh/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace pitmesh::geom {
namespace {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// Positive when d lies strictly inside the circumcircle of the ccw triangle abc.
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

std::uint64_t directed(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

void append_segment(std::vector<Vec2>& pts, std::vector<BoundaryTag>& tags, const Vec2& from,
                    const Vec2& to, BoundaryTag tag, double h) {
  const int pieces = std::max(1, static_cast<int>(std::ceil((to - from).norm() / h - 1e-9)));
  for (int k = 0; k < pieces; ++k) {
    pts.push_back(from + (to - from) * (static_cast<double>(k) / pieces));
    tags.push_back(tag);
  }
}

std::string describe(const DomainPolygon& poly) {
  std::ostringstream os;
  os << "boundary polygon with " << poly.points.size() << " points:";
  for (const auto& p : poly.points) os << " (" << p.x() << "," << p.y() << ")";
  return os.str();
}

}  // namespace

std::vector<Vec2> semi_ellipse(const PitSpec& pit) {
  if (pit.nodes < 3) throw ValidationError("a pit needs at least 3 nodes");
  const double a = 0.5 * pit.width;
  const double b = pit.depth;
  std::vector<Vec2> pts(pit.nodes);
  for (int k = 0; k < pit.nodes; ++k) {
    const double theta = std::numbers::pi * (1.0 + static_cast<double>(k) / (pit.nodes - 1));
    pts[k] = Vec2(pit.center_x + a * std::cos(theta), b * std::sin(theta));
  }
  pts.front() = Vec2(pit.center_x - a, 0.0);
  pts.back() = Vec2(pit.center_x + a, 0.0);
  return pts;
}

DomainPolygon domain_polygon(const DomainSpec& domain, std::span<const PitSpec> pits,
                             double target_h) {
  if (!(domain.x_max > domain.x_min) || !(domain.height > 0.0)) {
    throw ValidationError("domain must have positive width and height");
  }
  if (!(target_h > 0.0)) throw ValidationError("target edge length must be > 0");
  std::vector<PitSpec> sorted(pits.begin(), pits.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const PitSpec& a, const PitSpec& b) { return a.center_x < b.center_x; });
  double cursor = domain.x_min;
  for (const auto& p : sorted) {
    const double left = p.center_x - 0.5 * p.width;
    if (!(left > cursor + 1e-9)) {
      throw ValidationError("pits overlap each other or the domain sides");
    }
    cursor = p.center_x + 0.5 * p.width;
  }
  if (!(cursor < domain.x_max - 1e-9)) throw ValidationError("pit extends past the domain side");

  DomainPolygon poly;
  cursor = domain.x_min;
  for (int id = 0; id < static_cast<int>(sorted.size()); ++id) {
    const auto chain = semi_ellipse(sorted[id]);
    append_segment(poly.points, poly.edge_tags, Vec2(cursor, 0.0), chain.front(),
                   BoundaryTag::bottom(), target_h);
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
      poly.points.push_back(chain[k]);
      poly.edge_tags.push_back(BoundaryTag::pit(id));
    }
    cursor = chain.back().x();
  }
  const Vec2 br(domain.x_max, 0.0), tr(domain.x_max, domain.height);
  const Vec2 tl(domain.x_min, domain.height), bl(domain.x_min, 0.0);
  append_segment(poly.points, poly.edge_tags, Vec2(cursor, 0.0), br, BoundaryTag::bottom(),
                 target_h);
  append_segment(poly.points, poly.edge_tags, br, tr, BoundaryTag::right(), target_h);
  append_segment(poly.points, poly.edge_tags, tr, tl, BoundaryTag::top(), target_h);
  append_segment(poly.points, poly.edge_tags, tl, bl, BoundaryTag::left(), target_h);
  return poly;
}

bool point_in_polygon(const Vec2& p, std::span<const Vec2> polygon) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

std::vector<Triangle> delaunay(std::span<const Vec2> input) {
  const int n = static_cast<int>(input.size());
  if (n < 3) throw GeometryError("delaunay: need at least 3 points");
  Vec2 lo = input[0], hi = input[0];
  for (const auto& p : input) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec2 mid = 0.5 * (lo + hi);
  const double span = std::max(hi.x() - lo.x(), hi.y() - lo.y()) + 1.0;
  std::vector<Vec2> pts(input.begin(), input.end());
  pts.push_back(mid + Vec2(-1000.0 * span, -500.0 * span));
  pts.push_back(mid + Vec2(1000.0 * span, -500.0 * span));
  pts.push_back(mid + Vec2(0.0, 1000.0 * span));

  std::vector<Triangle> tris{{n, n + 1, n + 2}};
  std::vector<char> alive{1};
  std::unordered_map<std::uint64_t, int> owner;  // directed edge -> triangle
  auto add = [&](int a, int b, int c) {
    const int id = static_cast<int>(tris.size());
    tris.push_back({a, b, c});
    alive.push_back(1);
    owner[directed(a, b)] = id;
    owner[directed(b, c)] = id;
    owner[directed(c, a)] = id;
  };
  owner[directed(n, n + 1)] = 0;
  owner[directed(n + 1, n + 2)] = 0;
  owner[directed(n + 2, n)] = 0;

  int last = 0;
  for (int i = 0; i < n; ++i) {
    const Vec2& p = pts[i];
    // Walk towards the point from the most recent triangle.
    int cur = last;
    if (!alive[cur]) {
      cur = static_cast<int>(std::find(alive.rbegin(), alive.rend(), 1) - alive.rbegin());
      cur = static_cast<int>(alive.size()) - 1 - cur;
    }
    for (std::size_t guard = 0; guard <= tris.size(); ++guard) {
      const auto& t = tris[cur];
      int next = -1;
      for (int k = 0; k < 3; ++k) {
        if (orient(pts[t[k]], pts[t[(k + 1) % 3]], p) < 0.0) {
          auto it = owner.find(directed(t[(k + 1) % 3], t[k]));
          if (it != owner.end()) next = it->second;
          break;
        }
      }
      if (next < 0) break;
      cur = next;
    }
    std::vector<int> cavity{cur};
    std::unordered_set<int> in_cavity{cur};
    for (std::size_t q = 0; q < cavity.size(); ++q) {
      const auto t = tris[cavity[q]];
      for (int k = 0; k < 3; ++k) {
        auto it = owner.find(directed(t[(k + 1) % 3], t[k]));
        if (it == owner.end() || in_cavity.count(it->second)) continue;
        const auto& u = tris[it->second];
        if (incircle(pts[u[0]], pts[u[1]], pts[u[2]], p) > 0.0) {
          in_cavity.insert(it->second);
          cavity.push_back(it->second);
        }
      }
    }
    std::vector<std::array<int, 2>> rim;
    for (int c : cavity) {
      const auto& t = tris[c];
      for (int k = 0; k < 3; ++k) {
        auto it = owner.find(directed(t[(k + 1) % 3], t[k]));
        if (it == owner.end() || !in_cavity.count(it->second)) rim.push_back({t[k], t[(k + 1) % 3]});
      }
    }
    for (const auto& e : rim) {
      if (!(orient(pts[e[0]], pts[e[1]], p) > 0.0)) {
        std::ostringstream os;
        os << "delaunay: cavity of point " << i << " (" << p.x() << "," << p.y()
           << ") is not star-shaped; points may be duplicated";
        throw GeometryError(os.str());
      }
    }
    for (int c : cavity) {
      alive[c] = 0;
      const auto& t = tris[c];
      for (int k = 0; k < 3; ++k) {
        auto it = owner.find(directed(t[k], t[(k + 1) % 3]));
        if (it != owner.end() && it->second == c) owner.erase(it);
      }
    }
    for (const auto& e : rim) add(e[0], e[1], i);
    last = static_cast<int>(tris.size()) - 1;
  }

  std::vector<Triangle> out;
  for (std::size_t k = 0; k < tris.size(); ++k) {
    const auto& t = tris[k];
    if (alive[k] && t[0] < n && t[1] < n && t[2] < n) out.push_back(t);
  }
  return out;
}

TriMesh build_domain_mesh(const DomainSpec& domain, std::span<const PitSpec> pits, double target_h,
                          std::uint64_t seed, double jitter) {
  const DomainPolygon poly = domain_polygon(domain, pits, target_h);
  const int nb = static_cast<int>(poly.points.size());
  std::vector<Vec2> pts = poly.points;

  double depth = 0.0;
  for (const auto& p : pits) depth = std::max(depth, p.depth);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double dy = target_h * std::sqrt(3.0) / 2.0;
  const double clearance = 0.55 * target_h;
  int row = 0;
  for (double y = -depth; y < domain.height; y += dy, ++row) {
    const double shift = (row % 2) ? 0.5 * target_h : 0.0;
    for (double x = domain.x_min + shift; x < domain.x_max; x += target_h) {
      Vec2 p(x + jitter * target_h * unit(rng), y + jitter * target_h * unit(rng));
      if (!point_in_polygon(p, poly.points)) continue;
      bool clear = true;
      for (int k = 0; k < nb && clear; ++k) {
        const Vec2& a = poly.points[k];
        const Vec2& b = poly.points[(k + 1) % nb];
        clear = point_segment_distance(p, a, b) > clearance;
      }
      if (clear) pts.push_back(p);
    }
  }

  TriMesh mesh;
  mesh.vertices = pts;
  for (const auto& t : delaunay(pts)) {
    const Vec2 centroid = (pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0;
    if (point_in_polygon(centroid, poly.points)) mesh.triangles.push_back(t);
  }
  orient_ccw(mesh);

  std::unordered_map<std::uint64_t, int> owners;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) ++owners[edge_key(t[k], t[(k + 1) % 3])];
  }
  for (int k = 0; k < nb; ++k) {
    const int a = k, b = (k + 1) % nb;
    auto it = owners.find(edge_key(a, b));
    if (it == owners.end() || it->second != 1) {
      std::ostringstream os;
      os << "triangulation lost boundary edge (" << poly.points[a].x() << "," << poly.points[a].y()
         << ")-(" << poly.points[b].x() << "," << poly.points[b].y() << "); " << describe(poly);
      throw GeometryError(os.str());
    }
    mesh.boundary_edges.push_back({{a, b}, poly.edge_tags[k]});
  }
  const auto report = validate(mesh);
  if (!report.ok()) {
    throw GeometryError("triangulation failed validation: " + report.messages.front() + "; " +
                        describe(poly));
  }
  return mesh;
}

TriMesh structured_rectangle(double x0, double x1, double y0, double y1, int nx, int ny) {
  if (nx < 1 || ny < 1 || !(x1 > x0) || !(y1 > y0)) {
    throw ValidationError("structured_rectangle: bad extents or counts");
  }
  TriMesh mesh;
  auto node = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      mesh.vertices.emplace_back(x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny);
    }
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int c = mesh.num_vertices();
      mesh.vertices.emplace_back(x0 + (x1 - x0) * (i + 0.5) / nx, y0 + (y1 - y0) * (j + 0.5) / ny);
      const int a = node(i, j), b = node(i + 1, j), d = node(i + 1, j + 1), e = node(i, j + 1);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({b, d, c});
      mesh.triangles.push_back({d, e, c});
      mesh.triangles.push_back({e, a, c});
    }
  }
  for (int i = 0; i < nx; ++i) {
    mesh.boundary_edges.push_back({{node(i, 0), node(i + 1, 0)}, BoundaryTag::bottom()});
    mesh.boundary_edges.push_back({{node(i + 1, ny), node(i, ny)}, BoundaryTag::top()});
  }
  for (int j = 0; j < ny; ++j) {
    mesh.boundary_edges.push_back({{node(nx, j), node(nx, j + 1)}, BoundaryTag::right()});
    mesh.boundary_edges.push_back({{node(0, j + 1), node(0, j)}, BoundaryTag::left()});
  }
  return mesh;
}

}  // namespace pitmesh::geom
