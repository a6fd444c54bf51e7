#include "pitmesh/front_motion.hpp"

#include "pitmesh/crystal.hpp"
#include "pitmesh/electrochem.hpp"
#include "pitmesh/error.hpp"
#include "pitmesh/log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_map>

namespace pitmesh::front {
namespace {

constexpr double kMetersToMicrons = 1.0e6;

int find_boundary_edge(const TriMesh& mesh, int a, int b) {
  for (int i = 0; i < static_cast<int>(mesh.boundary_edges.size()); ++i) {
    const auto& e = mesh.boundary_edges[i].v;
    if ((e[0] == a && e[1] == b) || (e[0] == b && e[1] == a)) return i;
  }
  return -1;
}

// The other end of the bottom edge at a corner, if any.
int bottom_neighbour(const TriMesh& mesh, int corner) {
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag.kind != BoundaryKind::Bottom) continue;
    if (e.v[0] == corner) return e.v[1];
    if (e.v[1] == corner) return e.v[0];
  }
  return -1;
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Re-seats the left or right corner of a chain.
CornerCase seat_corner(TriMesh& mesh, PitChain& chain, bool left, double tol) {
  const int n = chain.size();
  const int c = left ? chain.vertices[0] : chain.vertices[n - 1];
  const int v1 = left ? chain.vertices[1] : chain.vertices[n - 2];
  const int v2 = left ? chain.vertices[2] : chain.vertices[n - 3];
  Vec2& pc = mesh.vertices[c];
  const Vec2 p1 = mesh.vertices[v1];
  const auto hit = surface_intersection(mesh.vertices[v2], p1);
  if (!hit) {
    log::warn("corner ", c, ": wall edge is parallel to the surface, projecting vertically");
    pc = Vec2(p1.x(), 0.0);
    return CornerCase::Projected;
  }
  const Vec2 q = *hit;
  const Vec2 shift = q - pc;
  if (shift.norm() == 0.0) return CornerCase::Unchanged;
  const int b = bottom_neighbour(mesh, c);
  if (b >= 0) {
    const Vec2 along = mesh.vertices[b] - pc;
    const double proj = shift.dot(along);
    const bool toward_b = proj > 0.0;
    const bool past_middle = proj > 0.5 * along.squaredNorm();
    if (toward_b && (shift.norm() > tol || past_middle)) {
      const int idx = find_boundary_edge(mesh, c, b);
      mesh.boundary_edges[idx].tag = BoundaryTag::pit(chain.pit_id);
      pc = 0.5 * (p1 + q);
      mesh.vertices[b] = q;
      if (left) {
        chain.vertices.insert(chain.vertices.begin(), b);
      } else {
        chain.vertices.push_back(b);
      }
      return CornerCase::Absorbed;
    }
  }
  pc = q;
  return CornerCase::Slid;
}

// Moves chain vertices that the descending apex has overtaken, or come within
// min_gap of, onto the segment between the apex and the first vertex clear of it.
int relocate_consumed(TriMesh& mesh, const PitChain& chain, int apex_idx, int step,
                      double min_gap) {
  const Vec2 apex = mesh.vertices[chain.vertices[apex_idx]];
  const int last = step < 0 ? 0 : chain.size() - 1;
  int j = apex_idx + step;
  std::vector<int> consumed;
  while (j != last) {
    const Vec2& q = mesh.vertices[chain.vertices[j]];
    const double reach = min_gap * static_cast<double>(consumed.size() + 1);
    if (!(q.y() > apex.y()) && (q - apex).norm() >= reach) break;
    consumed.push_back(chain.vertices[j]);
    j += step;
  }
  if (consumed.empty()) return 0;
  const Vec2 anchor = mesh.vertices[chain.vertices[j]];
  const double m = static_cast<double>(consumed.size()) + 1.0;
  for (std::size_t i = 0; i < consumed.size(); ++i) {
    mesh.vertices[consumed[i]] = apex + (anchor - apex) * (static_cast<double>(i + 1) / m);
  }
  return static_cast<int>(consumed.size());
}

bool all_cells_positive(const TriMesh& mesh) { return count_inverted(mesh) == 0; }

double angle_at(const Vec2& at, const Vec2& a, const Vec2& b) {
  const Vec2 u = a - at;
  const Vec2 v = b - at;
  return std::atan2(std::abs(cross(u, v)), u.dot(v));
}

}  // namespace

void FrontParams::validate() const {
  if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
  if (!(corner_close_factor > 0.0)) throw ValidationError("corner_close_factor must be > 0");
  if (!(merge_gap_tol > 0.0)) throw ValidationError("merge_gap_tol must be > 0");
  if (!(cfl > 0.0)) throw ValidationError("cfl must be > 0");
}

double corner_close_tolerance(const TriMesh& mesh, const PitChain& chain, const FrontParams& p) {
  double total = 0.0;
  for (int k = 0; k + 1 < chain.size(); ++k) {
    total += (mesh.vertices[chain.vertices[k + 1]] - mesh.vertices[chain.vertices[k]]).norm();
  }
  return p.corner_close_factor * total / std::max(1, chain.size() - 1);
}

std::vector<double> vertex_speeds(const TriMesh& mesh, const PitChain& chain,
                                  const Eigen::VectorXd& phi, const fem::PitFluxModel& model,
                                  const SpeedOverride& override_speed) {
  const auto normals = vertex_normals(mesh, chain);
  std::vector<double> speeds(chain.vertices.size());
  for (int k = 0; k < chain.size(); ++k) {
    const int v = chain.vertices[k];
    const Vec2& x = mesh.vertices[v];
    if (override_speed) {
      speeds[k] = override_speed(v, x, normals[k]);
      continue;
    }
    const double vc = crystal::vcorr(model.material, model.vcorr, x, normals[k]);
    speeds[k] = electrochem::normal_velocity(model.electro, vc, phi[v]) * kMetersToMicrons;
  }
  return speeds;
}

double stable_dt(const TriMesh& mesh, std::span<const PitChain> chains,
                 const Eigen::VectorXd& phi, const fem::PitFluxModel& model, const FrontParams& p,
                 const SpeedOverride& override_speed) {
  double min_edge = std::numeric_limits<double>::infinity();
  double max_speed = 0.0;
  for (const auto& chain : chains) {
    for (int k = 0; k + 1 < chain.size(); ++k) {
      min_edge = std::min(
          min_edge, (mesh.vertices[chain.vertices[k + 1]] - mesh.vertices[chain.vertices[k]]).norm());
    }
    for (double s : vertex_speeds(mesh, chain, phi, model, override_speed)) {
      max_speed = std::max(max_speed, std::abs(s));
    }
  }
  if (max_speed == 0.0) return std::numeric_limits<double>::infinity();
  return p.cfl * min_edge / max_speed;
}

std::optional<Vec2> surface_intersection(const Vec2& inner, const Vec2& outer) {
  const Vec2 d = outer - inner;
  if (std::abs(d.y()) <= 1e-12 * d.norm()) return std::nullopt;
  const double s = -outer.y() / d.y();
  return Vec2(outer.x() + s * d.x(), 0.0);
}

CornerUpdate update_corners(TriMesh& mesh, PitChain& chain, const FrontParams& p,
                            std::optional<double> close_tol) {
  if (chain.size() < 3) {
    throw GeometryError("update_corners: pit " + std::to_string(chain.pit_id) +
                        " needs at least 3 vertices");
  }
  const double tol = close_tol ? *close_tol : corner_close_tolerance(mesh, chain, p);
  CornerUpdate out;
  out.left = seat_corner(mesh, chain, true, tol);
  out.right = seat_corner(mesh, chain, false, tol);
  return out;
}

std::optional<Vec2> apex_from_walls(const Vec2& l2, const Vec2& l1, const Vec2& r2, const Vec2& r1,
                                    double min_angle_deg) {
  const Vec2 dl = l1 - l2;
  const Vec2 dr = r1 - r2;
  const double denom = cross(dl, dr);
  const double sin_angle = std::abs(denom) / (dl.norm() * dr.norm());
  if (!(sin_angle >= std::sin(min_angle_deg * std::numbers::pi / 180.0))) return std::nullopt;
  const double s = cross(r1 - l1, dr) / denom;
  return l1 + s * dl;
}

Vec2 track_apex(const TriMesh& mesh, const PitChain& chain, const Vec2& fallback_shift) {
  if (!chain.apex) throw GeometryError("track_apex: chain has no apex");
  const auto it = std::find(chain.vertices.begin(), chain.vertices.end(), *chain.apex);
  if (it == chain.vertices.end()) throw GeometryError("track_apex: apex is not on the chain");
  const int k = static_cast<int>(it - chain.vertices.begin());
  const Vec2 old = mesh.vertices[*chain.apex];
  Vec2 next = old + fallback_shift;
  if (k >= 2 && k + 2 < chain.size()) {
    const auto& x = mesh.vertices;
    const auto& cv = chain.vertices;
    const auto hit = apex_from_walls(x[cv[k - 2]], x[cv[k - 1]], x[cv[k + 2]], x[cv[k + 1]]);
    if (hit) {
      next = *hit;
    } else {
      log::warn("apex walls are nearly parallel; advancing the apex with its neighbours");
    }
  }
  next.y() = std::min(next.y(), old.y());
  return next;
}

AdvanceReport advance_pit(TriMesh& mesh, PitChain& chain, const Eigen::VectorXd& phi,
                          const fem::PitFluxModel& model, const FrontParams& p, double dt,
                          const SpeedOverride& override_speed) {
  if (chain.size() < 3) throw GeometryError("advance_pit: chain too short");
  const auto normals = vertex_normals(mesh, chain);
  const auto speeds = vertex_speeds(mesh, chain, phi, model, override_speed);
  const double tol = corner_close_tolerance(mesh, chain, p);
  AdvanceReport rep;
  rep.max_speed = *std::max_element(speeds.begin(), speeds.end());
  rep.min_speed = *std::min_element(speeds.begin(), speeds.end());

  const int n = chain.size();
  int apex_idx = -1;
  std::vector<Vec2> before(n);
  for (int k = 0; k < n; ++k) before[k] = mesh.vertices[chain.vertices[k]];
  for (int k = 1; k + 1 < n; ++k) {
    const int v = chain.vertices[k];
    if (chain.apex && v == *chain.apex) {
      apex_idx = k;
      continue;
    }
    mesh.vertices[v] += dt * speeds[k] * normals[k];
  }
  if (apex_idx >= 0) {
    const Vec2 shift = 0.5 * ((mesh.vertices[chain.vertices[apex_idx - 1]] - before[apex_idx - 1]) +
                              (mesh.vertices[chain.vertices[apex_idx + 1]] - before[apex_idx + 1]));
    mesh.vertices[*chain.apex] = track_apex(mesh, chain, shift);
    const auto& cv = chain.vertices;
    if (apex_idx >= 2 && apex_idx + 2 < n &&
        !apex_from_walls(mesh.vertices[cv[apex_idx - 2]], mesh.vertices[cv[apex_idx - 1]],
                         mesh.vertices[cv[apex_idx + 2]], mesh.vertices[cv[apex_idx + 1]])) {
      rep.apex_fallback = true;
    }
    const double min_gap = 0.5 * tol / p.corner_close_factor;
    rep.consumed_vertices += relocate_consumed(mesh, chain, apex_idx, -1, min_gap);
    rep.consumed_vertices += relocate_consumed(mesh, chain, apex_idx, +1, min_gap);
  }
  rep.corners = update_corners(mesh, chain, p, tol);

  const std::vector<PitChain> one{chain};
  const auto problems = front_problems(mesh, one);
  if (!problems.empty()) {
    std::ostringstream os;
    os << "pit " << chain.pit_id << " front is invalid after advancing by dt = " << dt
       << " s: " << problems.front() << " (try a smaller dt)";
    throw GeometryError(os.str());
  }
  return rep;
}

std::vector<std::string> front_problems(const TriMesh& mesh, std::span<const PitChain> chains) {
  std::vector<std::string> out;
  const auto& x = mesh.vertices;
  for (const auto& chain : chains) {
    const int n = chain.size();
    for (int k = 0; k < n; ++k) {
      const Vec2& p = x[chain.vertices[k]];
      const bool corner = k == 0 || k == n - 1;
      if (corner && std::abs(p.y()) > 1e-9) {
        out.push_back("corner " + std::to_string(chain.vertices[k]) + " left the surface y = 0");
      }
      if (!corner && p.y() > 0.0) {
        out.push_back("vertex " + std::to_string(chain.vertices[k]) + " rose above y = 0");
      }
    }
    for (int a = 0; a + 1 < n; ++a) {
      for (int b = a + 2; b + 1 < n; ++b) {
        if (segments_intersect(x[chain.vertices[a]], x[chain.vertices[a + 1]],
                               x[chain.vertices[b]], x[chain.vertices[b + 1]])) {
          out.push_back("pit " + std::to_string(chain.pit_id) + " edges " + std::to_string(a) +
                        " and " + std::to_string(b) + " intersect");
        }
      }
    }
  }
  for (std::size_t i = 0; i < chains.size(); ++i) {
    for (std::size_t j = i + 1; j < chains.size(); ++j) {
      const auto& ci = chains[i].vertices;
      const auto& cj = chains[j].vertices;
      for (std::size_t a = 0; a + 1 < ci.size(); ++a) {
        for (std::size_t b = 0; b + 1 < cj.size(); ++b) {
          if (segments_intersect(x[ci[a]], x[ci[a + 1]], x[cj[b]], x[cj[b + 1]])) {
            out.push_back("pits " + std::to_string(chains[i].pit_id) + " and " +
                          std::to_string(chains[j].pit_id) + " cross");
          }
        }
      }
    }
  }
  return out;
}

std::optional<MergeDescriptor> detect_merge(const TriMesh& mesh, std::span<const PitChain> chains,
                                            const FrontParams& p) {
  std::unordered_map<int, int> right_corner_of, left_corner_of;
  for (const auto& c : chains) {
    right_corner_of[c.right_corner()] = c.pit_id;
    left_corner_of[c.left_corner()] = c.pit_id;
  }
  std::optional<MergeDescriptor> best;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag.kind != BoundaryKind::Bottom) continue;
    for (int flip = 0; flip < 2; ++flip) {
      const int a = e.v[flip];
      const int b = e.v[1 - flip];
      auto ra = right_corner_of.find(a);
      auto lb = left_corner_of.find(b);
      if (ra == right_corner_of.end() || lb == left_corner_of.end()) continue;
      if (ra->second == lb->second) continue;
      const double gap = (mesh.vertices[a] - mesh.vertices[b]).norm();
      if (gap >= p.merge_gap_tol) continue;
      if (!best || gap < best->gap) best = MergeDescriptor{{a, b}, ra->second, lb->second, gap};
    }
  }
  return best;
}

MergeResult merge_pits(TriMesh& mesh, std::vector<PitChain>& chains, const MergeDescriptor& merge) {
  const int a = merge.edge[0];
  const int b = merge.edge[1];
  const PitChain* left = nullptr;
  const PitChain* right = nullptr;
  for (const auto& c : chains) {
    if (c.pit_id == merge.left_pit) left = &c;
    if (c.pit_id == merge.right_pit) right = &c;
  }
  if (!left || !right || left->right_corner() != a || right->left_corner() != b ||
      left->size() < 2 || right->size() < 2) {
    throw GeometryError("merge_pits: descriptor does not match the current pit chains");
  }
  const int edge_idx = find_boundary_edge(mesh, a, b);
  if (edge_idx < 0) throw GeometryError("merge_pits: gap edge is not a boundary edge");

  int third = -1;
  for (const auto& t : mesh.triangles) {
    for (int i = 0; i < 3; ++i) {
      const int u = t[i], w = t[(i + 1) % 3];
      if ((u == a && w == b) || (u == b && w == a)) third = t[(i + 2) % 3];
    }
  }
  if (third < 0) throw GeometryError("merge_pits: no cell owns the gap edge");

  const Vec2 pa = mesh.vertices[a];
  const Vec2 pb = mesh.vertices[b];
  const Vec2 apex = 0.5 * (pa + pb);
  const int a_wall = left->vertices[left->size() - 2];
  const int b_wall = right->vertices[1];
  const double angle_a = angle_at(pa, pb, mesh.vertices[third]);
  const double angle_b = angle_at(pb, pa, mesh.vertices[third]);

  // First try: the larger-angle endpoint becomes the apex and the other one
  // moves halfway towards its wall neighbour.
  struct Choice {
    int to_apex, moved, wall;
  };
  const Choice first = angle_a >= angle_b ? Choice{a, b, b_wall} : Choice{b, a, a_wall};
  const Choice second = angle_a >= angle_b ? Choice{b, a, a_wall} : Choice{a, b, b_wall};
  MergeResult result;
  bool placed = false;
  for (const Choice& ch : {first, second}) {
    mesh.vertices[ch.to_apex] = apex;
    mesh.vertices[ch.moved] = 0.5 * (apex + mesh.vertices[ch.wall]);
    if (all_cells_positive(mesh)) {
      result = {ch.to_apex, ch.moved};
      placed = true;
      break;
    }
    mesh.vertices[a] = pa;
    mesh.vertices[b] = pb;
  }
  if (!placed) {
    throw GeometryError("merging pits " + std::to_string(merge.left_pit) + " and " +
                        std::to_string(merge.right_pit) +
                        " would invert cells whichever gap vertex moves; reduce merge_gap_tol");
  }

  std::set<int> apexes{result.apex};
  for (const auto& c : chains) {
    if (c.apex) apexes.insert(*c.apex);
  }
  const int keep = std::min(merge.left_pit, merge.right_pit);
  const int drop = std::max(merge.left_pit, merge.right_pit);
  mesh.boundary_edges[edge_idx].tag = BoundaryTag::pit(keep);
  for (auto& e : mesh.boundary_edges) {
    if (e.tag.is_pit() && e.tag.pit_id == drop) e.tag.pit_id = keep;
  }
  chains = chains_from_tags(mesh);
  for (auto& c : chains) {
    for (int v : c.vertices) {
      if (apexes.count(v) && v != c.left_corner() && v != c.right_corner()) {
        if (!c.apex || v == result.apex) c.apex = v;
      }
    }
  }
  log::info("merged pits ", merge.left_pit, " and ", merge.right_pit, " across a gap of ",
            merge.gap, " um; apex vertex ", result.apex);
  return result;
}

double pit_area(const TriMesh& mesh, const PitChain& chain) {
  std::vector<Vec2> poly;
  poly.reserve(chain.vertices.size());
  for (int v : chain.vertices) poly.push_back(mesh.vertices[v]);
  return std::abs(polygon_area(poly));
}

}  // namespace pitmesh::front
