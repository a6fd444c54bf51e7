#include "pitmesh/pit_analysis.hpp"

#include "pitmesh/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_set>

namespace pitmesh::analysis {
namespace {

double deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace

Dimensions pit_dimensions(const TriMesh& mesh, std::span<const PitChain> chains) {
  Dimensions d;
  for (const auto& chain : chains) {
    for (int v : chain.vertices) d.depth = std::max(d.depth, -mesh.vertices[v].y());
    d.width = std::max(d.width, mesh.vertices[chain.right_corner()].x() -
                                    mesh.vertices[chain.left_corner()].x());
  }
  return d;
}

double radial_deviation(const TriMesh& mesh, const PitChain& chain, const Vec2& center) {
  Eigen::VectorXd r(chain.size());
  for (int k = 0; k < chain.size(); ++k) r[k] = (mesh.vertices[chain.vertices[k]] - center).norm();
  const double mean = r.mean();
  const double var = (r.array() - mean).square().mean();
  return std::sqrt(var) / mean;
}

std::optional<WallFit> fit_wall(const TriMesh& mesh, const PitChain& chain, bool left,
                                double window_deg) {
  const int n = chain.size();
  if (n < 3) return std::nullopt;
  int deepest = 0;
  for (int k = 0; k < n; ++k) {
    if (mesh.vertices[chain.vertices[k]].y() < mesh.vertices[chain.vertices[deepest]].y()) {
      deepest = k;
    }
  }
  const int e_begin = left ? 0 : deepest;
  const int e_end = left ? deepest : n - 1;  // edges [e_begin, e_end)
  if (e_end <= e_begin) return std::nullopt;

  std::vector<double> angle(n - 1), length(n - 1);
  for (int k = 0; k + 1 < n; ++k) {
    const Vec2 t = mesh.vertices[chain.vertices[k + 1]] - mesh.vertices[chain.vertices[k]];
    angle[k] = deg(std::atan2(t.y(), t.x()));
    length[k] = t.norm();
  }
  int best_first = -1, best_last = -1;
  double best_len = 0.0;
  for (int i = e_begin; i < e_end; ++i) {
    double lo = angle[i], hi = angle[i], len = 0.0;
    for (int j = i; j < e_end; ++j) {
      lo = std::min(lo, angle[j]);
      hi = std::max(hi, angle[j]);
      if (hi - lo > window_deg) break;
      len += length[j];
      if (len > best_len) {
        best_len = len;
        best_first = i;
        best_last = j;
      }
    }
  }
  if (best_first < 0) return std::nullopt;

  const int m = best_last - best_first + 2;
  Eigen::MatrixXd pts(m, 2);
  for (int k = 0; k < m; ++k) pts.row(k) = mesh.vertices[chain.vertices[best_first + k]].transpose();
  const Eigen::RowVector2d centroid = pts.colwise().mean();
  const Eigen::MatrixXd centred = pts.rowwise() - centroid;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(centred.transpose() * centred);
  Vec2 dir = es.eigenvectors().col(1);
  if (dir.y() > 0.0) dir = -dir;  // point down into the pit

  WallFit w;
  w.first_edge = best_first;
  w.last_edge = best_last;
  w.length = best_len;
  w.point = centroid.transpose();
  w.direction = dir.normalized();
  w.from_vertical_deg = deg(std::acos(std::min(1.0, std::abs(w.direction.y()))));
  return w;
}

double inter_wall_angle(const TriMesh& mesh, const PitChain& chain, double window_deg) {
  const auto l = fit_wall(mesh, chain, true, window_deg);
  const auto r = fit_wall(mesh, chain, false, window_deg);
  if (!l || !r) throw GeometryError("inter_wall_angle: could not find both pit walls");
  // Both directions point downwards; the walls meet at the angle between
  // the upward rays.
  return deg(std::acos(std::clamp(l->direction.dot(r->direction), -1.0, 1.0)));
}

double mean_edge_length(const TriMesh& mesh) {
  const auto adj = vertex_adjacency(mesh);
  double total = 0.0;
  int count = 0;
  for (int a = 0; a < mesh.num_vertices(); ++a) {
    for (int b : adj[a]) {
      if (b > a) {
        total += (mesh.vertices[a] - mesh.vertices[b]).norm();
        ++count;
      }
    }
  }
  return count ? total / count : 0.0;
}

NearPitEdges near_pit_edges(const TriMesh& mesh, std::span<const PitChain> chains, double radius) {
  std::unordered_set<int> on_chain;
  for (const auto& c : chains) on_chain.insert(c.vertices.begin(), c.vertices.end());
  const auto adj = vertex_adjacency(mesh);
  NearPitEdges out;
  out.min_length = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (int a = 0; a < mesh.num_vertices(); ++a) {
    for (int b : adj[a]) {
      if (b <= a || (on_chain.count(a) && on_chain.count(b))) continue;
      const Vec2 mid = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
      if (min_distance_to_pit(mid, chains, mesh) > radius) continue;
      const double len = (mesh.vertices[a] - mesh.vertices[b]).norm();
      out.min_length = std::min(out.min_length, len);
      total += len;
      ++out.count;
    }
  }
  out.mean_length = out.count ? total / out.count : 0.0;
  return out;
}

double cluster_extent(const TriMesh& mesh, std::span<const PitChain> chains, double fraction,
                      double quantile) {
  std::unordered_set<int> on_chain;
  for (const auto& c : chains) on_chain.insert(c.vertices.begin(), c.vertices.end());
  std::vector<double> d;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (!on_chain.count(v)) d.push_back(min_distance_to_pit(mesh.vertices[v], chains, mesh));
  }
  if (d.empty()) return 0.0;
  std::sort(d.begin(), d.end());
  const std::size_t keep = std::max<std::size_t>(1, static_cast<std::size_t>(fraction * d.size()));
  const std::size_t idx = std::min(keep - 1, static_cast<std::size_t>(quantile * (keep - 1) + 0.5));
  return d[idx];
}

double equidistribution_spread(const TriMesh& mesh, const adapt::MetricField& metric) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double v =
        cell_signed_area(mesh, c) * std::sqrt(adapt::cell_metric(mesh, metric, c).determinant());
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi / lo;
}

}  // namespace pitmesh::analysis
