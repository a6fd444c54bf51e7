#include "pitmesh/mesh_adapt.hpp"

#include "pitmesh/error.hpp"
#include "pitmesh/log.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

namespace pitmesh::adapt {
namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

Mat2 edges_of(const std::array<Vec2, 3>& p) {
  Mat2 e;
  e.col(0) = p[1] - p[0];
  e.col(1) = p[2] - p[0];
  return e;
}

std::array<Vec2, 3> cell_points(const std::vector<Vec2>& x, const Triangle& t) {
  return {x[t[0]], x[t[1]], x[t[2]]};
}

Vec6 element_vertex_gradient(const std::array<Vec2, 3>& p, const Mat2& metric,
                             const AdaptParams& params) {
  const Mat2 g = element_energy_gradient(edges_of(p), metric, params);
  Vec6 out;
  out.segment<2>(2) = g.col(0);
  out.segment<2>(4) = g.col(1);
  out.segment<2>(0) = -(g.col(0) + g.col(1));
  return out;
}

// Central differences of the analytic element gradient, symmetrized.
Mat6 element_hessian(const std::array<Vec2, 3>& p, const Mat2& metric, const AdaptParams& params) {
  const double scale = std::sqrt(std::abs(edges_of(p).determinant()));
  const double eps = 1e-5 * scale;
  Mat6 h;
  for (int k = 0; k < 6; ++k) {
    auto plus = p;
    auto minus = p;
    plus[k / 2][k % 2] += eps;
    minus[k / 2][k % 2] -= eps;
    h.col(k) = (element_vertex_gradient(plus, metric, params) -
                element_vertex_gradient(minus, metric, params)) /
               (2.0 * eps);
  }
  return 0.5 * (h + h.transpose());
}

double energy_at(const TriMesh& mesh, const std::vector<Vec2>& x, const std::vector<Mat2>& cell_m,
                 const AdaptParams& p) {
  double total = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Mat2 e = edges_of(cell_points(x, mesh.triangles[c]));
    if (!(e.determinant() > 0.0)) {
      throw InvertedElementError(c, "inverted element: cell " + std::to_string(c));
    }
    total += element_energy(e, cell_m[c], p);
  }
  return total;
}

bool all_positive(const TriMesh& mesh, const std::vector<Vec2>& x) {
  for (const auto& t : mesh.triangles) {
    if (!(signed_area(x[t[0]], x[t[1]], x[t[2]]) > 0.0)) return false;
  }
  return true;
}

std::vector<Mat2> cell_metrics(const TriMesh& mesh, const MetricField& metric) {
  std::vector<Mat2> out(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) out[c] = cell_metric(mesh, metric, c);
  return out;
}

void check_metric(const TriMesh& mesh, const MetricField& metric) {
  if (metric.size() != mesh.num_vertices()) {
    throw ValidationError("metric has " + std::to_string(metric.size()) + " tensors for " +
                          std::to_string(mesh.num_vertices()) + " vertices");
  }
}

}  // namespace

void AdaptParams::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError(what); };
  if (!(mu1 >= 0.0)) fail("mu1 must be >= 0");
  if (!(mu2 >= 0.0)) fail("mu2 must be >= 0");
  if (!(tau > 0.0)) fail("tau must be > 0");
  if (!(theta > 0.0 && theta < 0.5)) fail("theta must lie in (0, 1/2)");
  if (!(gamma > 1.0)) fail("gamma must be > 1");
  if (!(smoothing_tol > 0.0)) fail("smoothing_tol must be > 0");
  if (smoothing_max_iters < 1) fail("smoothing_max_iters must be >= 1");
  if (!(smoothing_interval > 0.0)) fail("smoothing_interval must be > 0");
}

MetricField identity_metric(int num_vertices) {
  return MetricField{std::vector<Mat2>(num_vertices, Mat2::Identity())};
}

double mackenzie_value(double distance, const AdaptParams& p) {
  if (!std::isfinite(distance)) return 1.0;
  return 1.0 + p.mu1 / std::sqrt(p.mu2 * p.mu2 * distance * distance + 1.0);
}

MetricField monitor_mackenzie(const TriMesh& mesh, std::span<const PitChain> chains,
                              const AdaptParams& p) {
  MetricField m;
  m.tensors.resize(mesh.vertices.size());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const double d = chains.empty() ? std::numeric_limits<double>::infinity()
                                    : min_distance_to_pit(mesh.vertices[v], chains, mesh);
    m.tensors[v] = mackenzie_value(d, p) * Mat2::Identity();
  }
  return m;
}

Mat2 cell_metric(const TriMesh& mesh, const MetricField& metric, int cell) {
  const auto& t = mesh.triangles[cell];
  return (metric.tensors[t[0]] + metric.tensors[t[1]] + metric.tensors[t[2]]) / 3.0;
}

Mat2 reference_edges(const AdaptParams& p) {
  if (!p.equilateral_reference) return Mat2::Identity();
  Mat2 e;
  e << 1.0, 0.5, 0.0, std::sqrt(3.0) / 2.0;
  return e;
}

double element_energy(const Mat2& edges, const Mat2& metric, const AdaptParams& p) {
  const double det_e = edges.determinant();
  if (!(det_e > 0.0)) throw InvertedElementError(-1, "inverted element in energy evaluation");
  const Mat2 ref = reference_edges(p);
  const double det_ref = ref.determinant();
  const double s = std::sqrt(metric.determinant());
  const Mat2 e_inv = edges.inverse();
  const double tr = (e_inv * metric.inverse() * e_inv.transpose() * ref.transpose() * ref).trace();
  const double g = p.gamma;
  const double det_j = det_ref / det_e;
  return 0.5 * det_e * s *
         (p.theta * std::pow(tr, g) + (1.0 - 2.0 * p.theta) * std::pow(2.0, g) *
                                          std::pow(det_j / s, g));
}

Mat2 element_energy_gradient(const Mat2& edges, const Mat2& metric, const AdaptParams& p) {
  const double det_e = edges.determinant();
  if (!(det_e > 0.0)) throw InvertedElementError(-1, "inverted element in gradient evaluation");
  const Mat2 ref = reference_edges(p);
  const Mat2 b = ref.transpose() * ref;
  const double det_ref = ref.determinant();
  const double s = std::sqrt(metric.determinant());
  const Mat2 a = metric.inverse();
  const Mat2 e_inv = edges.inverse();
  const Mat2 e_inv_t = e_inv.transpose();
  const double tr = (e_inv * a * e_inv_t * b).trace();
  const Mat2 dtr = -2.0 * e_inv_t * b * e_inv * a * e_inv_t;
  const double g = p.gamma;
  const Mat2 shape = p.theta * det_e * (std::pow(tr, g) * e_inv_t + g * std::pow(tr, g - 1.0) * dtr);
  const double size_coef = (1.0 - 2.0 * p.theta) * std::pow(2.0, g) * std::pow(s, -g) *
                           std::pow(det_ref, g) * (1.0 - g) * std::pow(det_e, 1.0 - g);
  return 0.5 * s * (shape + size_coef * e_inv_t);
}

double energy(const TriMesh& mesh, const MetricField& metric, const AdaptParams& p) {
  check_metric(mesh, metric);
  return energy_at(mesh, mesh.vertices, cell_metrics(mesh, metric), p);
}

std::vector<Vec2> grad_energy(const TriMesh& mesh, const MetricField& metric,
                              const AdaptParams& p) {
  check_metric(mesh, metric);
  std::vector<Vec2> grad(mesh.vertices.size(), Vec2::Zero());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.triangles[c];
    const auto pts = cell_points(mesh.vertices, t);
    Vec6 g;
    try {
      g = element_vertex_gradient(pts, cell_metric(mesh, metric, c), p);
    } catch (const InvertedElementError&) {
      throw InvertedElementError(c, "inverted element: cell " + std::to_string(c));
    }
    for (int k = 0; k < 3; ++k) grad[t[k]] += g.segment<2>(2 * k);
  }
  return grad;
}

std::vector<VertexMotion> classify_vertices(const TriMesh& mesh,
                                            std::span<const PitChain> chains) {
  const int n = mesh.num_vertices();
  std::vector<char> slide_x(n, 0), slide_y(n, 0), fixed(n, 0);
  for (const auto& e : mesh.boundary_edges) {
    for (int v : e.v) {
      switch (e.tag.kind) {
        case BoundaryKind::Top:
        case BoundaryKind::Bottom: slide_x[v] = 1; break;
        case BoundaryKind::Left:
        case BoundaryKind::Right: slide_y[v] = 1; break;
        case BoundaryKind::Pit: fixed[v] = 1; break;
      }
    }
  }
  for (const auto& chain : chains) {
    for (int v : chain.vertices) fixed[v] = 1;
  }
  std::vector<VertexMotion> motion(n, VertexMotion::Free);
  for (int v = 0; v < n; ++v) {
    if (fixed[v] || (slide_x[v] && slide_y[v])) {
      motion[v] = VertexMotion::Fixed;
    } else if (slide_x[v]) {
      motion[v] = VertexMotion::SlideX;
    } else if (slide_y[v]) {
      motion[v] = VertexMotion::SlideY;
    }
  }
  return motion;
}

namespace {

// What the integrator needs from an energy: its value at trial positions
// and, per cell, the vertex gradient with a Hessian approximation.
struct EnergyModel {
  std::function<double(const std::vector<Vec2>&)> total;
  std::function<void(const std::vector<Vec2>&, const std::function<void(int, const Vec6&, const Mat6&)>&)>
      cells;
  std::vector<double> mobility_per_vertex;  // P_i = det(M_i)^(1/4)
};

std::vector<Vec2> integrate(const TriMesh& mesh, std::span<const VertexMotion> motion,
                            const EnergyModel& model, const AdaptParams& p, double dt_interval,
                            MmpdeReport* report, const MmpdeSettings& settings) {
  p.validate();
  if (static_cast<int>(motion.size()) != mesh.num_vertices()) {
    throw ValidationError("mmpde_step: motion constraints do not match the vertex count");
  }
  if (!(dt_interval > 0.0)) throw ValidationError("mmpde_step: interval must be > 0");

  const int nv = mesh.num_vertices();
  // Free coordinate numbering: dof[2 v + c] is -1 for a constrained coordinate.
  std::vector<int> dof(2 * nv, -1);
  int nf = 0;
  for (int v = 0; v < nv; ++v) {
    if (motion[v] == VertexMotion::Free || motion[v] == VertexMotion::SlideX) dof[2 * v] = nf++;
    if (motion[v] == VertexMotion::Free || motion[v] == VertexMotion::SlideY) dof[2 * v + 1] = nf++;
  }

  Eigen::VectorXd mobility(nf);  // P_i / tau per free coordinate
  for (int v = 0; v < nv; ++v) {
    for (int c = 0; c < 2; ++c) {
      if (dof[2 * v + c] >= 0) mobility[dof[2 * v + c]] = model.mobility_per_vertex[v] / p.tau;
    }
  }

  std::vector<Vec2> x = mesh.vertices;
  MmpdeReport rep;
  double e_cur = model.total(x);
  rep.energy_before = e_cur;

  if (nf == 0) {
    rep.energy_after = e_cur;
    rep.time_integrated = dt_interval;
    rep.stationary = true;
    if (report) *report = rep;
    return x;
  }

  // Shortest incident edge per vertex bounds how far one substep may move it.
  auto local_edges = [&](const std::vector<Vec2>& pts) {
    std::vector<double> len(nv, std::numeric_limits<double>::infinity());
    for (const auto& t : mesh.triangles) {
      for (int k = 0; k < 3; ++k) {
        const int a = t[k], b = t[(k + 1) % 3];
        const double l = (pts[a] - pts[b]).norm();
        len[a] = std::min(len[a], l);
        len[b] = std::min(len[b], l);
      }
    }
    return len;
  };

  Eigen::VectorXd grad(nf);
  Eigen::SparseMatrix<double> hess(nf, nf);
  std::vector<double> edge_len;
  std::vector<Eigen::Triplet<double>> trips;
  auto linearize = [&]() {
    grad.setZero();
    trips.clear();
    trips.reserve(36 * mesh.triangles.size());
    model.cells(x, [&](int c, const Vec6& g, const Mat6& h) {
      const auto& t = mesh.triangles[c];
      for (int i = 0; i < 6; ++i) {
        const int di = dof[2 * t[i / 2] + i % 2];
        if (di < 0) continue;
        grad[di] += g[i];
        for (int j = 0; j < 6; ++j) {
          const int dj = dof[2 * t[j / 2] + j % 2];
          if (dj >= 0) trips.emplace_back(di, dj, h(i, j));
        }
      }
    });
    hess.setFromTriplets(trips.begin(), trips.end());
    edge_len = local_edges(x);
  };
  linearize();

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::SparseMatrix<double> system(nf, nf);
  bool pattern_ready = false;
  double t = 0.0;
  double h = dt_interval / 16.0;
  const double h_floor = settings.min_step_fraction * dt_interval;
  const double e_slack = 1e-12;

  while (t < dt_interval * (1.0 - 1e-12) && rep.substeps < settings.max_substeps) {
    h = std::min(h, dt_interval - t);
    if (h < h_floor) {
      std::ostringstream os;
      os << "mmpde_step: substep fell below " << h_floor << " s after " << rep.rejected
         << " rejections";
      throw GeometryError(os.str());
    }
    // (diag(tau / (P h)) + H) delta = -g, the linearly implicit Euler update.
    system = hess;
    for (int i = 0; i < nf; ++i) system.coeffRef(i, i) += 1.0 / (mobility[i] * h);
    if (!pattern_ready) {
      ldlt.analyzePattern(system);
      pattern_ready = true;
    }
    ldlt.factorize(system);
    bool ok = ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0;
    Eigen::VectorXd delta;
    if (ok) {
      delta = ldlt.solve(-grad);
      ok = delta.allFinite();
    }
    std::vector<Vec2> trial;
    double max_move = 0.0;
    if (ok) {
      trial = x;
      for (int v = 0; v < nv && ok; ++v) {
        Vec2 d = Vec2::Zero();
        for (int c = 0; c < 2; ++c) {
          if (dof[2 * v + c] >= 0) d[c] = delta[dof[2 * v + c]];
        }
        const double m = d.norm();
        if (m > settings.max_move_fraction * edge_len[v]) ok = false;
        max_move = std::max(max_move, m);
        trial[v] += d;
      }
    }
    double e_trial = 0.0;
    if (ok) ok = all_positive(mesh, trial);
    if (ok) {
      e_trial = model.total(trial);
      ok = e_trial <= e_cur + e_slack * std::abs(e_cur);
    }
    if (!ok) {
      ++rep.rejected;
      h *= 0.5;
      continue;
    }
    x = std::move(trial);
    e_cur = e_trial;
    t += h;
    ++rep.substeps;
    if (max_move < settings.stationary_displacement) {
      rep.stationary = true;
      break;
    }
    h *= 2.0;
    linearize();
  }

  rep.energy_after = e_cur;
  rep.time_integrated = rep.stationary ? dt_interval : t;
  for (int v = 0; v < nv; ++v) {
    rep.max_displacement = std::max(rep.max_displacement, (x[v] - mesh.vertices[v]).norm());
  }
  log::debug("mmpde_step: ", rep.substeps, " substeps, ", rep.rejected, " rejected, energy ",
             rep.energy_before, " -> ", rep.energy_after);
  if (report) *report = rep;
  return x;
}

EnergyModel frozen_model(const TriMesh& mesh, const MetricField& metric, const AdaptParams& p) {
  auto cell_m = std::make_shared<std::vector<Mat2>>(cell_metrics(mesh, metric));
  EnergyModel model;
  model.total = [&mesh, cell_m, &p](const std::vector<Vec2>& x) {
    return energy_at(mesh, x, *cell_m, p);
  };
  model.cells = [&mesh, cell_m, &p](const std::vector<Vec2>& x, const auto& sink) {
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto pts = cell_points(x, mesh.triangles[c]);
      sink(c, element_vertex_gradient(pts, (*cell_m)[c], p),
           element_hessian(pts, (*cell_m)[c], p));
    }
  };
  model.mobility_per_vertex.resize(mesh.vertices.size());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    model.mobility_per_vertex[v] = std::pow(metric.tensors[v].determinant(), 0.25);
  }
  return model;
}

// With M = m I the element energy is m^(1 - gamma) times its value for the
// identity metric, which gives the monitor term of the gradient in closed form.
struct PositionalCell {
  double energy = 0.0;
  Vec6 grad = Vec6::Zero();
  double m = 1.0;
};

PositionalCell positional_cell(const std::array<Vec2, 3>& pts, const std::array<double, 3>& mv,
                               const std::array<Vec2, 3>& dmv, const AdaptParams& p) {
  PositionalCell out;
  out.m = (mv[0] + mv[1] + mv[2]) / 3.0;
  const Mat2 ident = Mat2::Identity();
  const double e1 = element_energy(edges_of(pts), ident, p);
  const double scale = std::pow(out.m, 1.0 - p.gamma);
  out.energy = scale * e1;
  out.grad = scale * element_vertex_gradient(pts, ident, p);
  const double dscale = (1.0 - p.gamma) * std::pow(out.m, -p.gamma) * e1 / 3.0;
  for (int k = 0; k < 3; ++k) out.grad.segment<2>(2 * k) += dscale * dmv[k];
  return out;
}

std::vector<double> monitor_values(const ScalarMonitor& monitor, const std::vector<Vec2>& x) {
  std::vector<double> m(x.size());
  for (std::size_t v = 0; v < x.size(); ++v) m[v] = monitor.value(x[v]);
  return m;
}

double positional_energy(const TriMesh& mesh, const std::vector<Vec2>& x,
                         const ScalarMonitor& monitor, const AdaptParams& p) {
  const auto m = monitor_values(monitor, x);
  double total = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.triangles[c];
    const Mat2 e = edges_of(cell_points(x, t));
    if (!(e.determinant() > 0.0)) {
      throw InvertedElementError(c, "inverted element: cell " + std::to_string(c));
    }
    const double mk = (m[t[0]] + m[t[1]] + m[t[2]]) / 3.0;
    total += std::pow(mk, 1.0 - p.gamma) * element_energy(e, Mat2::Identity(), p);
  }
  return total;
}

EnergyModel positional_model(const TriMesh& mesh, const ScalarMonitor& monitor,
                             const AdaptParams& p) {
  EnergyModel model;
  model.total = [&mesh, &monitor, &p](const std::vector<Vec2>& x) {
    return positional_energy(mesh, x, monitor, p);
  };
  // The Hessian keeps the monitor frozen at the current cell averages; the
  // acceptance test on the true energy keeps every substep a descent step.
  model.cells = [&mesh, &monitor, &p](const std::vector<Vec2>& x, const auto& sink) {
    const auto m = monitor_values(monitor, x);
    std::vector<Vec2> dm(x.size());
    for (std::size_t v = 0; v < x.size(); ++v) dm[v] = monitor.gradient(x[v]);
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto& t = mesh.triangles[c];
      const auto pts = cell_points(x, t);
      const auto cell = positional_cell(pts, {m[t[0]], m[t[1]], m[t[2]]},
                                        {dm[t[0]], dm[t[1]], dm[t[2]]}, p);
      sink(c, cell.grad, element_hessian(pts, cell.m * Mat2::Identity(), p));
    }
  };
  model.mobility_per_vertex = monitor_values(monitor, mesh.vertices);
  for (double& v : model.mobility_per_vertex) v = std::sqrt(v);
  return model;
}

}  // namespace

std::vector<Vec2> mmpde_step(const TriMesh& mesh, std::span<const VertexMotion> motion,
                             const MetricField& metric, const AdaptParams& p,
                             double dt_interval, MmpdeReport* report,
                             const MmpdeSettings& settings) {
  check_metric(mesh, metric);
  return integrate(mesh, motion, frozen_model(mesh, metric, p), p, dt_interval, report, settings);
}

std::vector<Vec2> mmpde_step(const TriMesh& mesh, std::span<const PitChain> chains,
                             const MetricField& metric, const AdaptParams& p,
                             double dt_interval, MmpdeReport* report) {
  const auto motion = classify_vertices(mesh, chains);
  return mmpde_step(mesh, motion, metric, p, dt_interval, report);
}

std::vector<Vec2> mmpde_step(const TriMesh& mesh, std::span<const VertexMotion> motion,
                             const ScalarMonitor& monitor, const AdaptParams& p,
                             double dt_interval, MmpdeReport* report,
                             const MmpdeSettings& settings) {
  return integrate(mesh, motion, positional_model(mesh, monitor, p), p, dt_interval, report,
                   settings);
}

std::vector<Vec2> mmpde_step(const TriMesh& mesh, std::span<const PitChain> chains,
                             const ScalarMonitor& monitor, const AdaptParams& p,
                             double dt_interval, MmpdeReport* report) {
  const auto motion = classify_vertices(mesh, chains);
  return mmpde_step(mesh, motion, monitor, p, dt_interval, report);
}

ScalarMonitor mackenzie_monitor(const TriMesh& mesh, std::span<const PitChain> chains,
                                const AdaptParams& p) {
  std::vector<std::pair<Vec2, Vec2>> segments;
  for (const auto& chain : chains) {
    for (int k = 0; k + 1 < chain.size(); ++k) {
      segments.emplace_back(mesh.vertices[chain.vertices[k]], mesh.vertices[chain.vertices[k + 1]]);
    }
  }
  // Nearest point on the pit front, or nothing without a front.
  auto nearest = [segments](const Vec2& x) -> std::optional<Vec2> {
    if (segments.empty()) return std::nullopt;
    double best = std::numeric_limits<double>::infinity();
    Vec2 q = Vec2::Zero();
    for (const auto& [a, b] : segments) {
      const Vec2 ab = b - a;
      const double len2 = ab.squaredNorm();
      const double s = len2 > 0.0 ? std::clamp((x - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
      const Vec2 c = a + s * ab;
      const double d = (x - c).squaredNorm();
      if (d < best) {
        best = d;
        q = c;
      }
    }
    return q;
  };
  ScalarMonitor monitor;
  monitor.value = [nearest, p](const Vec2& x) {
    const auto q = nearest(x);
    return mackenzie_value(q ? (x - *q).norm() : std::numeric_limits<double>::infinity(), p);
  };
  monitor.gradient = [nearest, p](const Vec2& x) -> Vec2 {
    const auto q = nearest(x);
    if (!q) return Vec2::Zero();
    const Vec2 r = x - *q;
    const double d = r.norm();
    if (d == 0.0) return Vec2::Zero();
    const double w = p.mu2 * p.mu2 * d * d + 1.0;
    const double dm = -p.mu1 * p.mu2 * p.mu2 * d / (w * std::sqrt(w));
    return dm * r / d;
  };
  return monitor;
}

MetricField sample(const TriMesh& mesh, const ScalarMonitor& monitor) {
  MetricField m;
  m.tensors.reserve(mesh.vertices.size());
  for (const auto& x : mesh.vertices) m.tensors.push_back(monitor.value(x) * Mat2::Identity());
  return m;
}

double energy(const TriMesh& mesh, const ScalarMonitor& monitor, const AdaptParams& p) {
  return positional_energy(mesh, mesh.vertices, monitor, p);
}

std::vector<Vec2> grad_energy(const TriMesh& mesh, const ScalarMonitor& monitor,
                              const AdaptParams& p) {
  std::vector<Vec2> grad(mesh.vertices.size(), Vec2::Zero());
  const auto m = monitor_values(monitor, mesh.vertices);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.triangles[c];
    PositionalCell cell;
    try {
      cell = positional_cell(cell_points(mesh.vertices, t), {m[t[0]], m[t[1]], m[t[2]]},
                             {monitor.gradient(mesh.vertices[t[0]]),
                              monitor.gradient(mesh.vertices[t[1]]),
                              monitor.gradient(mesh.vertices[t[2]])},
                             p);
    } catch (const InvertedElementError&) {
      throw InvertedElementError(c, "inverted element: cell " + std::to_string(c));
    }
    for (int k = 0; k < 3; ++k) grad[t[k]] += cell.grad.segment<2>(2 * k);
  }
  return grad;
}

SmoothResult smooth_mesh(const TriMesh& mesh, std::span<const PitChain> chains,
                         const AdaptParams& p, const PhysicsCallback& physics, int max_iters) {
  p.validate();
  const int cap = max_iters < 0 ? p.smoothing_max_iters : max_iters;
  const auto motion = classify_vertices(mesh, chains);
  SmoothResult out;
  out.mesh = mesh;
  for (int it = 0; it < cap; ++it) {
    if (physics) physics(out.mesh, chains);
    const ScalarMonitor monitor = mackenzie_monitor(out.mesh, chains, p);
    auto moved = mmpde_step(out.mesh, motion, monitor, p, p.smoothing_interval);
    double sum = 0.0;
    for (int v = 0; v < out.mesh.num_vertices(); ++v) {
      sum += (moved[v] - out.mesh.vertices[v]).norm();
    }
    out.mesh.vertices = std::move(moved);
    out.displacement_trace.push_back(sum);
    out.iterations = it + 1;
    log::info("smoothing iteration ", it + 1, ": displacement sum ", sum);
    if (sum < p.smoothing_tol) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged) {
    log::warn("mesh smoothing stopped after ", out.iterations,
              " iterations without reaching the displacement tolerance");
  }
  return out;
}

}  // namespace pitmesh::adapt
