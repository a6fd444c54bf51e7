#pragma once

#include "pitmesh/mesh.hpp"

#include <functional>
#include <span>
#include <vector>

namespace pitmesh::adapt {

struct AdaptParams {
  double mu1 = 100.0;
  double mu2 = 1.0;
  double tau = 1e-5;  // seconds
  double theta = 1.0 / 3.0;
  double gamma = 1.5;
  double smoothing_tol = 1e-2;  // micrometers, summed over vertices
  int smoothing_max_iters = 40;
  // Pseudo-time integrated by one smoothing iteration.
  double smoothing_interval = 0.5;
  // Reference element of the functional: unit-edge equilateral (default)
  // or the right triangle (0,0),(1,0),(0,1).
  bool equilateral_reference = true;

  void validate() const;
};

// Per-vertex symmetric positive definite tensors.
struct MetricField {
  std::vector<Mat2> tensors;

  int size() const { return static_cast<int>(tensors.size()); }
};

MetricField identity_metric(int num_vertices);

// M(x) = (1 + mu1 / sqrt(mu2^2 d^2 + 1)) I with d the distance to the
// nearest pit segment, sampled at the vertices.
double mackenzie_value(double distance, const AdaptParams& p);
MetricField monitor_mackenzie(const TriMesh& mesh, std::span<const PitChain> chains,
                              const AdaptParams& p);

// Isotropic monitor M(x) = m(x) I evaluated wherever the vertices currently
// are, so a vertex that moves also changes the metric it sees.
struct ScalarMonitor {
  std::function<double(const Vec2&)> value;
  std::function<Vec2(const Vec2&)> gradient;
};

// The MacKenzie monitor of the chains' current geometry.
ScalarMonitor mackenzie_monitor(const TriMesh& mesh, std::span<const PitChain> chains,
                                const AdaptParams& p);
MetricField sample(const TriMesh& mesh, const ScalarMonitor& monitor);

// Arithmetic mean of the three vertex tensors.
Mat2 cell_metric(const TriMesh& mesh, const MetricField& metric, int cell);

// Edge matrix of the reference element, columns x1 - x0 and x2 - x0.
Mat2 reference_edges(const AdaptParams& p);

// Energy of one cell given its edge matrix. Throws InvertedElementError
// (cell index -1) for a non-positive determinant.
double element_energy(const Mat2& edges, const Mat2& metric, const AdaptParams& p);

// Derivative of element_energy with respect to the edge matrix.
Mat2 element_energy_gradient(const Mat2& edges, const Mat2& metric, const AdaptParams& p);

double energy(const TriMesh& mesh, const MetricField& metric, const AdaptParams& p);
std::vector<Vec2> grad_energy(const TriMesh& mesh, const MetricField& metric,
                              const AdaptParams& p);

// Energy with the monitor sampled at the current positions. The gradient
// includes the change of the monitor under vertex motion.
double energy(const TriMesh& mesh, const ScalarMonitor& monitor, const AdaptParams& p);
std::vector<Vec2> grad_energy(const TriMesh& mesh, const ScalarMonitor& monitor,
                              const AdaptParams& p);

// How a vertex may move under the mesh equation.
enum class VertexMotion { Free, SlideX, SlideY, Fixed };

// Top and bottom vertices slide in x, left and right in y; rectangle
// corners and every pit-chain vertex stay put.
std::vector<VertexMotion> classify_vertices(const TriMesh& mesh, std::span<const PitChain> chains);

struct MmpdeReport {
  int substeps = 0;  // accepted
  int rejected = 0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double max_displacement = 0.0;
  double time_integrated = 0.0;
  bool stationary = false;  // stopped early at a fixed point
};

struct MmpdeSettings {
  int max_substeps = 200;
  double max_move_fraction = 0.5;  // of the shortest incident edge, per substep
  double min_step_fraction = 1e-14;
  double stationary_displacement = 1e-12;  // micrometers
};

// Integrates dx/dt = -(P/tau) dI/dx over an interval of length dt_interval with
// the vertex metric frozen. Returns the new vertex positions; every accepted
// substep keeps all cells positively oriented and does not raise the energy.
std::vector<Vec2> mmpde_step(const TriMesh& mesh, std::span<const VertexMotion> motion,
                             const MetricField& metric, const AdaptParams& p,
                             double dt_interval, MmpdeReport* report = nullptr,
                             const MmpdeSettings& settings = {});

std::vector<Vec2> mmpde_step(const TriMesh& mesh, std::span<const PitChain> chains,
                             const MetricField& metric, const AdaptParams& p,
                             double dt_interval, MmpdeReport* report = nullptr);

std::vector<Vec2> mmpde_step(const TriMesh& mesh, std::span<const VertexMotion> motion,
                             const ScalarMonitor& monitor, const AdaptParams& p,
                             double dt_interval, MmpdeReport* report = nullptr,
                             const MmpdeSettings& settings = {});

std::vector<Vec2> mmpde_step(const TriMesh& mesh, std::span<const PitChain> chains,
                             const ScalarMonitor& monitor, const AdaptParams& p,
                             double dt_interval, MmpdeReport* report = nullptr);

using PhysicsCallback = std::function<void(const TriMesh&, std::span<const PitChain>)>;

struct SmoothResult {
  TriMesh mesh;
  std::vector<double> displacement_trace;  // sum of |x_new - x_old| per iteration
  int iterations = 0;
  bool converged = false;
};

// Alternates the physics callback with one mmpde_step on a freshly sampled
// monitor until the summed vertex displacement drops below smoothing_tol.
// max_iters < 0 uses p.smoothing_max_iters.
SmoothResult smooth_mesh(const TriMesh& mesh, std::span<const PitChain> chains,
                         const AdaptParams& p, const PhysicsCallback& physics = {},
                         int max_iters = -1);

// Points a = x_0 < ... < x_N = b with equal integrals of rho between
// neighbours. Throws ValidationError if rho is not positive.
std::vector<double> solve_equidistribution_1d(const std::function<double(double)>& rho, double a,
                                              double b, int n);

}  // namespace pitmesh::adapt
