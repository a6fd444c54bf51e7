#pragma once

#include "pitmesh/crystal.hpp"
#include "pitmesh/electrochem.hpp"
#include "pitmesh/fem_laplace.hpp"
#include "pitmesh/front_motion.hpp"
#include "pitmesh/mesh.hpp"
#include "pitmesh/mesh_adapt.hpp"
#include "pitmesh/pit_analysis.hpp"
#include "pitmesh/series.hpp"
#include "pitmesh/triangulate.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pitmesh::sim {

enum class MaterialKind { Homogeneous, Crystal, Bicrystal };

// Material as written in a config file: Miller indices rather than the
// normalized frames they produce.
struct MaterialConfig {
  MaterialKind kind = MaterialKind::Homogeneous;
  double vcorr_homogeneous = -0.24;
  crystal::Vec3i zone_axis{0, 0, 1};
  crystal::Vec3i x_dir{1, 0, 0};
  crystal::Vec3i zone_axis_left{0, 0, 1};
  crystal::Vec3i x_dir_left{1, 0, 0};
  crystal::Vec3i zone_axis_right{1, 0, 1};
  crystal::Vec3i x_dir_right{-1, 0, 1};
  double x_interface = 0.0;

  // Throws ValidationError for non-perpendicular axes.
  crystal::MaterialSpec resolve() const;
};

struct SimConfig {
  electrochem::ElectroParams electro;
  adapt::AdaptParams adapt;
  front::FrontParams front;
  MaterialConfig material;
  crystal::VcorrParams vcorr;
  fem::NewtonSettings newton;
  int quad_points = 2;
  double flux_sign = 1.0;

  geom::DomainSpec domain;
  double pit_width = 10.0;  // micrometers
  double pit_depth = 5.0;
  int pit_nodes = 61;
  int pit_count = 1;
  double pit_spacing = 12.0;  // centre to centre when pit_count > 1
  double mesh_h = 0.75;       // target edge length of the initial fill
  double mesh_jitter = 0.15;  // fraction of mesh_h
  std::uint64_t seed = 1;
  bool smooth_initial = true;

  double t_end = 120.0;
  int post_merge_smoothing_iters = 5;
  int smooth_physics_every = 1;  // physics solves during smoothing: every k-th iteration

  std::string output_dir;  // empty: no files
  int vtk_every = 0;       // steps between VTK snapshots, 0 disables

  void validate() const;
  fem::PitFluxModel flux_model() const;
  // Pits centred on x = 0 (spread by pit_spacing for several pits).
  std::vector<geom::PitSpec> pit_specs() const;
};

struct Event {
  int step = 0;
  double t = 0.0;
  std::string kind;  // "merge", "corner", "dt-cap", "smoothing"
  std::string detail;
};

struct InitResult {
  TriMesh mesh;
  std::vector<PitChain> chains;
  fem::PhysicalState phi;
  std::vector<double> smoothing_trace;
  bool smoothing_converged = true;
};

InitResult init_mesh(const SimConfig& config);

struct StepInfo {
  int step = 0;
  double t = 0.0;
  double dt = 0.0;
  int newton_iterations = 0;
  adapt::MmpdeReport mmpde;
};

struct RunHooks {
  // Called after every completed step with the new state.
  std::function<void(const StepInfo&, const TriMesh&, std::span<const PitChain>,
                     const Eigen::VectorXd&)>
      on_step;
  front::SpeedOverride speed_override;
};

struct RunResult {
  TimeSeries series;
  TriMesh mesh;
  std::vector<PitChain> chains;
  fem::PhysicalState phi;
  std::vector<Event> events;
  int steps = 0;
  int merges = 0;
  int max_inverted = 0;  // over every accepted step
};

// Advances the pit(s) from the initial state to t_end. Library errors are
// rethrown as Error with the step index; when output_dir is set the last
// good mesh and field are written first.
RunResult run(const SimConfig& config, const InitResult& init, const RunHooks& hooks = {});
RunResult run(const SimConfig& config, const RunHooks& hooks = {});

analysis::Dimensions diagnostics(const TriMesh& mesh, std::span<const PitChain> chains);

}  // namespace pitmesh::sim
