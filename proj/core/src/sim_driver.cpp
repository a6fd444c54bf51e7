#include "pitmesh/sim_driver.hpp"

#include "pitmesh/error.hpp"
#include "pitmesh/io.hpp"
#include "pitmesh/log.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

namespace pitmesh::sim {
namespace {

std::string step_prefix(int step, double t) {
  std::ostringstream os;
  os << "step " << step << " (t = " << t << " s): ";
  return os.str();
}

[[noreturn]] void rethrow_at(int step, double t) {
  const std::string pre = step_prefix(step, t);
  try {
    throw;
  } catch (const InvertedElementError& e) {
    throw InvertedElementError(e.cell(), pre + e.what());
  } catch (const GeometryError& e) {
    throw GeometryError(pre + e.what());
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(pre + e.what());
  } catch (const OverflowError& e) {
    throw OverflowError(pre + e.what());
  } catch (const Error& e) {
    throw Error(pre + e.what());
  }
}

std::string snapshot_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%06d.vtk", step);
  return buf;
}

}  // namespace

crystal::MaterialSpec MaterialConfig::resolve() const {
  switch (kind) {
    case MaterialKind::Homogeneous: return crystal::Homogeneous{vcorr_homogeneous};
    case MaterialKind::Crystal: return crystal::Crystal{crystal::orientation_from_axes(zone_axis, x_dir)};
    case MaterialKind::Bicrystal:
      return crystal::Bicrystal{x_interface,
                                crystal::orientation_from_axes(zone_axis_left, x_dir_left),
                                crystal::orientation_from_axes(zone_axis_right, x_dir_right)};
  }
  throw ValidationError("unknown material kind");
}

void SimConfig::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError(what); };
  electro.validate();
  adapt.validate();
  front.validate();
  newton.validate();
  if (!(vcorr.s_const >= 0.0)) fail("vcorr_s must be >= 0");
  if (!std::isfinite(material.vcorr_homogeneous)) fail("vcorr_homogeneous must be finite");
  if (!std::isfinite(material.x_interface)) fail("x_interface must be finite");
  material.resolve();
  if (quad_points < 1 || quad_points > 4) fail("quad_points must be between 1 and 4");
  if (flux_sign != 1.0 && flux_sign != -1.0) fail("flux_sign must be +1 or -1");
  if (!(pit_width > 0.0) || !(pit_depth > 0.0)) fail("pit_width and pit_depth must be > 0");
  if (pit_nodes < 5) fail("pit_nodes must be >= 5");
  if (pit_count < 1) fail("pit_count must be >= 1");
  if (pit_count > 1 && !(pit_spacing > pit_width)) fail("pit_spacing must exceed pit_width");
  if (!(mesh_h > 0.0)) fail("mesh_h must be > 0");
  if (!(mesh_jitter >= 0.0 && mesh_jitter < 0.5)) fail("mesh_jitter must lie in [0, 0.5)");
  if (!(t_end > 0.0)) fail("t_end must be > 0");
  if (post_merge_smoothing_iters < 0) fail("post_merge_smoothing_iters must be >= 0");
  if (smooth_physics_every < 1) fail("smooth_physics_every must be >= 1");
  if (vtk_every < 0) fail("vtk_every must be >= 0");
  if (!(domain.x_max > domain.x_min) || !(domain.height > 0.0)) fail("domain must be non-empty");
  const auto pits = pit_specs();
  if (pits.front().center_x - 0.5 * pit_width <= domain.x_min ||
      pits.back().center_x + 0.5 * pit_width >= domain.x_max) {
    fail("pits must fit strictly inside the domain width");
  }
}

fem::PitFluxModel SimConfig::flux_model() const {
  fem::PitFluxModel m;
  m.material = material.resolve();
  m.vcorr = vcorr;
  m.electro = electro;
  m.quad_points = quad_points;
  m.flux_sign = flux_sign;
  return m;
}

std::vector<geom::PitSpec> SimConfig::pit_specs() const {
  std::vector<geom::PitSpec> pits;
  for (int k = 0; k < pit_count; ++k) {
    geom::PitSpec p;
    p.center_x = (k - 0.5 * (pit_count - 1)) * pit_spacing;
    p.width = pit_width;
    p.depth = pit_depth;
    p.nodes = pit_nodes;
    pits.push_back(p);
  }
  return pits;
}

analysis::Dimensions diagnostics(const TriMesh& mesh, std::span<const PitChain> chains) {
  return analysis::pit_dimensions(mesh, chains);
}

InitResult init_mesh(const SimConfig& config) {
  config.validate();
  const auto pits = config.pit_specs();
  InitResult out;
  out.mesh = geom::build_domain_mesh(config.domain, pits, config.mesh_h, config.seed,
                                     config.mesh_jitter);
  out.chains = chains_from_tags(out.mesh);
  const auto model = config.flux_model();
  out.phi.phi = Eigen::VectorXd::Zero(out.mesh.num_vertices());

  if (config.smooth_initial) {
    int calls = 0;
    auto physics = [&](const TriMesh& m, std::span<const PitChain> chains) {
      if (calls++ % config.smooth_physics_every == 0) {
        out.phi = fem::newton_solve(m, chains, model, out.phi, config.newton);
      }
    };
    auto smoothed = adapt::smooth_mesh(out.mesh, out.chains, config.adapt, physics);
    out.mesh = std::move(smoothed.mesh);
    out.smoothing_trace = std::move(smoothed.displacement_trace);
    out.smoothing_converged = smoothed.converged;
  }
  out.phi = fem::newton_solve(out.mesh, out.chains, model, out.phi, config.newton);
  log::info("initial mesh: ", out.mesh.num_vertices(), " vertices, ", out.mesh.num_cells(),
            " cells, ", out.smoothing_trace.size(), " smoothing iterations");
  return out;
}

RunResult run(const SimConfig& config, const RunHooks& hooks) {
  return run(config, init_mesh(config), hooks);
}

RunResult run(const SimConfig& config, const InitResult& init, const RunHooks& hooks) {
  config.validate();
  const auto model = config.flux_model();
  RunResult res;
  res.mesh = init.mesh;
  res.chains = init.chains;
  res.phi = init.phi;

  const bool write_files = !config.output_dir.empty();
  std::filesystem::path outdir(config.output_dir);
  if (write_files) std::filesystem::create_directories(outdir);

  const int nv0 = res.mesh.num_vertices();
  const int nc0 = res.mesh.num_cells();
  auto record = [&](double t) {
    const auto d = diagnostics(res.mesh, res.chains);
    res.series.rows.push_back({t, d.depth, d.width});
  };
  record(0.0);
  if (write_files && config.vtk_every > 0) {
    io::write_vtk(res.mesh, res.phi.phi, (outdir / snapshot_name(0)).string());
  }

  TriMesh good_mesh = res.mesh;
  Eigen::VectorXd good_phi = res.phi.phi;
  double t = 0.0;
  int step = 0;
  const double t_eps = 1e-9 * config.t_end;
  while (t < config.t_end - t_eps) {
    try {
      StepInfo info;
      info.step = step + 1;
      double dt = std::min(config.front.dt, config.t_end - t);
      const double cap = front::stable_dt(res.mesh, res.chains, res.phi.phi, model, config.front,
                                          hooks.speed_override);
      if (cap < dt) {
        log::debug("step ", step + 1, ": dt capped from ", dt, " to ", cap);
        dt = cap;
      }
      info.dt = dt;

      const auto monitor = adapt::mackenzie_monitor(res.mesh, res.chains, config.adapt);
      res.mesh.vertices =
          adapt::mmpde_step(res.mesh, res.chains, monitor, config.adapt, dt, &info.mmpde);

      fem::NewtonReport nr;
      res.phi = fem::newton_solve(res.mesh, res.chains, model, res.phi, config.newton, &nr);
      info.newton_iterations = nr.iterations;

      for (auto& chain : res.chains) {
        const auto rep = front::advance_pit(res.mesh, chain, res.phi.phi, model, config.front, dt,
                                            hooks.speed_override);
        for (auto c : {rep.corners.left, rep.corners.right}) {
          if (c == front::CornerCase::Absorbed) {
            res.events.push_back({step + 1, t + dt, "corner",
                                  "pit " + std::to_string(chain.pit_id) +
                                      " absorbed a surface vertex"});
          }
        }
      }
      const auto problems = front::front_problems(res.mesh, res.chains);
      if (!problems.empty()) throw GeometryError(problems.front());
      const int inverted = count_inverted(res.mesh);
      res.max_inverted = std::max(res.max_inverted, inverted);
      if (inverted > 0) {
        int first = 0;
        while (cell_signed_area(res.mesh, first) > 0.0) ++first;
        throw InvertedElementError(first, std::to_string(inverted) +
                                              " cells inverted by the front advance, first cell " +
                                              std::to_string(first));
      }

      if (const auto merge = front::detect_merge(res.mesh, res.chains, config.front)) {
        const auto mr = front::merge_pits(res.mesh, res.chains, *merge);
        std::ostringstream os;
        os << "pits " << merge->left_pit << " and " << merge->right_pit << " merged across "
           << merge->gap << " um; apex vertex " << mr.apex << ", relocated vertex "
           << mr.relocated;
        res.events.push_back({step + 1, t + dt, "merge", os.str()});
        ++res.merges;
        if (config.post_merge_smoothing_iters > 0) {
          auto physics = [&](const TriMesh& m, std::span<const PitChain> chains) {
            res.phi = fem::newton_solve(m, chains, model, res.phi, config.newton);
          };
          auto smoothed = adapt::smooth_mesh(res.mesh, res.chains, config.adapt, physics,
                                             config.post_merge_smoothing_iters);
          res.mesh = std::move(smoothed.mesh);
          res.events.push_back({step + 1, t + dt, "smoothing",
                                std::to_string(smoothed.iterations) +
                                    " post-merge smoothing iterations"});
        }
        res.phi = fem::newton_solve(res.mesh, res.chains, model, res.phi, config.newton);
      }

      if (res.mesh.num_vertices() != nv0 || res.mesh.num_cells() != nc0) {
        throw GeometryError("mesh topology changed during the step");
      }
      t += dt;
      ++step;
      info.t = t;
      record(t);
      if (write_files && config.vtk_every > 0 && step % config.vtk_every == 0) {
        io::write_vtk(res.mesh, res.phi.phi, (outdir / snapshot_name(step)).string());
      }
      if (hooks.on_step) hooks.on_step(info, res.mesh, res.chains, res.phi.phi);
      good_mesh = res.mesh;
      good_phi = res.phi.phi;
    } catch (const Error&) {
      if (write_files) {
        try {
          io::write_mesh(good_mesh, (outdir / "last_good_mesh.txt").string());
          io::write_vtk(good_mesh, good_phi, (outdir / "last_good.vtk").string());
        } catch (const Error& e) {
          log::warn("could not write the last good snapshot: ", e.what());
        }
      }
      rethrow_at(step + 1, t);
    }
  }
  res.steps = step;
  log::info("run finished: ", step, " steps, ", res.merges, " merges");
  return res;
}

}  // namespace pitmesh::sim
