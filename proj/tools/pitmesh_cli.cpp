#include "pitmesh/config.hpp"
#include "pitmesh/error.hpp"
#include "pitmesh/io.hpp"
#include "pitmesh/log.hpp"
#include "pitmesh/mesh_adapt.hpp"
#include "pitmesh/power_law.hpp"
#include "pitmesh/sim_driver.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace pitmesh;

namespace {

int init_mesh_cmd(const std::string& config_path, const std::string& out_path) {
  const auto cfg = config::parse_config_file(config_path);
  const auto init = sim::init_mesh(cfg);
  io::write_mesh(init.mesh, out_path);
  std::cout << "wrote " << out_path << ": " << init.mesh.num_vertices() << " vertices, "
            << init.mesh.num_cells() << " cells, " << init.smoothing_trace.size()
            << " smoothing iterations\n";
  return 0;
}

int run_cmd(const std::string& config_path, const std::string& out_dir) {
  auto cfg = config::parse_config_file(config_path);
  cfg.output_dir = out_dir;
  fs::create_directories(out_dir);
  const auto result = sim::run(cfg);

  const fs::path dir(out_dir);
  io::write_timeseries(result.series, (dir / "timeseries.csv").string());
  io::write_mesh(result.mesh, (dir / "final_mesh.txt").string());
  io::write_vtk(result.mesh, result.phi.phi, (dir / "final.vtk").string());

  config::RunFits fits;
  if (result.series.rows.size() >= 10) {
    fits.depth = fit::fit_power_law(result.series, SeriesColumn::Depth);
    fits.width = fit::fit_power_law(result.series, SeriesColumn::Width);
  }
  std::ofstream summary(dir / "summary.txt");
  if (!summary) throw IoError("cannot write " + (dir / "summary.txt").string());
  config::write_summary(cfg, result, fits, summary);

  const auto& last = result.series.rows.back();
  std::cout << result.steps << " steps, " << result.merges << " merges; final depth "
            << last.depth << " um, width " << last.width << " um\n";
  return 0;
}

int smooth_cmd(const std::string& config_path, const std::string& mesh_path,
               const std::string& out_path) {
  const auto cfg = config::parse_config_file(config_path);
  auto mesh = io::read_mesh(mesh_path);
  const auto report = validate(mesh);
  if (!report.ok()) throw ValidationError(mesh_path + ": " + report.messages.front());
  const auto chains = chains_from_tags(mesh);
  const auto model = cfg.flux_model();
  fem::PhysicalState phi{Eigen::VectorXd::Zero(mesh.num_vertices())};
  auto physics = [&](const TriMesh& m, std::span<const PitChain> c) {
    phi = fem::newton_solve(m, c, model, phi, cfg.newton);
  };
  const auto result = adapt::smooth_mesh(mesh, chains, cfg.adapt, physics);
  io::write_mesh(result.mesh, out_path);
  for (std::size_t i = 0; i < result.displacement_trace.size(); ++i) {
    std::cout << "iteration " << i + 1 << ": displacement " << result.displacement_trace[i]
              << '\n';
  }
  if (!result.converged) std::cerr << "warning: smoothing did not reach smoothing_tol\n";
  return 0;
}

int fit_cmd(const std::string& csv_path, const std::string& column) {
  const auto series = io::read_timeseries(csv_path);
  const auto col = column == "depth" ? SeriesColumn::Depth : SeriesColumn::Width;
  const auto f = fit::fit_power_law(series, col);
  std::cout << column << "(t) = a t^b + c with t shifted so the first row is t = 1\n";
  std::cout << "a = " << f.a << " +- " << f.se_a << '\n';
  std::cout << "b = " << f.b << " +- " << f.se_b << '\n';
  std::cout << "c = " << f.c << " +- " << f.se_c << '\n';
  std::cout << "R^2 = " << f.r_squared << ", rss = " << f.rss << '\n';
  if (!f.converged) std::cerr << "warning: fit did not converge\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moving-mesh pitting corrosion simulator"};
  app.require_subcommand(1);

  std::string config_path, mesh_path, out_path, csv_path, column = "depth";

  auto* init = app.add_subcommand("init-mesh", "Build and smooth the initial mesh");
  init->add_option("config", config_path, "Run configuration")->required()->check(CLI::ExistingFile);
  init->add_option("-o,--output", out_path, "Mesh file to write")->required();

  auto* run = app.add_subcommand("run", "Run a pit growth simulation");
  run->add_option("config", config_path, "Run configuration")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", out_path, "Output directory")->required();

  auto* smooth = app.add_subcommand("smooth", "Smooth an existing mesh");
  smooth->add_option("config", config_path, "Run configuration")->required()->check(CLI::ExistingFile);
  smooth->add_option("mesh", mesh_path, "Mesh file")->required()->check(CLI::ExistingFile);
  smooth->add_option("-o,--output", out_path, "Mesh file to write")->required();

  auto* fit = app.add_subcommand("fit", "Fit a power law to a time-series CSV");
  fit->add_option("csv", csv_path, "Time series written by 'run'")->required()->check(CLI::ExistingFile);
  fit->add_option("--column", column, "depth or width")->check(CLI::IsMember({"depth", "width"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*init) return init_mesh_cmd(config_path, out_path);
    if (*run) return run_cmd(config_path, out_path);
    if (*smooth) return smooth_cmd(config_path, mesh_path, out_path);
    if (*fit) return fit_cmd(csv_path, column);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
