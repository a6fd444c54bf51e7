#pragma once

#include "pitmesh/crystal.hpp"
#include "pitmesh/electrochem.hpp"
#include "pitmesh/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <span>
#include <vector>

namespace pitmesh::fem {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Electrolyte potential in volts at every mesh vertex.
struct PhysicalState {
  Eigen::VectorXd phi;
};

struct NewtonSettings {
  double abs_tol = 1e-10;  // two-norm of the reduced residual
  double rel_tol = 1e-12;  // relative to the initial residual
  int max_iters = 25;

  void validate() const;
};

struct NewtonReport {
  int iterations = 0;
  double final_residual = 0.0;
  std::vector<double> residual_history;
};

// Everything the pit flux needs besides the mesh and the current potential.
struct PitFluxModel {
  crystal::MaterialSpec material = crystal::Homogeneous{};
  crystal::VcorrParams vcorr;
  electrochem::ElectroParams electro;
  int quad_points = 2;     // Gauss-Legendre points per pit edge, 1..4
  double flux_sign = 1.0;  // grad(phi) . n = flux_sign * i / sigma_c on the pit wall
};

// Prescribed nodal values. The default problem pins GammaTop to zero.
struct DirichletData {
  std::vector<int> vertices;
  std::vector<double> values;
};

DirichletData top_dirichlet(const TriMesh& mesh);
DirichletData all_boundary_dirichlet(const TriMesh& mesh, std::span<const double> nodal_values);

// P1 stiffness on the whole mesh. Coordinates in any length unit; the
// matrix is scale invariant in 2D.
SparseMatrix assemble_stiffness(const TriMesh& mesh);

// Boundary load b_k = int_{pit} i(phi_h)/sigma_c * v_k ds (ds in meters) and
// its derivative db/dphi. Both exclude flux_sign.
struct BoundaryTerm {
  Eigen::VectorXd load;
  SparseMatrix jacobian;
};

BoundaryTerm boundary_residual_and_jacobian(const TriMesh& mesh, std::span<const PitChain> chains,
                                            const Eigen::VectorXd& phi, const PitFluxModel& model);

// Solves K phi - flux_sign * b(phi) = 0 with Dirichlet rows eliminated.
// Throws ConvergenceError (with the residual history) or Error on a
// singular linearization.
PhysicalState newton_solve(const TriMesh& mesh, std::span<const PitChain> chains,
                           const PitFluxModel& model, const PhysicalState& guess,
                           const NewtonSettings& settings, const DirichletData& dirichlet,
                           NewtonReport* report = nullptr);

// Convenience overload with GammaTop pinned to zero.
PhysicalState newton_solve(const TriMesh& mesh, std::span<const PitChain> chains,
                           const PitFluxModel& model, const PhysicalState& guess,
                           const NewtonSettings& settings, NewtonReport* report = nullptr);

}  // namespace pitmesh::fem
