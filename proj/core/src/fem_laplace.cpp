#include "pitmesh/fem_laplace.hpp"

#include "pitmesh/error.hpp"
#include "pitmesh/log.hpp"

#include <Eigen/LU>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <array>
#include <cmath>
#include <sstream>

namespace pitmesh::fem {
namespace {

constexpr double kMicron = 1.0e-6;

struct GaussRule {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

GaussRule gauss_legendre(int n) {
  auto mapped = [](std::vector<double> x, std::vector<double> w) {
    GaussRule r;
    for (std::size_t i = 0; i < x.size(); ++i) {
      r.nodes.push_back(0.5 * (x[i] + 1.0));
      r.weights.push_back(0.5 * w[i]);
    }
    return r;
  };
  switch (n) {
    case 1: return mapped({0.0}, {2.0});
    case 2: {
      const double a = 1.0 / std::sqrt(3.0);
      return mapped({-a, a}, {1.0, 1.0});
    }
    case 3: {
      const double a = std::sqrt(3.0 / 5.0);
      return mapped({-a, 0.0, a}, {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0});
    }
    case 4: {
      const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
      const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
      const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
      const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
      return mapped({-b, -a, a, b}, {wb, wa, wa, wb});
    }
    default:
      throw ValidationError("quadrature points per pit edge must be between 1 and 4, got " +
                            std::to_string(n));
  }
}

SparseMatrix restrict_square(const SparseMatrix& full, const std::vector<int>& to_free, int n_free) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(full.nonZeros());
  for (int col = 0; col < full.outerSize(); ++col) {
    const int fc = to_free[col];
    if (fc < 0) continue;
    for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
      const int fr = to_free[it.row()];
      if (fr >= 0) trips.emplace_back(fr, fc, it.value());
    }
  }
  SparseMatrix reduced(n_free, n_free);
  reduced.setFromTriplets(trips.begin(), trips.end());
  return reduced;
}

}  // namespace

void NewtonSettings::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw ValidationError("Newton tolerances must be > 0");
  if (max_iters < 1) throw ValidationError("newton_max_iters must be >= 1");
}

DirichletData top_dirichlet(const TriMesh& mesh) {
  std::vector<char> mark(mesh.vertices.size(), 0);
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag.kind == BoundaryKind::Top) mark[e.v[0]] = mark[e.v[1]] = 1;
  }
  DirichletData d;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mark[v]) {
      d.vertices.push_back(v);
      d.values.push_back(0.0);
    }
  }
  return d;
}

DirichletData all_boundary_dirichlet(const TriMesh& mesh, std::span<const double> nodal_values) {
  std::vector<char> mark(mesh.vertices.size(), 0);
  for (const auto& e : mesh.boundary_edges) mark[e.v[0]] = mark[e.v[1]] = 1;
  DirichletData d;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mark[v]) {
      d.vertices.push_back(v);
      d.values.push_back(nodal_values[v]);
    }
  }
  return d;
}

SparseMatrix assemble_stiffness(const TriMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * mesh.triangles.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const AffineMap map = affine_map(mesh, c);
    // Reference gradients of the P1 hats are (-1,-1), (1,0), (0,1).
    Eigen::Matrix<double, 2, 3> ref;
    ref << -1.0, 1.0, 0.0, -1.0, 0.0, 1.0;
    const Eigen::Matrix<double, 2, 3> grads = map.jacobian.inverse().transpose() * ref;
    const Eigen::Matrix3d local = map.area * grads.transpose() * grads;
    const auto& t = mesh.triangles[c];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) trips.emplace_back(t[i], t[j], local(i, j));
    }
  }
  SparseMatrix k(mesh.num_vertices(), mesh.num_vertices());
  k.setFromTriplets(trips.begin(), trips.end());
  return k;
}

BoundaryTerm boundary_residual_and_jacobian(const TriMesh& mesh, std::span<const PitChain> chains,
                                            const Eigen::VectorXd& phi, const PitFluxModel& model) {
  const int n = mesh.num_vertices();
  BoundaryTerm out;
  out.load = Eigen::VectorXd::Zero(n);
  out.jacobian.resize(n, n);
  const GaussRule rule = gauss_legendre(model.quad_points);
  const auto& ep = model.electro;
  std::vector<Eigen::Triplet<double>> trips;
  for (const auto& chain : chains) {
    if (chain.size() < 2) continue;
    const auto normals = face_normals(mesh, chain);
    for (int k = 0; k + 1 < chain.size(); ++k) {
      const int a = chain.vertices[k];
      const int b = chain.vertices[k + 1];
      const Vec2& pa = mesh.vertices[a];
      const Vec2& pb = mesh.vertices[b];
      const double length_m = (pb - pa).norm() * kMicron;
      double la = 0.0, lb = 0.0, jaa = 0.0, jab = 0.0, jbb = 0.0;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double s = rule.nodes[q];
        const double w = rule.weights[q] * length_m / ep.sigma_c;
        const Vec2 xq = pa + s * (pb - pa);
        const double phi_q = (1.0 - s) * phi[a] + s * phi[b];
        const double vc = crystal::vcorr(model.material, model.vcorr, xq, normals[k]);
        double i_q = 0.0;
        try {
          i_q = electrochem::current_density(ep, vc, phi_q);
        } catch (const OverflowError& e) {
          throw OverflowError(std::string(e.what()) + " on pit edge (" + std::to_string(a) + "," +
                              std::to_string(b) + ")");
        }
        const double di = -ep.alpha * ep.zf_over_rt() * i_q;
        la += w * (1.0 - s) * i_q;
        lb += w * s * i_q;
        jaa += w * (1.0 - s) * (1.0 - s) * di;
        jab += w * (1.0 - s) * s * di;
        jbb += w * s * s * di;
      }
      out.load[a] += la;
      out.load[b] += lb;
      trips.emplace_back(a, a, jaa);
      trips.emplace_back(a, b, jab);
      trips.emplace_back(b, a, jab);
      trips.emplace_back(b, b, jbb);
    }
  }
  out.jacobian.setFromTriplets(trips.begin(), trips.end());
  return out;
}

PhysicalState newton_solve(const TriMesh& mesh, std::span<const PitChain> chains,
                           const PitFluxModel& model, const PhysicalState& guess,
                           const NewtonSettings& settings, const DirichletData& dirichlet,
                           NewtonReport* report) {
  settings.validate();
  const int n = mesh.num_vertices();
  if (guess.phi.size() != n) {
    throw ValidationError("newton_solve: guess has " + std::to_string(guess.phi.size()) +
                          " values for " + std::to_string(n) + " vertices");
  }
  Eigen::VectorXd phi = guess.phi;
  std::vector<int> to_free(n, 0);
  for (std::size_t i = 0; i < dirichlet.vertices.size(); ++i) {
    to_free[dirichlet.vertices[i]] = -1;
    phi[dirichlet.vertices[i]] = dirichlet.values[i];
  }
  std::vector<int> free_dofs;
  for (int v = 0; v < n; ++v) {
    if (to_free[v] == 0) {
      to_free[v] = static_cast<int>(free_dofs.size());
      free_dofs.push_back(v);
    }
  }
  const int nf = static_cast<int>(free_dofs.size());
  const SparseMatrix stiffness = assemble_stiffness(mesh);
  const double sign = model.flux_sign;

  auto reduced_residual = [&](const Eigen::VectorXd& p, BoundaryTerm* term_out) {
    BoundaryTerm term = boundary_residual_and_jacobian(mesh, chains, p, model);
    const Eigen::VectorXd full = stiffness * p - sign * term.load;
    Eigen::VectorXd r(nf);
    for (int i = 0; i < nf; ++i) r[i] = full[free_dofs[i]];
    if (term_out) *term_out = std::move(term);
    return r;
  };

  NewtonReport local;
  BoundaryTerm term;
  Eigen::VectorXd r = reduced_residual(phi, &term);
  double rnorm = r.norm();
  const double r0 = rnorm;
  local.residual_history.push_back(rnorm);

  auto converged = [&](double value) {
    return value <= settings.abs_tol || value <= settings.rel_tol * r0;
  };

  while (!converged(rnorm) && nf > 0) {
    if (local.iterations >= settings.max_iters) {
      std::ostringstream os;
      os << "Newton did not converge in " << settings.max_iters << " iterations; residuals:";
      for (double h : local.residual_history) os << ' ' << h;
      throw ConvergenceError(os.str());
    }
    const SparseMatrix jac_full = stiffness - sign * term.jacobian;
    const SparseMatrix jac = restrict_square(jac_full, to_free, nf);
    Eigen::VectorXd delta;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(jac);
    if (ldlt.info() == Eigen::Success) delta = ldlt.solve(-r);
    if (ldlt.info() != Eigen::Success || !delta.allFinite()) {
      Eigen::SparseLU<SparseMatrix> lu;
      lu.analyzePattern(jac);
      lu.factorize(jac);
      if (lu.info() != Eigen::Success) {
        throw Error("newton_solve: linearized system is singular (" + lu.lastErrorMessage() + ")");
      }
      delta = lu.solve(-r);
      if (!delta.allFinite()) throw Error("newton_solve: linearized system is singular");
    }
    // Backtracking keeps the residual monotone when the exponential is stiff.
    double step = 1.0;
    Eigen::VectorXd trial = phi;
    Eigen::VectorXd r_trial;
    double trial_norm = 0.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
      trial = phi;
      for (int i = 0; i < nf; ++i) trial[free_dofs[i]] += step * delta[i];
      r_trial = reduced_residual(trial, &term);
      trial_norm = r_trial.norm();
      if (trial_norm < rnorm || converged(trial_norm)) break;
      step *= 0.5;
    }
    phi = std::move(trial);
    r = std::move(r_trial);
    rnorm = trial_norm;
    ++local.iterations;
    local.residual_history.push_back(rnorm);
  }
  local.final_residual = rnorm;
  log::debug("newton: ", local.iterations, " iterations, residual ", rnorm);
  if (report) *report = std::move(local);
  return PhysicalState{std::move(phi)};
}

PhysicalState newton_solve(const TriMesh& mesh, std::span<const PitChain> chains,
                           const PitFluxModel& model, const PhysicalState& guess,
                           const NewtonSettings& settings, NewtonReport* report) {
  return newton_solve(mesh, chains, model, guess, settings, top_dirichlet(mesh), report);
}

}  // namespace pitmesh::fem
