#include "fixtures.hpp"

#include "pitmesh/error.hpp"
#include "pitmesh/mesh_adapt.hpp"
#include "pitmesh/triangulate.hpp"

#include <Eigen/LU>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace pitmesh;
using namespace pitmesh::adapt;

namespace {

TriMesh jittered_rectangle(int nx, int ny, double amount, std::uint64_t seed) {
  auto mesh = geom::structured_rectangle(0, 1, 0, 1, nx, ny);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amount, amount);
  const auto motion = classify_vertices(mesh, {});
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (motion[v] == VertexMotion::Free) mesh.vertices[v] += Vec2(u(rng), u(rng));
  }
  return mesh;
}

MetricField random_anisotropic_metric(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ev(1.0, 5.0), ang(0.0, 3.14159);
  MetricField m;
  for (int i = 0; i < n; ++i) {
    const double a = ang(rng);
    Mat2 r;
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    m.tensors.push_back(r * Vec2(ev(rng), ev(rng)).asDiagonal() * r.transpose());
  }
  return m;
}

// Largest |analytic - central difference| over all coordinates, relative to
// the largest gradient component.
template <class Energy, class Grad>
double fd_relative_error(TriMesh mesh, const Energy& e, const Grad& g) {
  const auto grad = g(mesh);
  double scale = 0.0, worst = 0.0;
  for (const auto& v : grad) scale = std::max(scale, v.cwiseAbs().maxCoeff());
  const double h = 1e-6;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    for (int d = 0; d < 2; ++d) {
      const double x0 = mesh.vertices[v][d];
      mesh.vertices[v][d] = x0 + h;
      const double ep = e(mesh);
      mesh.vertices[v][d] = x0 - h;
      const double em = e(mesh);
      mesh.vertices[v][d] = x0;
      worst = std::max(worst, std::abs((ep - em) / (2 * h) - grad[v][d]));
    }
  }
  return worst / scale;
}

// Shortest edge with its midpoint within the given distance of the front.
// Edges along the front itself are skipped since the flow never moves them.
double min_edge_near_pit(const TriMesh& mesh, std::span<const PitChain> chains, double within) {
  std::vector<bool> on_chain(mesh.num_vertices(), false);
  for (const auto& c : chains) {
    for (int v : c.vertices) on_chain[v] = true;
  }
  double best = 1e300;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      if (on_chain[t[k]] && on_chain[t[(k + 1) % 3]]) continue;
      const Vec2 a = mesh.vertices[t[k]], b = mesh.vertices[t[(k + 1) % 3]];
      if (min_distance_to_pit(0.5 * (a + b), chains, mesh) <= within) {
        best = std::min(best, (a - b).norm());
      }
    }
  }
  return best;
}

// max/min over cells of |K| sqrt(det M_K).
double equidistribution_spread(const TriMesh& mesh, const MetricField& m) {
  double lo = 1e300, hi = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double q = cell_signed_area(mesh, c) * std::sqrt(cell_metric(mesh, m, c).determinant());
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  return hi / lo;
}

// Mean over cells of |q_K / mean(q) - 1| weighted by 1 / (1 + distance to the pit).
double weighted_equidistribution_deviation(const TriMesh& mesh, std::span<const PitChain> chains,
                                           const MetricField& m) {
  std::vector<double> q(mesh.num_cells()), w(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.triangles[c];
    q[c] = cell_signed_area(mesh, c) * std::sqrt(cell_metric(mesh, m, c).determinant());
    const Vec2 centroid = (mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0;
    w[c] = 1.0 / (1.0 + min_distance_to_pit(centroid, chains, mesh));
  }
  const double mean = std::accumulate(q.begin(), q.end(), 0.0) / q.size();
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < q.size(); ++c) {
    num += w[c] * std::abs(q[c] / mean - 1.0);
    den += w[c];
  }
  return num / den;
}

}  // namespace

TEST_CASE("MacKenzie monitor values") {
  const AdaptParams p;
  CHECK(mackenzie_value(0.0, p) == 101.0);
  CHECK(mackenzie_value(1.0, p) == doctest::Approx(1.0 + 100.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(mackenzie_value(1.0, p) == doctest::Approx(71.71).epsilon(1e-4));
  AdaptParams off;
  off.mu1 = 0.0;
  for (double d : {0.0, 0.3, 7.0}) CHECK(mackenzie_value(d, off) == 1.0);
}

TEST_CASE("sampled monitor is isotropic, symmetric and at least one") {
  auto mesh = pitmesh::testing::small_pit_mesh();
  const auto chains = chains_from_tags(mesh);
  const AdaptParams p;
  const auto m = monitor_mackenzie(mesh, chains, p);
  REQUIRE(m.size() == mesh.num_vertices());
  for (int v = 0; v < m.size(); ++v) {
    const Mat2& t = m.tensors[v];
    CHECK(std::abs(t(0, 1) - t(1, 0)) <= 1e-14);
    CHECK(t(0, 1) == 0.0);
    CHECK(t(0, 0) == t(1, 1));
    CHECK(t(0, 0) >= 1.0);
    CHECK(t(0, 0) == doctest::Approx(mackenzie_value(min_distance_to_pit(mesh.vertices[v], chains, mesh), p)));
  }
  // Pit vertices sit on the front: d = 0.
  for (int v : chains[0].vertices) CHECK(m.tensors[v](0, 0) == doctest::Approx(101.0));

  const auto live = sample(mesh, mackenzie_monitor(mesh, chains, p));
  for (int v = 0; v < m.size(); ++v) {
    CHECK(live.tensors[v](0, 0) == doctest::Approx(m.tensors[v](0, 0)).epsilon(1e-13));
  }
}

TEST_CASE("monitor gradient matches central differences off the front") {
  auto mesh = pitmesh::testing::small_pit_mesh();
  const auto chains = chains_from_tags(mesh);
  const auto mon = mackenzie_monitor(mesh, chains, AdaptParams{});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ux(-9.0, 9.0), uy(0.2, 9.0);
  for (int k = 0; k < 100; ++k) {
    const Vec2 x(ux(rng), uy(rng));
    const double h = 1e-6;
    const Vec2 fd((mon.value(x + Vec2(h, 0)) - mon.value(x - Vec2(h, 0))) / (2 * h),
                  (mon.value(x + Vec2(0, h)) - mon.value(x - Vec2(0, h))) / (2 * h));
    CHECK((mon.gradient(x) - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));
  }
}

TEST_CASE("cell metric is the arithmetic vertex mean") {
  const auto mesh = pitmesh::testing::single_triangle({0, 0}, {1, 0}, {0, 1});
  MetricField m;
  m.tensors = {Mat2::Identity(), 3.0 * Mat2::Identity(), 8.0 * Mat2::Identity()};
  CHECK((cell_metric(mesh, m, 0) - 4.0 * Mat2::Identity()).norm() == 0.0);
}

TEST_CASE("element energy closed form when J is the identity") {
  // Both terms reduce to 2^gamma and |K| is the reference area.
  AdaptParams right;
  right.equilateral_reference = false;
  const double expected_right = 0.5 * (right.theta + 1.0 - 2.0 * right.theta) * std::pow(2.0, 1.5);
  CHECK(element_energy(Mat2::Identity(), Mat2::Identity(), right) ==
        doctest::Approx(expected_right).epsilon(1e-14));
  CHECK(expected_right == doctest::Approx(std::pow(2.0, 1.5) / 3.0));

  const AdaptParams eq;
  const Mat2 ref = reference_edges(eq);
  CHECK(ref.col(0).norm() == doctest::Approx(1.0));
  CHECK(ref.col(1).norm() == doctest::Approx(1.0));
  CHECK((ref.col(1) - ref.col(0)).norm() == doctest::Approx(1.0));
  CHECK(element_energy(ref, Mat2::Identity(), eq) ==
        doctest::Approx(std::sqrt(3.0) / 4.0 * (2.0 / 3.0) * std::pow(2.0, 1.5)).epsilon(1e-14));
}

TEST_CASE("element energy scales as s^(2 - 2 gamma) for a dilated reference cell") {
  const AdaptParams p;
  const Mat2 ref = reference_edges(p);
  const double e1 = element_energy(ref, Mat2::Identity(), p);
  for (double s : {0.1, 0.5, 3.0}) {
    CHECK(element_energy(s * ref, Mat2::Identity(), p) ==
          doctest::Approx(e1 * std::pow(s, 2.0 - 2.0 * p.gamma)).epsilon(1e-13));
  }
}

TEST_CASE("inverted cell in the energy is reported") {
  const AdaptParams p;
  Mat2 flipped;
  flipped << 0.0, 1.0, 1.0, 0.0;
  CHECK_THROWS_AS(element_energy(flipped, Mat2::Identity(), p), InvertedElementError);
  auto mesh = pitmesh::testing::unit_square();
  std::swap(mesh.triangles[1][1], mesh.triangles[1][2]);
  try {
    energy(mesh, identity_metric(4), p);
    FAIL("expected InvertedElementError");
  } catch (const InvertedElementError& e) {
    CHECK(e.cell() == 1);
  }
}

TEST_CASE("energy is a sum over cells and ignores relabeling") {
  const auto mesh = jittered_rectangle(4, 3, 0.05, 2);
  const auto metric = random_anisotropic_metric(mesh.num_vertices(), 8);
  const AdaptParams p;
  const double base = energy(mesh, metric, p);

  const int n = mesh.num_vertices();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(1);
  std::shuffle(perm.begin(), perm.end(), rng);
  TriMesh relabeled = mesh;
  MetricField m2 = metric;
  for (int i = 0; i < n; ++i) {
    relabeled.vertices[perm[i]] = mesh.vertices[i];
    m2.tensors[perm[i]] = metric.tensors[i];
  }
  for (auto& t : relabeled.triangles) {
    for (int& v : t) v = perm[v];
    std::rotate(t.begin(), t.begin() + 1, t.end());
  }
  std::reverse(relabeled.triangles.begin(), relabeled.triangles.end());
  CHECK(energy(relabeled, m2, p) == doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("energy gradient matches finite differences on a random mesh") {
  // 5 x 2 cells with centre vertices: 18 + 10 = 28 vertices, 40 cells.
  const auto mesh = jittered_rectangle(5, 2, 0.04, 5);
  const auto metric = random_anisotropic_metric(mesh.num_vertices(), 6);
  for (bool eq : {true, false}) {
    AdaptParams p;
    p.equilateral_reference = eq;
    const double err = fd_relative_error(
        mesh, [&](const TriMesh& m) { return energy(m, metric, p); },
        [&](const TriMesh& m) { return grad_energy(m, metric, p); });
    CHECK(err < 1e-6);
  }
}

TEST_CASE("position-dependent monitor gradient matches finite differences") {
  // Off-centre pit: no vertex lands on a ridge of the distance function.
  geom::PitSpec pit{0.37, 6.0, 3.0, 21};
  auto mesh = geom::build_domain_mesh({-10.0, 10.0, 10.0}, std::span<const geom::PitSpec>(&pit, 1), 1.5, 3);
  const auto chains = chains_from_tags(mesh);
  const AdaptParams p;
  const auto mon = mackenzie_monitor(mesh, chains, p);
  const double err = fd_relative_error(
      mesh, [&](const TriMesh& m) { return energy(m, mon, p); },
      [&](const TriMesh& m) { return grad_energy(m, mon, p); });
  CHECK(err < 1e-6);
}

TEST_CASE("a rigid translation leaves energy and gradient unchanged") {
  const auto mesh = jittered_rectangle(4, 4, 0.05, 12);
  const auto metric = random_anisotropic_metric(mesh.num_vertices(), 13);
  const AdaptParams p;
  TriMesh shifted = mesh;
  for (auto& v : shifted.vertices) v += Vec2(3.25, -1.5);
  CHECK(energy(shifted, metric, p) == doctest::Approx(energy(mesh, metric, p)).epsilon(1e-12));
  const auto g0 = grad_energy(mesh, metric, p);
  const auto g1 = grad_energy(shifted, metric, p);
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < g0.size(); ++i) {
    diff = std::max(diff, (g0[i] - g1[i]).norm());
    scale = std::max(scale, g0[i].norm());
  }
  CHECK(diff <= 1e-10 * scale);
}

TEST_CASE("structured symmetric mesh with the identity metric is in equilibrium") {
  const auto mesh = geom::structured_rectangle(0, 2, 0, 1, 6, 3);
  const auto motion = classify_vertices(mesh, {});
  for (bool eq : {true, false}) {
    AdaptParams p;
    p.equilateral_reference = eq;
    const auto g = grad_energy(mesh, identity_metric(mesh.num_vertices()), p);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      if (motion[v] == VertexMotion::Free) CHECK(g[v].norm() < 1e-12);
    }
  }
}

TEST_CASE("uniform mesh with mu1 = 0 is minimal among nearby interior shifts") {
  const auto mesh = geom::structured_rectangle(0, 1, 0, 1, 4, 4);
  AdaptParams p;
  p.mu1 = 0.0;
  const auto metric = identity_metric(mesh.num_vertices());
  const double base = energy(mesh, metric, p);
  const auto motion = classify_vertices(mesh, {});
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  for (int trial = 0; trial < 40; ++trial) {
    const Vec2 shift(u(rng), u(rng));
    TriMesh rigid = mesh, random = mesh;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      if (motion[v] != VertexMotion::Free) continue;
      rigid.vertices[v] += shift;
      random.vertices[v] += Vec2(u(rng), u(rng));
    }
    CHECK(energy(rigid, metric, p) >= base);
    CHECK(energy(random, metric, p) >= base);
  }
}

TEST_CASE("vertex classification") {
  auto mesh = pitmesh::testing::small_pit_mesh();
  const auto chains = chains_from_tags(mesh);
  const auto motion = classify_vertices(mesh, chains);
  for (int v : chains[0].vertices) CHECK(motion[v] == VertexMotion::Fixed);
  for (const auto& e : mesh.boundary_edges) {
    for (int v : e.v) {
      const Vec2 x = mesh.vertices[v];
      const bool corner = (x.x() == -10.0 || x.x() == 10.0) && (x.y() == 0.0 || x.y() == 10.0);
      if (corner) {
        CHECK(motion[v] == VertexMotion::Fixed);
      } else if (e.tag.kind == BoundaryKind::Left || e.tag.kind == BoundaryKind::Right) {
        CHECK(motion[v] == VertexMotion::SlideY);
      } else if (e.tag.kind == BoundaryKind::Top) {
        CHECK(motion[v] == VertexMotion::SlideX);
      } else if (e.tag.kind == BoundaryKind::Bottom && motion[v] != VertexMotion::Fixed) {
        CHECK(motion[v] == VertexMotion::SlideX);
      }
    }
  }
}

TEST_CASE("identity metric on a uniform mesh is a stationary point of the flow") {
  const auto mesh = geom::structured_rectangle(0, 2, 0, 1, 6, 3);
  const auto motion = classify_vertices(mesh, {});
  MmpdeReport rep;
  const auto x = mmpde_step(mesh, motion, identity_metric(mesh.num_vertices()), AdaptParams{}, 0.5,
                            &rep);
  double moved = 0.0;
  for (int v = 0; v < mesh.num_vertices(); ++v) moved = std::max(moved, (x[v] - mesh.vertices[v]).norm());
  CHECK(moved < 1e-8);
}

TEST_CASE("one flow step descends, keeps cells positive and respects constraints") {
  auto mesh = pitmesh::testing::small_pit_mesh();
  const auto chains = chains_from_tags(mesh);
  const AdaptParams p;
  const auto motion = classify_vertices(mesh, chains);

  SUBCASE("frozen vertex metric") {
    const auto metric = monitor_mackenzie(mesh, chains, p);
    MmpdeReport rep;
    const auto x = mmpde_step(mesh, motion, metric, p, 0.5, &rep);
    TriMesh after = mesh;
    after.vertices = x;
    CHECK(count_inverted(after) == 0);
    CHECK(rep.energy_after <= rep.energy_before + 1e-10 * std::abs(rep.energy_before));
    CHECK(energy(after, metric, p) == doctest::Approx(rep.energy_after).epsilon(1e-12));
    CHECK(rep.max_displacement > 0.0);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      const Vec2 d = x[v] - mesh.vertices[v];
      switch (motion[v]) {
        case VertexMotion::Fixed: CHECK(d.norm() == 0.0); break;
        case VertexMotion::SlideX: CHECK(d.y() == 0.0); break;
        case VertexMotion::SlideY: CHECK(d.x() == 0.0); break;
        case VertexMotion::Free: break;
      }
    }
  }
  SUBCASE("position-dependent monitor") {
    const auto mon = mackenzie_monitor(mesh, chains, p);
    MmpdeReport rep;
    const auto x = mmpde_step(mesh, motion, mon, p, 0.5, &rep);
    TriMesh after = mesh;
    after.vertices = x;
    CHECK(count_inverted(after) == 0);
    CHECK(rep.energy_after <= rep.energy_before + 1e-10 * std::abs(rep.energy_before));
    CHECK(energy(after, mon, p) == doctest::Approx(rep.energy_after).epsilon(1e-12));
    for (int v : chains[0].vertices) CHECK(x[v] == mesh.vertices[v]);
  }
}

TEST_CASE("the default monitor pulls edges toward the pit") {
  auto mesh = pitmesh::testing::small_pit_mesh(31, 1.0);
  const auto chains = chains_from_tags(mesh);
  const AdaptParams p;
  const double before = min_edge_near_pit(mesh, chains, 1.0);
  TriMesh after = mesh;
  after.vertices = mmpde_step(mesh, chains, mackenzie_monitor(mesh, chains, p), p, 0.5);
  CHECK(min_edge_near_pit(after, chains, 1.0) < before);
}

TEST_CASE("smaller tau equidistributes more within one physical step") {
  auto mesh = pitmesh::testing::small_pit_mesh();
  const auto chains = chains_from_tags(mesh);
  auto deviation = [&](double tau) {
    AdaptParams p;
    p.tau = tau;
    const auto mon = mackenzie_monitor(mesh, chains, p);
    TriMesh after = mesh;
    after.vertices = mmpde_step(mesh, chains, mon, p, 0.5);
    return weighted_equidistribution_deviation(after, chains, sample(after, mon));
  };
  const double slow = deviation(1e-2), fast = deviation(1e-6);
  CHECK(fast < slow);
}

TEST_CASE("flow run to stationarity on a frozen metric zeroes the free gradient") {
  const auto mesh = geom::structured_rectangle(0, 1, 0, 1, 4, 4);
  const auto motion = classify_vertices(mesh, {});
  MetricField metric;
  for (const auto& x : mesh.vertices) {
    metric.tensors.push_back((1.0 + 4.0 * x.x() * x.x()) * Mat2::Identity());
  }
  AdaptParams p;
  p.tau = 1e-2;
  TriMesh cur = mesh;
  MmpdeReport rep;
  for (int k = 0; k < 200 && !rep.stationary; ++k) {
    rep = {};
    cur.vertices = mmpde_step(cur, motion, metric, p, 10.0, &rep);
  }
  const auto g = grad_energy(cur, metric, p);
  double worst = 0.0;
  for (int v = 0; v < cur.num_vertices(); ++v) {
    switch (motion[v]) {
      case VertexMotion::Free: worst = std::max(worst, g[v].cwiseAbs().maxCoeff()); break;
      case VertexMotion::SlideX: worst = std::max(worst, std::abs(g[v].x())); break;
      case VertexMotion::SlideY: worst = std::max(worst, std::abs(g[v].y())); break;
      case VertexMotion::Fixed: break;
    }
  }
  CHECK(worst < 1e-8);
  CHECK(count_inverted(cur) == 0);
}

TEST_CASE("smoothing converges and improves equidistribution") {
  auto mesh = pitmesh::testing::small_pit_mesh();
  const auto chains = chains_from_tags(mesh);
  const AdaptParams p;
  int calls = 0;
  const auto res = smooth_mesh(mesh, chains, p, [&](const TriMesh&, std::span<const PitChain>) { ++calls; });
  CHECK(res.converged);
  CHECK(res.iterations <= p.smoothing_max_iters);
  CHECK(calls == res.iterations);
  CHECK(static_cast<int>(res.displacement_trace.size()) == res.iterations);
  CHECK(res.displacement_trace.back() < p.smoothing_tol);
  CHECK(count_inverted(res.mesh) == 0);

  const auto before = monitor_mackenzie(mesh, chains, p);
  const auto after = monitor_mackenzie(res.mesh, chains, p);
  CHECK(equidistribution_spread(res.mesh, after) < equidistribution_spread(mesh, before));

  const int n = static_cast<int>(res.displacement_trace.size());
  if (n >= 6) {
    for (int k = n - 5; k < n; ++k) {
      CHECK(res.displacement_trace[k] <= res.displacement_trace[k - 1] * (1.0 + 1e-9));
    }
  }

  const auto again = smooth_mesh(res.mesh, chains, p);
  CHECK(again.converged);
  CHECK(again.iterations == 1);
}

TEST_CASE("adapt parameter validation") {
  AdaptParams p;
  CHECK_NOTHROW(p.validate());
  p.theta = 0.5;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.gamma = 1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.tau = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.mu1 = -1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.mu2 = -0.1;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("1D equidistribution of closed-form densities") {
  const auto flat = solve_equidistribution_1d([](double) { return 1.0; }, 0.0, 1.0, 4);
  const std::vector<double> quarters{0.0, 0.25, 0.5, 0.75, 1.0};
  REQUIRE(flat.size() == 5);
  for (int i = 0; i <= 4; ++i) CHECK(std::abs(flat[i] - quarters[i]) <= 1e-12);

  // Zero density at the left end is allowed.
  const auto ramp = solve_equidistribution_1d([](double x) { return 2.0 * x; }, 0.0, 1.0, 4);
  for (int i = 0; i <= 4; ++i) CHECK(std::abs(ramp[i] - std::sqrt(i / 4.0)) <= 1e-8);

  const int n = 10;
  const auto lin = solve_equidistribution_1d([](double x) { return 1.0 + x; }, 0.0, 1.0, n);
  for (int i = 0; i <= n; ++i) {
    CHECK(std::abs(lin[i] - (-1.0 + std::sqrt(1.0 + 3.0 * i / n))) <= 1e-8);
  }
}

TEST_CASE("1D equidistribution of random smooth densities") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> amp(0.0, 0.9), freq(0.5, 6.0), phase(0.0, 6.28), ends(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a1 = amp(rng), f1 = freq(rng), p1 = phase(rng);
    const double a2 = amp(rng) * (1.0 - a1), f2 = freq(rng), p2 = phase(rng);
    auto rho = [=](double x) { return 1.0 + a1 * std::sin(f1 * x + p1) + a2 * std::cos(f2 * x + p2); };
    double a = ends(rng), b = ends(rng);
    if (a > b) std::swap(a, b);
    b += 0.5;
    const int n = 8 + trial;
    const auto x = solve_equidistribution_1d(rho, a, b, n);
    REQUIRE(static_cast<int>(x.size()) == n + 1);
    CHECK(x.front() == a);
    CHECK(x.back() == b);
    // Closed-form antiderivative as the brute-force reference.
    auto cum = [=](double t) {
      return t - a1 / f1 * std::cos(f1 * t + p1) + a2 / f2 * std::sin(f2 * t + p2);
    };
    const double target = (cum(b) - cum(a)) / n;
    for (int i = 0; i < n; ++i) {
      CHECK(x[i + 1] > x[i]);
      CHECK(std::abs((cum(x[i + 1]) - cum(x[i])) / target - 1.0) <= 1e-8);
    }
  }
}

TEST_CASE("1D equidistribution rejects a negative density") {
  CHECK_THROWS_AS(solve_equidistribution_1d([](double x) { return x - 0.5; }, 0.0, 1.0, 4),
                  ValidationError);
  CHECK_THROWS_AS(solve_equidistribution_1d([](double) { return 1.0; }, 0.0, 1.0, 0), ValidationError);
}
