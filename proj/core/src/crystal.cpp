#include "pitmesh/crystal.hpp"

#include "pitmesh/error.hpp"

#include <Eigen/Geometry>

#include <sstream>

namespace pitmesh::crystal {

Eigen::Matrix3d ZoneOrientation::matrix() const {
  Eigen::Matrix3d m;
  m.col(0) = i;
  m.col(1) = j;
  m.col(2) = k;
  return m;
}

ZoneOrientation orientation_from_axes(const Vec3i& zone_axis, const Vec3i& x_direction) {
  if (zone_axis.isZero() || x_direction.isZero()) {
    throw ValidationError("zone axis and x direction must be nonzero");
  }
  const int dot = zone_axis.dot(x_direction);
  if (dot != 0) {
    std::ostringstream os;
    os << "zone axis [" << zone_axis.transpose() << "] and x direction [" << x_direction.transpose()
       << "] are not perpendicular (dot product " << dot << ")";
    throw ValidationError(os.str());
  }
  ZoneOrientation o;
  o.i = x_direction.cast<double>().normalized();
  o.k = zone_axis.cast<double>().normalized();
  o.j = o.k.cross(o.i);
  return o;
}

Vec3 transform_normal(const ZoneOrientation& orientation, const Vec2& n) {
  return orientation.i * n.x() + orientation.j * n.y();
}

CubeFace best_cube_face(const Vec3& n_cd) {
  CubeFace best{n_cd.x(), 0};
  const double candidates[6] = {n_cd.x(), -n_cd.x(), n_cd.y(), -n_cd.y(), n_cd.z(), -n_cd.z()};
  for (int e = 1; e < 6; ++e) {
    if (candidates[e] > best.dot) best = {candidates[e], e};
  }
  return best;
}

double vcorr_from_crystal_normal(const VcorrParams& params, const Vec3& n_cd) {
  return params.k_const - params.s_const * (1.0 - best_cube_face(n_cd).dot);
}

const ZoneOrientation* orientation_at(const MaterialSpec& material, const Vec2& position) {
  if (const auto* c = std::get_if<Crystal>(&material)) return &c->orientation;
  if (const auto* b = std::get_if<Bicrystal>(&material)) {
    return position.x() < b->x_interface ? &b->left : &b->right;
  }
  return nullptr;
}

double vcorr(const MaterialSpec& material, const VcorrParams& params, const Vec2& position,
             const Vec2& n) {
  if (const auto* h = std::get_if<Homogeneous>(&material)) return h->vcorr;
  const ZoneOrientation* o = orientation_at(material, position);
  return vcorr_from_crystal_normal(params, transform_normal(*o, n));
}

}  // namespace pitmesh::crystal
