#pragma once

#include "pitmesh/mesh.hpp"

#include <Eigen/Core>

#include <variant>

namespace pitmesh::crystal {

using Vec3 = Eigen::Vector3d;
using Vec3i = Eigen::Vector3i;

// Columns of the crystal-to-lab rotation: i is the crystal direction laid
// along the domain x axis, k the zone axis (out of plane), j = k x i.
struct ZoneOrientation {
  Vec3 i = Vec3::UnitX();
  Vec3 j = Vec3::UnitY();
  Vec3 k = Vec3::UnitZ();

  Eigen::Matrix3d matrix() const;
};

struct Homogeneous {
  double vcorr = -0.24;  // volts
};

struct Crystal {
  ZoneOrientation orientation;
};

// Two grains split at x = x_interface; points exactly on the interface use
// the right grain.
struct Bicrystal {
  double x_interface = 0.0;  // micrometers
  ZoneOrientation left;
  ZoneOrientation right;
};

using MaterialSpec = std::variant<Homogeneous, Crystal, Bicrystal>;

// V_corr = k - s * (1 - max_e e . n_cd) over the six signed cube-face directions.
struct VcorrParams {
  double k_const = -0.2297;
  double s_const = 0.054;
};

// Throws ValidationError unless the two directions are nonzero and perpendicular.
ZoneOrientation orientation_from_axes(const Vec3i& zone_axis, const Vec3i& x_direction);

Vec3 transform_normal(const ZoneOrientation& orientation, const Vec2& n);

// Largest signed cube-face component of n_cd, and which of the six
// directions attains it (0..5 for +x,-x,+y,-y,+z,-z; first wins on ties).
struct CubeFace {
  double dot = 0.0;
  int index = 0;
};
CubeFace best_cube_face(const Vec3& n_cd);

double vcorr_from_crystal_normal(const VcorrParams& params, const Vec3& n_cd);

double vcorr(const MaterialSpec& material, const VcorrParams& params, const Vec2& position,
             const Vec2& n);

// The orientation that applies at a given position (nullptr for homogeneous).
const ZoneOrientation* orientation_at(const MaterialSpec& material, const Vec2& position);

}  // namespace pitmesh::crystal
