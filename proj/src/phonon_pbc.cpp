#include "nvphonon/phonon_pbc.hpp"

#include <cmath>

#include "nvphonon/errors.hpp"
#include "nvphonon/units.hpp"

namespace nvp {

double lamb_dicke_eta(double zeta, double k, double nu, double mass) {
  return zeta * (k / nu) * std::sqrt(kHbar / (2.0 * mass * nu));
}

PbcMode eta_general_shape(const Geometry& geometry, int axis, const MaterialModel& material) {
  if (axis < 0 || axis > 2) throw Error(ErrorCode::InvalidParameter, "axis must be 0, 1 or 2");
  const double l = geometry.extent(axis);
  if (!(l > 0) || !(geometry.mass > 0))
    throw Error(ErrorCode::NonPositiveDimension, "mode extent and mass must be positive");
  PbcMode mode;
  mode.k = kTwoPi / l;
  mode.direction = Eigen::Vector3d::Unit(axis);
  mode.nu = material.c_pbc * mode.k;
  mode.eta = lamb_dicke_eta(material.zeta, mode.k, mode.nu, geometry.mass);
  return mode;
}

PbcMode lowest_mode(const Geometry& geometry, const MaterialModel& material) {
  int axis = 0;
  if (geometry.shape == Shape::box) {
    for (int i = 1; i < 3; ++i)
      if (geometry.extent(i) > geometry.extent(axis)) axis = i;
  }
  return eta_general_shape(geometry, axis, material);
}

}  // namespace nvp
