#pragma once

#include <Eigen/Core>

#include "nvphonon/material.hpp"

namespace nvp {

/// Longitudinal acoustic mode under periodic boundary conditions (e ∥ k).
struct PbcMode {
  double k;                   ///< wavevector magnitude, 1/m
  Eigen::Vector3d direction;  ///< unit vector along k (and the polarization)
  double nu;                  ///< angular frequency, c_pbc * k
  double eta;                 ///< Lamb-Dicke-like coupling coefficient
};

/// Coupling coefficient eta = zeta (k/nu) sqrt(hbar / (2 M nu)).
double lamb_dicke_eta(double zeta, double k, double nu, double mass);

/// Lowest mode k = 2 pi / l with l the largest extent (the diameter for a sphere).
PbcMode lowest_mode(const Geometry& geometry, const MaterialModel& material);

/// Mode along Cartesian `axis` of a box, l the edge length along that axis.
/// Spheres are accepted too (every axis has l = diameter).
PbcMode eta_general_shape(const Geometry& geometry, int axis, const MaterialModel& material);

}  // namespace nvp
