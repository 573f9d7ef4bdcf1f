#pragma once

#include <vector>

#include <Eigen/Core>

#include "nvphonon/material.hpp"

namespace nvp {

enum class ModeFamily { torsional, spheroidal };

/// One eigenmode of a free, stress-free elastic sphere.
///
/// Fields use real spherical harmonics (see RealHarmonic). For spheroidal
/// modes (p, q) is a unit vector; `norm` scales the dimensionless shape
/// returned by displacement_field to unit L2 norm over the sphere.
struct SphereMode {
  ModeFamily family = ModeFamily::spheroidal;
  int l = 0, m = 0, n = 0;
  double chi = 0;     ///< k R
  double xi = 0;      ///< h R = (v_t / v_l) chi, spheroidal only
  double radius = 0;  ///< m
  double nu = 0;      ///< v_t chi / R
  double p = 1, q = 0;
  double norm = 0;    ///< m^(-3/2)
};

struct SpheroidalRoot {
  double chi, xi, p, q;
};

/// Torsional characteristic function (l-1) j_l(chi) - chi j_{l+1}(chi).
double torsional_function(int l, double chi);

/// Spheroidal boundary matrix [[alpha, beta], [gamma, delta]] at chi for the
/// velocity ratio v_t / v_l.
Eigen::Matrix2d spheroidal_matrix(int l, double chi, double vt_over_vl);

/// alpha for l = 0, otherwise the determinant of spheroidal_matrix.
double spheroidal_function(int l, double chi, double vt_over_vl);

/// First n_max positive torsional roots (l >= 1) below chi_max.
std::vector<double> torsional_eigenvalues(int l, int n_max, double chi_max = 30.0);

/// First n_max spheroidal roots with unit null vector (p, q), p >= 0.
std::vector<SpheroidalRoot> spheroidal_eigenvalues(int l, int n_max, const MaterialModel& material,
                                                   double chi_max = 30.0);

/// Solves and normalizes mode (family, l, m, n) of a spherical geometry.
SphereMode solve_mode(ModeFamily family, int l, int m, int n, const Geometry& geometry,
                      const MaterialModel& material, double chi_max = 30.0);

/// Sets `norm` so that the integral of |N u|^2 over the sphere is one.
SphereMode normalize_mode(SphereMode mode, const Geometry& geometry);

/// Integral of |u|^2 over the sphere for the shape scaled by mode.norm.
double mode_norm_integral(const SphereMode& mode);

/// Dimensionless mode shape at a Cartesian point (origin at the sphere centre).
Eigen::Vector3d displacement_field(const SphereMode& mode, const Eigen::Vector3d& point);

/// Divergence of the dimensionless shape, in 1/m.
double displacement_divergence(const SphereMode& mode, const Eigen::Vector3d& point);

/// Deformation-potential coupling at an NV position, in the convention
/// H = -eta nu (-i)(a^dag - a)|e><e|. Zero for torsional modes.
double coupling_eta(const SphereMode& mode, const Eigen::Vector3d& position,
                    const MaterialModel& material);

struct EtaSample {
  double r, theta, eta;
};

/// eta on an (nr x ntheta) grid of the phi = `phi` half plane.
std::vector<EtaSample> eta_map(const SphereMode& mode, const MaterialModel& material, int nr,
                               int ntheta, double phi = 0.0);

}  // namespace nvp
