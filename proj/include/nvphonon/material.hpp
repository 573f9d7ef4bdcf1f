#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>

namespace nvp {

/// Elastic, optical and coupling constants of the host crystal. SI units;
/// every frequency and rate is angular (rad/s).
struct MaterialModel {
  double zeta;      ///< strain-coupling energy scale
  double beta;      ///< nitrogen-bond asymmetry factor
  double rho;       ///< mass density, kg/m^3
  double v_t;       ///< transverse speed of sound, m/s
  double v_l;       ///< longitudinal speed of sound, m/s
  double c_pbc;     ///< effective speed of sound for the periodic-boundary model, m/s
  double gamma_e;   ///< bulk excited-state decay rate
  double gamma_nd;  ///< nanodiamond-modified decay rate
  double lambda0;   ///< zero-phonon-line vacuum wavelength, m
  double n_refr;    ///< refractive index
  double xi0;       ///< zero-phonon-line emission fraction
  double delta_es;  ///< excited-state splitting scale

  friend bool operator==(const MaterialModel&, const MaterialModel&) = default;
};

/// Diamond parameter set. Returns the same value on every call.
const MaterialModel& diamond_default();

/// Throws Error(InvalidParameter) if an invariant of MaterialModel is broken.
void validate(const MaterialModel& material);

/// Applies `key = value` overrides (keys are the MaterialModel field names,
/// optionally prefixed with "material."). Unknown keys throw ConfigError.
MaterialModel with_overrides(MaterialModel base, const std::map<std::string, double>& overrides);

/// Reads a flat `key = value` file (SI units, '#' comments) of material overrides.
MaterialModel load_material(const std::filesystem::path& path,
                            const MaterialModel& base = diamond_default());

enum class Shape { sphere, box };

struct Geometry {
  Shape shape;
  double radius;                    ///< sphere only, m
  std::array<double, 3> edges;      ///< box only, m
  double mass;                      ///< kg

  double volume() const;
  /// Extent along a Cartesian axis (0,1,2); the diameter for spheres.
  double extent(int axis) const;
};

/// Builds a geometry. For a sphere `dimensions[0]` is the diameter; for a box
/// the three edge lengths.
Geometry make_geometry(Shape shape, const std::array<double, 3>& dimensions,
                       const MaterialModel& material);

inline Geometry make_sphere(double diameter, const MaterialModel& material) {
  return make_geometry(Shape::sphere, {diameter, 0.0, 0.0}, material);
}

}  // namespace nvp
