#include "nvphonon/phonon_sphere.hpp"

#include <cmath>
#include <functional>
#include <string>

#include <Eigen/LU>

#include "nvphonon/errors.hpp"
#include "nvphonon/special_functions.hpp"
#include "nvphonon/units.hpp"

namespace nvp {

namespace {

constexpr double kScanStep = 0.01;
constexpr double kBisectTol = 1e-12;

std::vector<double> scan_roots(const std::function<double(double)>& f, int n_max,
                               double chi_max) {
  std::vector<double> roots;
  double a = kScanStep;
  double fa = f(a);
  while (a < chi_max && static_cast<int>(roots.size()) < n_max) {
    const double b = std::min(a + kScanStep, chi_max);
    const double fb = f(b);
    if (fa == 0.0) {
      roots.push_back(a);
    } else if (fa * fb < 0.0) {
      double lo = a, hi = b, flo = fa;
      while (hi - lo > kBisectTol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    a = b;
    fa = fb;
  }
  if (static_cast<int>(roots.size()) < n_max)
    throw Error(ErrorCode::NoRootInBracket,
                "found " + std::to_string(roots.size()) + " of " + std::to_string(n_max) +
                    " roots below chi_max = " + std::to_string(chi_max));
  return roots;
}

struct Spherical {
  double r, theta, phi;
  Eigen::Vector3d er, etheta, ephi;
};

Spherical to_spherical(const Eigen::Vector3d& x) {
  Spherical s;
  s.r = x.norm();
  s.theta = s.r > 0 ? std::acos(std::clamp(x.z() / s.r, -1.0, 1.0)) : 0.0;
  s.phi = std::atan2(x.y(), x.x());
  const double st = std::sin(s.theta), ct = std::cos(s.theta);
  const double sp = std::sin(s.phi), cp = std::cos(s.phi);
  s.er = {st * cp, st * sp, ct};
  s.etheta = {ct * cp, ct * sp, -st};
  s.ephi = {-sp, cp, 0.0};
  return s;
}

void check_inside(const SphereMode& mode, double r) {
  if (r > mode.radius * (1.0 + 1e-12))
    throw Error(ErrorCode::PointOutsideSphere, "point lies outside the sphere");
}

// Radial profiles: u = U(r) S r̂ + V(r) ∇_Ω S (spheroidal) or
// u = W(r) (∇_Ω S × r̂) (torsional). The spheroidal shape is
// p ∇[j_l(hr) S]/h + q ∇×∇×[r j_l(kr) S]/k, the scaling under which (p, q)
// is the null vector of spheroidal_matrix.
struct Radial {
  double U, V;
};

Radial spheroidal_radial(const SphereMode& mode, double r) {
  const double k = mode.chi / mode.radius;
  const double h = mode.xi / mode.radius;
  const int l = mode.l;
  const double kr = k * r, hr = h * r;
  const double jk_over = sph_bessel_j_over_x(l, kr);
  Radial out;
  out.U = mode.p * sph_bessel_j_prime(l, hr) + mode.q * l * (l + 1) * jk_over;
  out.V = l == 0 ? 0.0
                 : mode.p * sph_bessel_j_over_x(l, hr) +
                       mode.q * (jk_over + sph_bessel_j_prime(l, kr));
  return out;
}

double radial_density(const SphereMode& mode, double r) {
  const double ll = mode.l * (mode.l + 1.0);
  if (mode.family == ModeFamily::torsional) {
    const double w = sph_bessel_j(mode.l, mode.chi / mode.radius * r);
    return ll * w * w * r * r;
  }
  const Radial f = spheroidal_radial(mode, r);
  return (f.U * f.U + ll * f.V * f.V) * r * r;
}

}  // namespace

double torsional_function(int l, double chi) {
  const auto j = sph_bessel_j_all(l + 1, chi);
  return (l - 1.0) * j[l] - chi * j[l + 1];
}

Eigen::Matrix2d spheroidal_matrix(int l, double chi, double vt_over_vl) {
  const double xi = vt_over_vl * chi;
  const int top = l + 1;
  const auto jx = sph_bessel_j_all(top, xi);
  const auto jc = sph_bessel_j_all(top, chi);
  const double jx_lm1 = l >= 1 ? jx[l - 1] : std::cos(xi) / xi;
  const double jc_lm1 = l >= 1 ? jc[l - 1] : std::cos(chi) / chi;
  const double c2 = chi * chi / xi;
  Eigen::Matrix2d m;
  m(0, 0) = -c2 * jx[l] + 2.0 * (l + 2) * jx[l + 1];
  m(0, 1) = l * chi * jc[l] - 2.0 * l * (l + 2) * jc[l + 1];
  m(1, 0) = -c2 * jx[l] + 2.0 * (l - 1) * jx_lm1;
  m(1, 1) = (l + 1.0) * (2.0 * (l - 1) * jc_lm1 - chi * jc[l]);
  return m;
}

double spheroidal_function(int l, double chi, double vt_over_vl) {
  const Eigen::Matrix2d m = spheroidal_matrix(l, chi, vt_over_vl);
  return l == 0 ? m(0, 0) : m.determinant();
}

std::vector<double> torsional_eigenvalues(int l, int n_max, double chi_max) {
  if (l < 1) throw Error(ErrorCode::InvalidQuantumNumber, "torsional modes need l >= 1");
  if (n_max < 1) throw Error(ErrorCode::InvalidQuantumNumber, "n_max must be >= 1");
  return scan_roots([l](double x) { return torsional_function(l, x); }, n_max, chi_max);
}

std::vector<SpheroidalRoot> spheroidal_eigenvalues(int l, int n_max, const MaterialModel& material,
                                                   double chi_max) {
  if (l < 0) throw Error(ErrorCode::InvalidQuantumNumber, "spheroidal modes need l >= 0");
  if (n_max < 1) throw Error(ErrorCode::InvalidQuantumNumber, "n_max must be >= 1");
  if (!(material.v_t < material.v_l))
    throw Error(ErrorCode::InvalidParameter, "need v_t < v_l");
  const double ratio = material.v_t / material.v_l;
  const auto chis =
      scan_roots([l, ratio](double x) { return spheroidal_function(l, x, ratio); }, n_max, chi_max);

  std::vector<SpheroidalRoot> out;
  for (double chi : chis) {
    SpheroidalRoot root{chi, ratio * chi, 1.0, 0.0};
    if (l > 0) {
      const Eigen::Matrix2d m = spheroidal_matrix(l, chi, ratio);
      const double n0 = m.row(0).norm(), n1 = m.row(1).norm();
      if (std::max(n0, n1) < 1e-13)
        throw Error(ErrorCode::DegenerateNullspace,
                    "boundary matrix vanishes at chi = " + std::to_string(chi));
      const Eigen::RowVector2d row = n0 >= n1 ? m.row(0) : m.row(1);
      Eigen::Vector2d v(row(1), -row(0));
      v.normalize();
      if (v(0) < 0 || (v(0) == 0 && v(1) < 0)) v = -v;
      root.p = v(0);
      root.q = v(1);
    }
    out.push_back(root);
  }
  return out;
}

SphereMode solve_mode(ModeFamily family, int l, int m, int n, const Geometry& geometry,
                      const MaterialModel& material, double chi_max) {
  if (geometry.shape != Shape::sphere)
    throw Error(ErrorCode::InvalidParameter, "sphere modes need a spherical geometry");
  if (std::abs(m) > l || n < 0)
    throw Error(ErrorCode::InvalidQuantumNumber, "need |m| <= l and n >= 0");
  SphereMode mode;
  mode.family = family;
  mode.l = l;
  mode.m = m;
  mode.n = n;
  mode.radius = geometry.radius;
  if (family == ModeFamily::torsional) {
    mode.chi = torsional_eigenvalues(l, n + 1, chi_max)[n];
    mode.xi = 0;
    mode.p = mode.q = 0;
  } else {
    const auto root = spheroidal_eigenvalues(l, n + 1, material, chi_max)[n];
    mode.chi = root.chi;
    mode.xi = root.xi;
    mode.p = root.p;
    mode.q = root.q;
  }
  mode.nu = material.v_t * mode.chi / geometry.radius;
  return normalize_mode(mode, geometry);
}

SphereMode normalize_mode(SphereMode mode, const Geometry& geometry) {
  mode.radius = geometry.radius;
  mode.norm = 1.0;
  const double integral = mode_norm_integral(mode);
  mode.norm = 1.0 / std::sqrt(integral);
  return mode;
}

double mode_norm_integral(const SphereMode& mode) {
  const double R = mode.radius;
  auto integrate = [&](int n) {
    const GaussRule rule = gauss_legendre(n);
    double sum = 0;
    for (int i = 0; i < n; ++i)
      sum += rule.weights[i] * radial_density(mode, 0.5 * R * (rule.nodes[i] + 1.0));
    return 0.5 * R * sum;
  };
  double prev = integrate(16);
  for (int n = 32; n <= 512; n *= 2) {
    const double cur = integrate(n);
    if (std::abs(cur - prev) <= 1e-13 * std::abs(cur)) return mode.norm * mode.norm * cur;
    prev = cur;
  }
  throw Error(ErrorCode::QuadratureNotConverged, "radial quadrature did not converge");
}

Eigen::Vector3d displacement_field(const SphereMode& mode, const Eigen::Vector3d& point) {
  const Spherical s = to_spherical(point);
  check_inside(mode, s.r);
  const RealHarmonic y = real_spherical_harmonic(mode.l, mode.m, s.theta, s.phi);
  if (mode.family == ModeFamily::torsional) {
    const double w = sph_bessel_j(mode.l, mode.chi / mode.radius * s.r);
    return w * (y.dphi_over_sin * s.etheta - y.dtheta * s.ephi);
  }
  const Radial f = spheroidal_radial(mode, s.r);
  return f.U * y.value * s.er + f.V * (y.dtheta * s.etheta + y.dphi_over_sin * s.ephi);
}

double displacement_divergence(const SphereMode& mode, const Eigen::Vector3d& point) {
  const Spherical s = to_spherical(point);
  check_inside(mode, s.r);
  if (mode.family == ModeFamily::torsional) return 0.0;
  const double h = mode.xi / mode.radius;
  const RealHarmonic y = real_spherical_harmonic(mode.l, mode.m, s.theta, s.phi);
  return -mode.p * h * sph_bessel_j(mode.l, h * s.r) * y.value;
}

double coupling_eta(const SphereMode& mode, const Eigen::Vector3d& position,
                    const MaterialModel& material) {
  const double div = mode.norm * displacement_divergence(mode, position);
  return -material.zeta * std::sqrt(kHbar / (2.0 * material.rho * mode.nu)) * div / mode.nu;
}

std::vector<EtaSample> eta_map(const SphereMode& mode, const MaterialModel& material, int nr,
                               int ntheta, double phi) {
  if (nr < 2 || ntheta < 2) throw Error(ErrorCode::InvalidParameter, "eta map needs >= 2 points per axis");
  std::vector<EtaSample> out;
  out.reserve(static_cast<std::size_t>(nr) * ntheta);
  for (int i = 0; i < nr; ++i) {
    const double r = mode.radius * i / (nr - 1);
    for (int j = 0; j < ntheta; ++j) {
      const double th = kPi * j / (ntheta - 1);
      const Eigen::Vector3d x(r * std::sin(th) * std::cos(phi), r * std::sin(th) * std::sin(phi),
                              r * std::cos(th));
      out.push_back({r, th, coupling_eta(mode, x, material)});
    }
  }
  return out;
}

}  // namespace nvp
