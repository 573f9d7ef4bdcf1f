#include <doctest.h>

#include <cmath>
#include <functional>

#include "nvphonon/errors.hpp"
#include "nvphonon/phonon_pbc.hpp"
#include "nvphonon/phonon_sphere.hpp"
#include "nvphonon/special_functions.hpp"
#include "nvphonon/units.hpp"

using namespace nvp;
using Eigen::Vector3d;

namespace {

double sj0(double x) { return std::sin(x) / x; }
double sj1(double x) { return std::sin(x) / (x * x) - std::cos(x) / x; }
double sj2(double x) { return (3 / (x * x * x) - 1 / x) * std::sin(x) - 3 * std::cos(x) / (x * x); }

double bisect(const std::function<double(double)>& f, double a, double b) {
  double fa = f(a);
  for (int i = 0; i < 200; ++i) {
    const double c = 0.5 * (a + b), fc = f(c);
    if ((fc < 0) == (fa < 0)) {
      a = c;
      fa = fc;
    } else {
      b = c;
    }
  }
  return 0.5 * (a + b);
}

int count_sign_changes(const std::function<double(double)>& f, double lo, double hi, double step) {
  int n = 0;
  double prev = f(lo);
  for (double x = lo + step; x <= hi; x += step) {
    const double cur = f(x);
    if (cur * prev < 0) ++n;
    prev = cur;
  }
  return n;
}

// 5-point central difference of a vector field component.
template <class F>
double d_dx(F&& f, Vector3d x, int axis, int comp, double h) {
  auto at = [&](double s) {
    Vector3d y = x;
    y(axis) += s;
    return f(y)(comp);
  };
  return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
}

template <class F>
Vector3d curl(F&& f, const Vector3d& x, double h) {
  return {d_dx(f, x, 1, 2, h) - d_dx(f, x, 2, 1, h), d_dx(f, x, 2, 0, h) - d_dx(f, x, 0, 2, h),
          d_dx(f, x, 0, 1, h) - d_dx(f, x, 1, 0, h)};
}

const MaterialModel& diamond() { return diamond_default(); }

}  // namespace

TEST_CASE("torsional l=1 roots are the zeros of j2") {
  const auto roots = torsional_eigenvalues(1, 3);
  CHECK(roots[0] == doctest::Approx(bisect(sj2, 5.0, 6.5)).epsilon(1e-11));
  CHECK(roots[0] == doctest::Approx(5.7635).epsilon(1e-4));
  CHECK(roots[1] == doctest::Approx(bisect(sj2, 8.5, 9.5)).epsilon(1e-11));
  for (double r : roots) CHECK(std::abs(torsional_function(1, r)) < 1e-10);
}

TEST_CASE("torsional roots do not depend on the material") {
  auto soft = with_overrides(diamond(), {{"v_t", 2e3}, {"v_l", 5e3}, {"rho", 1000}});
  const auto g1 = make_sphere(10e-9, diamond());
  const auto g2 = make_sphere(10e-9, soft);
  CHECK(solve_mode(ModeFamily::torsional, 2, 0, 1, g1, diamond()).chi ==
        solve_mode(ModeFamily::torsional, 2, 0, 1, g2, soft).chi);
  const auto r = torsional_eigenvalues(2, 3);
  REQUIRE(r.size() == 3);
  CHECK(r[0] < r[1]);
  CHECK(r[1] < r[2]);
}

TEST_CASE("breathing mode root") {
  const double ratio = diamond().v_t / diamond().v_l;
  CHECK(ratio == doctest::Approx(0.7007).epsilon(1e-4));
  auto alpha0 = [ratio](double chi) {
    const double xi = ratio * chi;
    return -(chi * chi / xi) * sj0(xi) + 4 * sj1(xi);
  };
  const auto roots = spheroidal_eigenvalues(0, 2, diamond());
  CHECK(roots[0].chi == doctest::Approx(bisect(alpha0, 2.0, 4.0)).epsilon(1e-11));
  CHECK(roots[0].q == 0.0);
  CHECK(roots[0].p == 1.0);
  CHECK(roots[0].xi == doctest::Approx(ratio * roots[0].chi).epsilon(1e-15));
  CHECK(spheroidal_eigenvalues(2, 1, diamond())[0].chi < roots[0].chi);
}

TEST_CASE("root residuals and no missed roots") {
  const double ratio = diamond().v_t / diamond().v_l;
  for (int l = 0; l <= 4; ++l) {
    auto f = [l, ratio](double x) { return spheroidal_function(l, x, ratio); };
    const int dense = count_sign_changes(f, 1e-3, 20.0, 1e-3);
    const auto roots = spheroidal_eigenvalues(l, dense, diamond(), 20.0);
    CHECK(static_cast<int>(roots.size()) == dense);
    CHECK_THROWS_AS(spheroidal_eigenvalues(l, dense + 1, diamond(), 20.0), Error);
    for (const auto& r : roots) CHECK(std::abs(f(r.chi)) < 1e-10);
    if (l >= 1) {
      auto g = [l](double x) { return torsional_function(l, x); };
      const int tdense = count_sign_changes(g, 1e-3, 20.0, 1e-3);
      CHECK(static_cast<int>(torsional_eigenvalues(l, tdense, 20.0).size()) == tdense);
    }
  }
}

TEST_CASE("spheroidal modes are traction free") {
  // Independent oracle: stresses of the field at r = R from finite-difference
  // radial derivatives of the mode profile.
  const auto g = make_sphere(10e-9, diamond());
  const double lam_over_mu = std::pow(diamond().v_l / diamond().v_t, 2) - 2;
  for (int l = 0; l <= 4; ++l)
    for (int n = 0; n < 3; ++n) {
      const auto mode = solve_mode(ModeFamily::spheroidal, l, 0, n, g, diamond());
      const double R = mode.radius;
      const double th = 0.7;
      auto urad = [&](double r) {
        const Vector3d x(r * std::sin(th), 0, r * std::cos(th));
        return displacement_field(mode, x).dot(x.normalized());
      };
      auto utan = [&](double r) {
        const Vector3d x(r * std::sin(th), 0, r * std::cos(th));
        return displacement_field(mode, x).dot(Vector3d(std::cos(th), 0, -std::sin(th)));
      };
      const double h = 1e-4 * R;
      auto deriv = [&](auto f) {
        return (3 * f(R) - 4 * f(R - h) + f(R - 2 * h)) / (2 * h);
      };
      const Vector3d surf(R * std::sin(th), 0, R * std::cos(th));
      const double div = displacement_divergence(mode, surf);
      const double srr = lam_over_mu * div + 2 * deriv(urad);
      // e_rθ part: (1/r) ∂θ u_r + ∂r u_θ - u_θ / r
      const double dth = 1e-6;
      auto urad_th = [&](double t) {
        const Vector3d x(R * std::sin(t), 0, R * std::cos(t));
        return displacement_field(mode, x).dot(x.normalized());
      };
      const double srt = (urad_th(th + dth) - urad_th(th - dth)) / (2 * dth) / R + deriv(utan) - utan(R) / R;
      const double scale = std::abs(lam_over_mu * div) + std::abs(2 * deriv(urad)) + std::abs(utan(R) / R) + 1 / R;
      CAPTURE(l);
      CAPTURE(n);
      CHECK(std::abs(srr) < 1e-6 * scale);
      CHECK(std::abs(srt) < 1e-6 * scale);
    }
}

TEST_CASE("torsional modes are traction free") {
  for (int l = 1; l <= 4; ++l)
    for (double chi : torsional_eigenvalues(l, 3)) {
      // d/dr [j_l(kr)/r] at r = R, in units of R
      const double h = 1e-6;
      auto f = [l](double x) { return sph_bessel_j(l, x) / x; };
      CHECK(std::abs((f(chi + h) - f(chi - h)) / (2 * h)) < 1e-8);
    }
}

TEST_CASE("displacement field shapes") {
  const auto g = make_sphere(10e-9, diamond());
  const double R = g.radius;
  SUBCASE("torsional fields have no radial component") {
    for (int m = -2; m <= 2; ++m) {
      const auto mode = solve_mode(ModeFamily::torsional, 2, m, 0, g, diamond());
      for (const Vector3d x : {Vector3d(0.3, 0.2, -0.4), Vector3d(-0.1, 0.6, 0.5), Vector3d(0, 0, 0.9)}) {
        const Vector3d u = displacement_field(mode, x * R);
        CHECK(std::abs(u.dot(x.normalized())) <= 1e-12 * (u.norm() + 1e-300));
      }
    }
  }
  SUBCASE("breathing mode is radial and isotropic") {
    const auto mode = solve_mode(ModeFamily::spheroidal, 0, 0, 0, g, diamond());
    const Vector3d a = displacement_field(mode, Vector3d(0.5 * R, 0, 0));
    const Vector3d b = displacement_field(mode, Vector3d(0, 0.3 * R, 0.4 * R));
    CHECK(a.norm() == doctest::Approx(b.norm()).epsilon(1e-13));
    CHECK(std::abs(a.normalized().dot(Vector3d::UnitX())) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(b.normalized().dot(Vector3d(0, 0.6, 0.8))) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("l=2 spheroidal field against finite-difference potentials") {
    const auto mode = solve_mode(ModeFamily::spheroidal, 2, 0, 0, g, diamond());
    // Work in units of R; S_20 = sqrt(5/16pi)(3 z^2/r^2 - 1).
    const double k = mode.chi, hh = mode.xi;
    auto s20 = [](const Vector3d& x) {
      return std::sqrt(5.0 / (16 * std::numbers::pi)) * (3 * x.z() * x.z() / x.squaredNorm() - 1);
    };
    auto phi = [&](const Vector3d& x) { return std::sph_bessel(2, hh * x.norm()) * s20(x); };
    auto A = [&](const Vector3d& x) -> Vector3d { return x * std::sph_bessel(2, k * x.norm()) * s20(x); };
    const double step = 1e-4;
    auto curlA = [&](const Vector3d& x) { return curl(A, x, step); };
    const Vector3d x(0, 0, 0.5);
    Vector3d grad;
    for (int i = 0; i < 3; ++i) {
      Vector3d e = Vector3d::Zero();
      e(i) = step;
      grad(i) = (-phi(x + 2 * e) + 8 * phi(x + e) - 8 * phi(x - e) + phi(x - 2 * e)) / (12 * step);
    }
    const Vector3d oracle = mode.p * grad / hh + mode.q * curl(curlA, x, step) / k;
    const Vector3d u = displacement_field(mode, x * R);
    CHECK((u - oracle).norm() <= 1e-6 * oracle.norm());
  }
  CHECK_THROWS_AS(displacement_field(solve_mode(ModeFamily::spheroidal, 0, 0, 0, g, diamond()),
                                     Vector3d(0, 0, 1.01 * R)),
                  Error);
}

TEST_CASE("normalization by independent 3D quadrature") {
  const auto g = make_sphere(10e-9, diamond());
  const double R = g.radius;
  const auto rr = gauss_legendre(48);
  const auto ct = gauss_legendre(24);
  const int nphi = 24;
  auto integral = [&](const SphereMode& mode) {
    double s = 0;
    for (std::size_t i = 0; i < rr.nodes.size(); ++i) {
      const double r = 0.5 * R * (rr.nodes[i] + 1);
      for (std::size_t j = 0; j < ct.nodes.size(); ++j) {
        const double st = std::sqrt(1 - ct.nodes[j] * ct.nodes[j]);
        for (int k = 0; k < nphi; ++k) {
          const double ph = kTwoPi * (k + 0.5) / nphi;
          const Vector3d x(r * st * std::cos(ph), r * st * std::sin(ph), r * ct.nodes[j]);
          const double u2 = (mode.norm * displacement_field(mode, x)).squaredNorm();
          s += 0.5 * R * rr.weights[i] * ct.weights[j] * (kTwoPi / nphi) * r * r * u2;
        }
      }
    }
    return s;
  };
  for (auto [fam, l, m, n] : {std::tuple{ModeFamily::spheroidal, 0, 0, 0}, {ModeFamily::spheroidal, 2, 0, 0},
                              {ModeFamily::spheroidal, 2, 1, 0}, {ModeFamily::spheroidal, 1, -1, 1},
                              {ModeFamily::torsional, 1, 0, 0}, {ModeFamily::torsional, 2, -2, 0}}) {
    const auto mode = solve_mode(fam, l, m, n, g, diamond());
    CHECK(mode_norm_integral(mode) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(integral(mode) == doctest::Approx(1.0).epsilon(1e-8));
  }
  const auto a = solve_mode(ModeFamily::spheroidal, 2, 0, 0, g, diamond());
  const auto b = solve_mode(ModeFamily::spheroidal, 2, 1, 0, g, diamond());
  CHECK(a.norm == doctest::Approx(b.norm).epsilon(1e-14));
}

TEST_CASE("normalization scales as R^-3/2") {
  auto norm_at = [](double d) {
    return solve_mode(ModeFamily::spheroidal, 0, 0, 0, make_sphere(d, diamond()), diamond()).norm;
  };
  const double slope = std::log(norm_at(40e-9) / norm_at(10e-9)) / std::log(4.0);
  CHECK(std::abs(slope + 1.5) < 1e-3);
}

TEST_CASE("frequency is independent of m") {
  const auto g = make_sphere(12e-9, diamond());
  for (auto fam : {ModeFamily::spheroidal, ModeFamily::torsional}) {
    const double nu0 = solve_mode(fam, 2, 0, 1, g, diamond()).nu;
    for (int m = -2; m <= 2; ++m) CHECK(solve_mode(fam, 2, m, 1, g, diamond()).nu == nu0);
  }
  const auto mode = solve_mode(ModeFamily::spheroidal, 2, 0, 0, g, diamond());
  CHECK(mode.nu * mode.radius / diamond().v_t == doctest::Approx(mode.chi).epsilon(1e-15));
}

TEST_CASE("torsional fields are divergence free") {
  const auto g = make_sphere(10e-9, diamond());
  const double R = g.radius;
  for (auto [l, m] : {std::pair{1, 0}, {2, 1}, {3, -2}}) {
    const auto mode = solve_mode(ModeFamily::torsional, l, m, 0, g, diamond());
    const double k = mode.chi / R;
    auto u = [&](const Vector3d& x) -> Vector3d { return displacement_field(mode, x); };
    const double h = 2e-4 * R;
    double worst = 0;
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j)
        for (int kk = 0; kk < 10; ++kk) {
          const Vector3d x = R * Vector3d(-0.85 + 0.17 * i + 0.01, -0.85 + 0.17 * j + 0.02, -0.85 + 0.17 * kk);
          if (x.norm() > 0.9 * R) continue;
          const double div = d_dx(u, x, 0, 0, h) + d_dx(u, x, 1, 1, h) + d_dx(u, x, 2, 2, h);
          worst = std::max(worst, std::abs(div) / k);
        }
    CHECK(worst < 1e-8);
    CHECK(displacement_divergence(mode, Vector3d(0.1, 0.2, 0.3) * R) == 0.0);
  }
}

TEST_CASE("sphere coupling coefficients") {
  const auto& mat = diamond();
  SUBCASE("torsional modes do not couple") {
    const auto g = make_sphere(10e-9, mat);
    const auto mode = solve_mode(ModeFamily::torsional, 2, 1, 0, g, mat);
    for (const auto& s : eta_map(mode, mat, 6, 7, 0.3)) CHECK(s.eta == 0.0);
  }
  SUBCASE("only l=0 couples at the centre") {
    const auto g = make_sphere(10e-9, mat);
    for (int l = 1; l <= 3; ++l)
      CHECK(coupling_eta(solve_mode(ModeFamily::spheroidal, l, 0, 0, g, mat), Vector3d::Zero(), mat) == 0.0);
    CHECK(coupling_eta(solve_mode(ModeFamily::spheroidal, 0, 0, 0, g, mat), Vector3d::Zero(), mat) > 0.0);
  }
  SUBCASE("breathing mode eta * d is constant") {
    double ref = 0;
    for (double d = 5e-9; d <= 50e-9; d += 5e-9) {
      const auto mode = solve_mode(ModeFamily::spheroidal, 0, 0, 0, make_sphere(d, mat), mat);
      const double v = coupling_eta(mode, Vector3d::Zero(), mat) * d;
      if (ref == 0) ref = v;
      CHECK(v == doctest::Approx(ref).epsilon(1e-10));
    }
  }
  SUBCASE("explicit coupling expression") {
    const auto g = make_sphere(16e-9, mat);
    const auto mode = solve_mode(ModeFamily::spheroidal, 2, 1, 1, g, mat);
    const Vector3d x(2e-9, -1e-9, 3e-9);
    const double r = x.norm(), h = mode.xi / mode.radius;
    const double y = real_spherical_harmonic(2, 1, std::acos(x.z() / r), std::atan2(x.y(), x.x())).value;
    const double oracle = mat.zeta * std::sqrt(kHbar / (2 * mat.rho * mode.nu)) * mode.norm * mode.p * h *
                          std::sph_bessel(2, h * r) * y / mode.nu;
    CHECK(coupling_eta(mode, x, mat) == doctest::Approx(oracle).epsilon(1e-11));
  }
  SUBCASE("breathing mode agrees with the periodic-boundary estimate") {
    for (double d = 5e-9; d <= 30e-9; d += 5e-9) {
      const auto g = make_sphere(d, mat);
      const double sphere = coupling_eta(solve_mode(ModeFamily::spheroidal, 0, 0, 0, g, mat), Vector3d::Zero(), mat);
      const double pbc = lowest_mode(g, mat).eta;
      CHECK(sphere / pbc > 0.5);
      CHECK(sphere / pbc < 2.0);
      const double nu_sphere = solve_mode(ModeFamily::spheroidal, 0, 0, 0, g, mat).nu;
      CHECK(std::abs(nu_sphere / lowest_mode(g, mat).nu - 1) < 0.25);
    }
  }
  SUBCASE("radial nodes of overtones") {
    const auto g = make_sphere(20e-9, mat);
    for (int n = 0; n < 4; ++n) {
      const auto mode = solve_mode(ModeFamily::spheroidal, 0, 0, n, g, mat);
      int nodes = 0;
      double prev = coupling_eta(mode, Vector3d::Zero(), mat);
      for (int i = 1; i <= 2000; ++i) {
        const double cur = coupling_eta(mode, Vector3d(0, 0, mode.radius * i / 2000.0), mat);
        if (cur * prev < 0) ++nodes;
        prev = cur;
      }
      CHECK(nodes == n);
    }
  }
}

TEST_CASE("sphere solver errors") {
  const auto g = make_sphere(10e-9, diamond());
  try {
    torsional_eigenvalues(0, 1);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidQuantumNumber);
  }
  try {
    spheroidal_eigenvalues(0, 5, diamond(), 5.0);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoRootInBracket);
  }
  try {
    coupling_eta(solve_mode(ModeFamily::spheroidal, 0, 0, 0, g, diamond()), Vector3d(1e-8, 0, 0), diamond());
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PointOutsideSphere);
  }
  CHECK_THROWS_AS(solve_mode(ModeFamily::spheroidal, 1, 2, 0, g, diamond()), Error);
}
