#include <doctest.h>

#include <cmath>

#include "nvphonon/special_functions.hpp"
#include "nvphonon/units.hpp"

using namespace nvp;

namespace {

// Independent power series in long double.
long double series_j(int l, long double x) {
  long double front = 1;
  for (int i = 0; i < l; ++i) front *= x / (2 * i + 3);
  long double sum = 0, term = 1;
  for (int k = 0; k < 200; ++k) {
    if (k > 0) term *= -x * x / (2.0L * k * (2 * l + 2 * k + 1));
    sum += term;
  }
  return front * sum;
}

}  // namespace

TEST_CASE("spherical Bessel against power series") {
  for (int l = 0; l <= 6; ++l) {
    for (double x : {1e-4, 0.003, 0.1, 0.7, 1.5, 3.0, 5.7635, 8.0}) {
      const double ref = static_cast<double>(series_j(l, x));
      CAPTURE(l);
      CAPTURE(x);
      const double scale = std::abs(ref) + (x > l ? 1.0 / x : 0.0);
      CHECK(std::abs(sph_bessel_j(l, x) - ref) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("spherical Bessel against the standard library") {
  for (int l = 0; l <= 8; ++l)
    for (double x = 0.05; x < 40; x += 0.37) {
      const double ref = std::sph_bessel(static_cast<unsigned>(l), x);
      // near zeros compare against the 1/x envelope instead of |j_l|
      const double scale = std::abs(ref) + (x > l ? 1.0 / x : 0.0);
      CHECK(std::abs(sph_bessel_j(l, x) - ref) <= 1e-12 * scale);
    }
}

TEST_CASE("spherical Bessel derivative and j/x") {
  for (int l = 0; l <= 4; ++l) {
    for (double x : {0.5, 2.0, 9.0}) {
      // j_l' = j_{l-1} - (l+1) j_l / x, with j_{-1} = cos(x)/x
      const double jm1 = l == 0 ? std::cos(x) / x : std::sph_bessel(l - 1, x);
      const double ref = jm1 - (l + 1) * std::sph_bessel(l, x) / x;
      CHECK(sph_bessel_j_prime(l, x) == doctest::Approx(ref).epsilon(1e-12).scale(1e-12));
      CHECK(sph_bessel_j_over_x(l, x) == doctest::Approx(sph_bessel_j(l, x) / x).epsilon(1e-14));
    }
    // leading terms of the series derivative
    const double x = 1e-5;
    double dfact = 1;
    for (int i = 1; i <= l; ++i) dfact *= 2 * i + 1;
    const double ref = (l * std::pow(x, l - 1) - (l + 2) * std::pow(x, l + 1) / (2 * (2 * l + 3))) / dfact;
    CHECK(sph_bessel_j_prime(l, x) == doctest::Approx(ref).epsilon(1e-9));
  }
  CHECK(sph_bessel_j_over_x(1, 0.0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  const auto rule = gauss_legendre(12);
  for (int p = 0; p <= 23; ++p) {
    double s = 0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * std::pow(rule.nodes[i], p);
    const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
    CHECK(s == doctest::Approx(exact).epsilon(1e-14).scale(1));
  }
}

TEST_CASE("real spherical harmonics are orthonormal") {
  const auto rule = gauss_legendre(24);
  const int nphi = 32;
  auto overlap = [&](int l1, int m1, int l2, int m2) {
    double s = 0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double th = std::acos(rule.nodes[i]);
      for (int j = 0; j < nphi; ++j) {
        const double ph = kTwoPi * j / nphi;
        s += rule.weights[i] * (kTwoPi / nphi) * real_spherical_harmonic(l1, m1, th, ph).value *
             real_spherical_harmonic(l2, m2, th, ph).value;
      }
    }
    return s;
  };
  for (int l1 = 0; l1 <= 3; ++l1)
    for (int m1 = -l1; m1 <= l1; ++m1)
      for (int l2 = 0; l2 <= 3; ++l2)
        for (int m2 = -l2; m2 <= l2; ++m2)
          CHECK(overlap(l1, m1, l2, m2) == doctest::Approx(l1 == l2 && m1 == m2 ? 1.0 : 0.0).scale(1));
}

TEST_CASE("real spherical harmonic derivatives") {
  for (int l = 0; l <= 4; ++l)
    for (int m = -l; m <= l; ++m)
      for (double th : {0.3, 1.1, 2.5})
        for (double ph : {0.2, 2.0}) {
          const double h = 1e-6;
          const auto y = real_spherical_harmonic(l, m, th, ph);
          const double dth = (real_spherical_harmonic(l, m, th + h, ph).value -
                              real_spherical_harmonic(l, m, th - h, ph).value) / (2 * h);
          const double dph = (real_spherical_harmonic(l, m, th, ph + h).value -
                              real_spherical_harmonic(l, m, th, ph - h).value) / (2 * h);
          CHECK(y.dtheta == doctest::Approx(dth).epsilon(1e-7).scale(1e-7));
          CHECK(y.dphi_over_sin == doctest::Approx(dph / std::sin(th)).epsilon(1e-7).scale(1e-7));
        }
  // Y_10 = sqrt(3/4pi) cos(theta)
  CHECK(real_spherical_harmonic(1, 0, 0.4, 0).value ==
        doctest::Approx(std::sqrt(3.0 / (4 * std::numbers::pi)) * std::cos(0.4)));
}
