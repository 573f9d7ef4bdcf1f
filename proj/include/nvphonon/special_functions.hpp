#pragma once

#include <cmath>
#include <algorithm>
#include <concepts>
#include <limits>
#include <vector>

namespace nvp {

namespace detail {

// Power series of j_l(x) / x^l, valid (and used) for small |x|.
template <std::floating_point T>
T sph_bessel_series_reduced(int l, T x) {
  T front = 1;
  for (int i = 1; i <= l; ++i) front /= static_cast<T>(2 * i + 1);
  const T y = -x * x / 2;
  T term = 1, sum = 1;
  for (int k = 1; k < 40; ++k) {
    term *= y / (static_cast<T>(k) * static_cast<T>(2 * l + 2 * k + 1));
    sum += term;
    if (std::abs(term) < std::numeric_limits<T>::epsilon() * std::abs(sum)) break;
  }
  return front * sum;
}

}  // namespace detail

/// Spherical Bessel functions j_0..j_lmax at x >= 0.
///
/// Miller's downward recurrence normalised against whichever of j_0, j_1 is
/// better conditioned at x; a power series is used below x = 1e-3.
template <std::floating_point T>
std::vector<T> sph_bessel_j_all(int lmax, T x) {
  std::vector<T> out(static_cast<std::size_t>(lmax) + 1);
  if (x < T(1e-3)) {
    T xl = 1;
    for (int l = 0; l <= lmax; ++l) {
      out[l] = xl * detail::sph_bessel_series_reduced(l, x);
      xl *= x;
    }
    return out;
  }
  const int start = std::max(lmax, static_cast<int>(x)) + 30 + static_cast<int>(std::sqrt(40.0 * (lmax + x)));
  T jp1 = 0, j = T(1e-30);
  std::vector<T> tmp(static_cast<std::size_t>(start) + 1);
  tmp[start] = j;
  for (int n = start; n > 0; --n) {
    const T jm1 = static_cast<T>(2 * n + 1) / x * j - jp1;
    jp1 = j;
    j = jm1;
    tmp[n - 1] = j;
    if (std::abs(j) > T(1e200)) {
      for (int i = n - 1; i <= start; ++i) tmp[i] *= T(1e-200);
      j *= T(1e-200);
      jp1 *= T(1e-200);
    }
  }
  const T j0 = std::sin(x) / x;
  const T j1 = std::sin(x) / (x * x) - std::cos(x) / x;
  const T scale = std::abs(j0) >= std::abs(j1) ? j0 / tmp[0] : j1 / tmp[1];
  for (int l = 0; l <= lmax; ++l) out[l] = tmp[l] * scale;
  return out;
}

template <std::floating_point T>
T sph_bessel_j(int l, T x) {
  return sph_bessel_j_all(l, x)[static_cast<std::size_t>(l)];
}

/// j_l(x) / x, finite at x = 0.
template <std::floating_point T>
T sph_bessel_j_over_x(int l, T x) {
  if (x < T(1e-3)) {
    T xl = 1;
    for (int i = 1; i < l; ++i) xl *= x;
    return l == 0 ? detail::sph_bessel_series_reduced(0, x) / x
                  : xl * detail::sph_bessel_series_reduced(l, x);
  }
  return sph_bessel_j(l, x) / x;
}

/// Derivative j_l'(x) = (l/x) j_l(x) - j_{l+1}(x); j_0' = -j_1.
template <std::floating_point T>
T sph_bessel_j_prime(int l, T x) {
  const auto j = sph_bessel_j_all(l + 1, x);
  if (l == 0) return -j[1];
  return static_cast<T>(l) * sph_bessel_j_over_x(l, x) - j[static_cast<std::size_t>(l) + 1];
}

/// Real orthonormal spherical harmonic S_lm and its angular derivatives.
///
/// S_l0 = Y_l0; for m > 0, S_lm = sqrt(2) (-1)^m Re Y_lm; for m < 0,
/// S_lm = sqrt(2) (-1)^m Im Y_l|m|, with Y_lm the Condon-Shortley complex
/// harmonics. `dtheta` is dS/dθ and `dphi_over_sin` is (1/sinθ) dS/dφ.
struct RealHarmonic {
  double value;
  double dtheta;
  double dphi_over_sin;
};

RealHarmonic real_spherical_harmonic(int l, int m, double theta, double phi);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

}  // namespace nvp
