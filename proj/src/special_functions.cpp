#include "nvphonon/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "nvphonon/units.hpp"

namespace nvp {

namespace {

// Ybar_l^m(θ) = Y_lm(θ, 0) including the Condon-Shortley phase, m >= 0.
double ybar(int l, int m, double theta) {
  if (m > l) return 0.0;
  return std::sph_legendre(static_cast<unsigned>(l), static_cast<unsigned>(m), theta);
}

}  // namespace

RealHarmonic real_spherical_harmonic(int l, int m, double theta, double phi) {
  const int am = std::abs(m);
  // Keep away from the poles where the θ̂/φ̂ frame is singular; fields are
  // continuous there so the Cartesian result converges.
  constexpr double kPoleGuard = 1e-9;
  if (am > 0) theta = std::clamp(theta, kPoleGuard, kPi - kPoleGuard);

  const double y = ybar(l, am, theta);
  const double s = std::sin(theta);
  double dy = std::sqrt(static_cast<double>((l - am) * (l + am + 1))) * ybar(l, am + 1, theta);
  if (am > 0) dy += am * std::cos(theta) / s * y;

  RealHarmonic out{};
  if (m == 0) {
    out.value = y;
    out.dtheta = dy;
    out.dphi_over_sin = 0.0;
    return out;
  }
  const double sign = (am % 2 == 0) ? 1.0 : -1.0;
  const double f = std::sqrt(2.0) * sign;
  if (m > 0) {
    out.value = f * y * std::cos(am * phi);
    out.dtheta = f * dy * std::cos(am * phi);
    out.dphi_over_sin = -f * am * y * std::sin(am * phi) / s;
  } else {
    out.value = f * y * std::sin(am * phi);
    out.dtheta = f * dy * std::sin(am * phi);
    out.dphi_over_sin = f * am * y * std::cos(am * phi) / s;
  }
  return out;
}

GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace nvp
