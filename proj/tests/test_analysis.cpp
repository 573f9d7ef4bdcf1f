#include <doctest.h>

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "nvphonon/analysis.hpp"
#include "nvphonon/errors.hpp"
#include "nvphonon/phonon_pbc.hpp"
#include "nvphonon/units.hpp"

using namespace nvp;

namespace {

struct Coupling {
  double omega_tilde, delta_eps;
};

// Compensated double-path tier-I coupling for a 15 nm sphere, local terms removed.
Coupling coupling_15nm(double kappa2) {
  const MaterialModel mat = diamond_default();
  const PbcMode mode = lowest_mode(make_sphere(15e-9, mat), mat);
  const EffectiveModel m = effective_I_model(standard_drive(mode.eta, mode.nu, 0.05, kappa2, Path::double_path, true), 2);
  return {m.omega_tilde[0], m.delta_eps};
}

TimeDependentOperator coupling_only(double omega_tilde, double delta_eps, int fock) {
  EffectiveModel m;
  m.tier = Tier::I;
  m.path = Path::double_path;
  m.centers = 2;
  m.omega_tilde = {omega_tilde, omega_tilde};
  m.delta_eps = delta_eps;
  return effective_I_operator(m, fock);
}

}  // namespace

TEST_CASE("closed-form displacement and phase") {
  const double w = 1.3e6, de = 2.6e7;
  CHECK(std::abs(exact_alpha(w, de, 0)) == 0.0);
  CHECK(std::abs(exact_beta(w, de, 0)) == 0.0);
  const double period = kTwoPi / de;
  for (double t : {0.1e-7, 0.77e-7, 3.3e-7})
    CHECK(std::abs(exact_alpha(w, de, t + period) - exact_alpha(w, de, t)) < 1e-12 * w / de);
  for (int m = 1; m <= 4; ++m) {
    const double t = m * period;
    CHECK(std::abs(exact_alpha(w, de, t)) < 1e-14);
    CHECK(exact_beta(w, de, t).imag() == doctest::Approx(w * w / (4 * de) * t).epsilon(1e-12));
  }
}

TEST_CASE("exact unitary limits") {
  const int f = 8;
  const ExactEvolution zero = exact_unitary(0.0, 1e7, 0.3e-6, f);
  CHECK((zero.u - Matrix::Identity(4 * f, 4 * f)).norm() < 1e-14);

  const Coupling c = coupling_15nm(0.05);
  const double t = 2 * kTwoPi / std::abs(c.delta_eps);
  const ExactEvolution ev = exact_unitary(c.omega_tilde, c.delta_eps, t, f);
  // phonon-diagonal at closure
  for (int i = 0; i < 4 * f; ++i)
    for (int j = 0; j < 4 * f; ++j)
      if (i % f != j % f) CHECK(std::abs(ev.u(i, j)) < 1e-12);
  // closure form exp(-i[-Ω̃²/(2Δε)(σxσx + 2(σx¹+σx²))] t) up to a global phase
  const Matrix x = pauli_x(), id = Matrix::Identity(2, 2);
  const Matrix gen = kron(x, x) + 2 * (kron(x, id) + kron(id, x));
  const Matrix expect = kron(Matrix((kI * (c.omega_tilde * c.omega_tilde / (2 * c.delta_eps)) * t * gen).exp()),
                             Matrix::Identity(f, f));
  const cplx ph = (expect.adjoint() * ev.u).trace();
  CHECK((ev.u - ph / std::abs(ph) * expect).norm() < 1e-12);
}

TEST_CASE("exact unitary matches time-ordered integration at any time") {
  const Coupling c = coupling_15nm(0.1);
  const int f = 14;
  for (double frac : {0.37, 1.0, 1.61}) {
    const double t = frac * kTwoPi / std::abs(c.delta_eps);
    const ExactEvolution ev = exact_unitary(c.omega_tilde, c.delta_eps, t, f);
    const Matrix u = propagate_unitary(coupling_only(c.omega_tilde, c.delta_eps, f), t);
    CHECK(operator_fidelity(ev.u, u, low_fock_states(f, 6)) > 1 - 1e-9);
  }
}

TEST_CASE("exact check at the second closure time") {
  const MaterialModel mat = diamond_default();
  const PbcMode mode = lowest_mode(make_sphere(15e-9, mat), mat);
  const ExactCheckReport r = exact_check(standard_drive(mode.eta, mode.nu, 0.05, 0.05, Path::double_path), 2, 11);
  CHECK(r.kappa2 == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(r.t_gate == doctest::Approx(2 * kTwoPi / std::abs(r.delta_eps)));
  CHECK(1 - r.fidelity_integrated < 1e-6);
  CHECK(r.distance_effective_II < 1e-10);
  CHECK(r.beta.imag() == doctest::Approx(r.omega_tilde * r.omega_tilde / (4 * r.delta_eps) * r.t_gate).epsilon(1e-12));
}

TEST_CASE("exact unitary truncation guard") {
  CHECK_THROWS_AS(exact_unitary(1e7, 1e7, 0.5 * kTwoPi / 1e7, 6), Error);
  CHECK_NOTHROW(exact_unitary(1e7, 1e7, 0.5 * kTwoPi / 1e7, 60));
}

TEST_CASE("operator fidelity") {
  const Matrix u = (kI * Matrix(pauli_x())).exp();
  CHECK(operator_fidelity(u, u) == doctest::Approx(1.0));
  CHECK(operator_fidelity(u, std::exp(kI * 0.3) * u) == doctest::Approx(1.0));
  CHECK(operator_fidelity(Matrix::Identity(2, 2), pauli_z()) == doctest::Approx(0.0));
}

TEST_CASE("figure of merit is independent of kappa1 at scaling level") {
  const double gamma = diamond_default().gamma_e;
  for (double k2 : {0.05, 0.1, 0.35}) {
    const double ref = scaling_ratio(0.05, k2, 3e-3, 4e12, gamma);
    CHECK(ref == doctest::Approx(k2 * 3e-3 * 4e12 / gamma).epsilon(1e-12));
    for (double k1 : {0.01, 0.1}) CHECK(std::abs(scaling_ratio(k1, k2, 3e-3, 4e12, gamma) / ref - 1) < 1e-12);
  }
}

TEST_CASE("sweep points") {
  const MaterialModel mat = diamond_default();
  const SweepPoint p = figure_of_merit_point(mat, 20e-9, 0.05, 0.1);
  CHECK(p.omega2 == doctest::Approx(0.05 * p.nu));
  CHECK(p.gamma_eff == doctest::Approx(0.05 * 0.05 * mat.gamma_e));
  // exact coefficients give half the scaling estimate up to O(kappa1^2) corrections
  CHECK(p.ratio / scaling_ratio(0.05, 0.1, p.eta, p.nu, mat.gamma_e) == doctest::Approx(0.5).epsilon(0.02));
  // second-state subtraction lowers the gate rate
  SweepOptions two;
  two.second_state_splitting = kTwoPi * 4e9;
  CHECK(figure_of_merit_point(mat, 20e-9, 0.05, 0.1, two).ratio < p.ratio);

  const std::vector<double> d{10e-9, 20e-9, 30e-9};
  SweepOptions par;
  par.workers = 3;
  const auto serial = gate_figure_of_merit(mat, {0.01, 0.1}, {0.05}, d);
  const auto threaded = gate_figure_of_merit(mat, {0.01, 0.1}, {0.05}, d, par);
  REQUIRE(serial.size() == 6);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].ratio == threaded[i].ratio);
    CHECK(serial[i].diameter == d[i % 3]);
  }
  // exact ratios at different kappa1 differ through eps2 = eps1 - O(kappa1^2/kappa2) eps1
  CHECK(serial[1].ratio / serial[4].ratio == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("size limits") {
  const MaterialModel mat = diamond_default();
  const double c05 = crossing_diameter(mat, 0.05, 0.05, 5e-9, 80e-9);
  const double c10 = crossing_diameter(mat, 0.05, 0.1, 5e-9, 80e-9);
  CHECK(c05 == doctest::Approx(25e-9).epsilon(3.0 / 25));
  CHECK(c10 == doctest::Approx(35e-9).epsilon(4.0 / 35));
  SweepOptions nd;
  nd.nanodiamond_rate = true;
  CHECK(crossing_diameter(mat, 0.05, 0.05, 5e-9, 120e-9, nd) / c05 == doctest::Approx(std::sqrt(2.0)).epsilon(0.01));
  CHECK_THROWS_AS(crossing_diameter(mat, 0.05, 0.05, 40e-9, 80e-9), Error);
}

TEST_CASE("direct gate comparison") {
  const double eta = 2e-3, omega = 1e11, gamma = 1e8;
  for (double k : {0.01, 0.05, 0.1}) {
    const DirectComparison c = direct_gate_comparison(k, k, eta, omega, gamma);
    CHECK(c.advantage == doctest::Approx(1 / k).epsilon(1e-12));
    CHECK(c.raman_ratio == doctest::Approx(eta * omega / gamma));
  }
  const DirectComparison a = direct_gate_comparison(0.05, 0.1, eta, omega, gamma);
  const DirectComparison b = direct_gate_comparison(0.05, 0.2, eta, omega, gamma);
  CHECK(b.advantage / a.advantage == doctest::Approx(2.0));
  const DirectComparison h = direct_gate_comparison(0.05, 0.1, eta, omega, gamma / 2);
  CHECK(h.raman_ratio / a.raman_ratio == doctest::Approx(2.0));
  CHECK(h.direct_ratio / a.direct_ratio == doctest::Approx(2.0));
}

TEST_CASE("closure times") {
  const double de = kTwoPi * 53e3;
  const Closure c = closure_times(de, kPi / 2);
  CHECK(c.m == 2);
  CHECK(c.kappa2 == doctest::Approx(1 / (2 * std::sqrt(2.0))).epsilon(1e-14));
  CHECK(c.t_gate == doctest::Approx(2 * kTwoPi / de));
  CHECK(closure_times(de, kPi / 2, ClosureScheme::raman, false).m == 1);
  CHECK(closure_times(de, 1e-8).kappa2 < 1e-4);
  const Closure mw = closure_times(de, kPi / 2, ClosureScheme::microwave);
  CHECK(mw.m == 2);
  CHECK(mw.t_gate == doctest::Approx(4 * kPi / de));
  CHECK(mw.kappa2 == doctest::Approx(4.0 / 3.0 / std::sqrt(2.0)).epsilon(1e-14));
  const Closure tight = closure_times(de, kPi / 2, ClosureScheme::raman, true, 0.1);
  CHECK(tight.kappa2 <= 0.1);
  CHECK(std::sqrt(kPi / 2 / (kTwoPi * (tight.m - 2))) > 0.1);
  CHECK_THROWS_AS(closure_times(de, kPi / 2, ClosureScheme::raman, true, 1e-6), Error);
  CHECK_THROWS_AS(closure_times(de, 4.0), Error);
}
