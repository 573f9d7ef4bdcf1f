#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "nvphonon/errors.hpp"
#include "nvphonon/integrator.hpp"
#include "nvphonon/operators.hpp"

using namespace nvp;

namespace {

Matrix random_matrix(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

Matrix random_hermitian(int n, std::mt19937& rng) {
  const Matrix m = random_matrix(n, rng);
  return 0.5 * (m + m.adjoint());
}

}  // namespace

TEST_CASE("kron agrees with Eigen's Kronecker product") {
  std::mt19937 rng(1);
  const Matrix a = random_matrix(3, rng), b = random_matrix(4, rng);
  const Matrix oracle = Eigen::kroneckerProduct(a, b);
  CHECK((kron(a, b) - oracle).norm() < 1e-14 * oracle.norm());
}

TEST_CASE("ladder operator commutator holds below the truncation edge") {
  const int n = 12;
  const Matrix a = annihilation(n);
  const Matrix c = a * a.adjoint() - a.adjoint() * a;
  for (int k = 0; k < n - 1; ++k) CHECK(std::abs(c(k, k) - 1.0) < 1e-14);
  CHECK(std::abs(c(n - 1, n - 1) + double(n - 1)) < 1e-12);
  const Matrix num = a.adjoint() * a;
  for (int k = 0; k < n; ++k) CHECK(std::abs(num(k, k) - double(k)) < 1e-13);
}

TEST_CASE("embedding places the first center outermost and the mode innermost") {
  const HilbertSpace s{3, 2, 5};
  CHECK(s.dim() == 45);
  const Matrix flip1 = on_center(s, ket_bra(3, 2, 0), 0);
  const Matrix flip2 = on_center(s, ket_bra(3, 2, 0), 1);
  // |l1, l2, n> has index (l1*3 + l2)*5 + n
  CHECK(std::abs(flip1((2 * 3 + 1) * 5 + 4, (0 * 3 + 1) * 5 + 4) - 1.0) < 1e-15);
  CHECK(std::abs(flip2((1 * 3 + 2) * 5 + 3, (1 * 3 + 0) * 5 + 3) - 1.0) < 1e-15);
  const Matrix a = on_mode(s, annihilation(5));
  CHECK(std::abs(a((2 * 3 + 2) * 5 + 1, (2 * 3 + 2) * 5 + 2) - std::sqrt(2.0)) < 1e-15);
  CHECK((flip1 * a - a * flip1).norm() < 1e-14);
}

TEST_CASE("Hilbert space validation") {
  CHECK_THROWS_AS(validate(HilbertSpace{3, 3, 10}), Error);
  CHECK_THROWS_AS(validate(HilbertSpace{1, 1, 10}), Error);
  try {
    validate(HilbertSpace{3, 1, 3});
    FAIL("expected TruncationTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TruncationTooSmall);
  }
  CHECK_NOTHROW(validate(HilbertSpace{2, 2, 1}));
}

TEST_CASE("time-dependent operators merge equal frequencies and evaluate as sums") {
  std::mt19937 rng(2);
  const Matrix m1 = random_matrix(4, rng), m2 = random_matrix(4, rng), m0 = random_hermitian(4, rng);
  TimeDependentOperator h(4);
  h.add(m0);
  h.add_with_hc(m1, 3.0);
  h.add_with_hc(m2, 3.0);
  CHECK(h.terms().size() == 3);
  for (double t : {0.0, 0.3, 1.7, -2.2}) {
    const Matrix direct = m0 + (m1 + m2) * std::exp(kI * 3.0 * t) + (m1 + m2).adjoint() * std::exp(-kI * 3.0 * t);
    CHECK((h.at(t) - direct).norm() < 1e-13 * direct.norm());
    CHECK(hermiticity_defect(h.at(t)) < 1e-14);
    CHECK((h.adjoint().at(t) - h.at(t).adjoint()).norm() < 1e-13);
  }
  const SparseTerms sp(h);
  const Vector x = Vector::Random(4);
  CHECK((sp.apply(0.9, x) - h.at(0.9) * x).norm() < 1e-13 * x.norm() * h.at(0.9).norm());
  CHECK((Matrix(sp.at(0.4)) - h.at(0.4)).norm() < 1e-13 * h.at(0.4).norm());
}

TEST_CASE("interaction frame matches explicit conjugation") {
  std::mt19937 rng(3);
  Matrix h0 = Matrix::Zero(5, 5);
  h0.diagonal() << 0.0, 1.0, 1.0, 2.5, -0.7;  // degenerate pair included
  const Matrix rot = (kI * random_hermitian(5, rng)).exp();
  h0 = rot * h0 * rot.adjoint();
  TimeDependentOperator h(5);
  h.add(random_hermitian(5, rng));
  h.add_with_hc(random_matrix(5, rng), 0.8);
  const TimeDependentOperator hi = to_interaction_frame(h, h0);
  for (double t : {0.0, 0.37, 2.9, 11.0}) {
    const Matrix u = (-kI * t * h0).exp();
    const Matrix oracle = u.adjoint() * h.at(t) * u;
    CHECK((hi.at(t) - oracle).norm() < 1e-11 * oracle.norm());
    CHECK((frame_unitary(h0, t) - u).norm() < 1e-11);
  }
}

TEST_CASE("antiderivative differentiates back to the operator") {
  std::mt19937 rng(4);
  TimeDependentOperator v(3);
  v.add_with_hc(random_matrix(3, rng), 2.0);
  v.add_with_hc(random_matrix(3, rng), -5.0);
  const TimeDependentOperator s = antiderivative(v);
  const double t = 0.41, dt = 1e-5;
  const Matrix deriv = (s.at(t + dt) - s.at(t - dt)) / (2 * dt);
  CHECK((deriv - v.at(t)).norm() < 1e-8 * v.at(t).norm());
  TimeDependentOperator bad(3);
  bad.add(Matrix::Identity(3, 3));
  CHECK_THROWS_AS(antiderivative(bad), Error);
}

TEST_CASE("Dormand-Prince integrates linear oscillations to tolerance") {
  // y' = i w y over many periods; exact solution e^{i w t}.
  const double w = 7.0;
  Vector y(1);
  y(0) = 1.0;
  Dopri5<Vector> stepper({1e-11, 1e-13});
  stepper.integrate(y, 0.0, 50.0, [&](double, const Vector& s) -> Vector { return kI * w * s; });
  CHECK(std::abs(y(0) - std::exp(kI * w * 50.0)) < 1e-8);
  CHECK(stepper.stats().accepted > 100);

  // Driven two-level system with time-dependent coefficients against a fine
  // piecewise-exponential propagator.
  const double om = 1.3, de = 4.0;
  auto hmat = [&](double t) {
    Matrix h(2, 2);
    h << 0, 0.5 * om * std::exp(kI * de * t), 0.5 * om * std::exp(-kI * de * t), 0;
    return h;
  };
  Vector psi(2);
  psi << 1, 0;
  Dopri5<Vector> s2({1e-11, 1e-13});
  s2.integrate(psi, 0.0, 3.0, [&](double t, const Vector& s) -> Vector { return -kI * (hmat(t) * s); });
  Vector ref(2);
  ref << 1, 0;
  const int n = 60000;
  const double h = 3.0 / n;
  for (int k = 0; k < n; ++k) ref = (-kI * h * hmat((k + 0.5) * h)).exp() * ref;
  CHECK((psi - ref).norm() < 1e-7);
}

TEST_CASE("Dormand-Prince keeps a step hint across consecutive spans") {
  Vector y(1);
  y(0) = 1.0;
  Dopri5<Vector> stepper;
  auto f = [](double, const Vector& s) -> Vector { return -s; };
  for (int k = 0; k < 10; ++k) stepper.integrate(y, 0.1 * k, 0.1 * (k + 1), f);
  CHECK(std::abs(y(0) - std::exp(-1.0)) < 1e-8);
  CHECK(stepper.step_hint() > 0);
}
