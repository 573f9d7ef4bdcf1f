#include "nvphonon/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "nvphonon/errors.hpp"
#include "nvphonon/units.hpp"

namespace nvp {

StrainShifts strain_shifts(const StrainTensor& s, const MaterialModel& m) {
  const auto& e = s.e;
  return {-m.zeta * (e(0, 0) + e(1, 1)), -m.zeta * (e(0, 0) - e(1, 1)),
          -m.zeta * (e(0, 1) + e(1, 0)), -8.0 * m.beta * m.beta * m.zeta * e(2, 2)};
}

Matrix strain_gs(const StrainTensor& strain, const MaterialModel& material) {
  return 2.0 * strain_shifts(strain, material).d1 * Matrix::Identity(3, 3);
}

Matrix strain_es(const StrainTensor& strain, const MaterialModel& material) {
  const auto [d1, d2, d3, d4] = strain_shifts(strain, material);
  const cplx d = d1 + d4;
  const cplx id3 = kI * d3;
  Matrix h(6, 6);
  // clang-format off
  h << d,   0,   0,      0,      d2,  -id3,
       0,   d,   0,      0,      id3, -d2,
       0,   0,   d + d2, d3,     0,   0,
       0,   0,   d3,     d - d2, 0,   0,
       d2,  -id3, 0,     0,      d,   0,
       id3, -d2, 0,      0,      0,   d;
  // clang-format on
  return h;
}

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}
Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
Matrix sigma_plus() { return ket_bra(2, 0, 1); }

std::vector<std::string> drive_warnings(const DriveConfig& d) {
  std::vector<std::string> out;
  auto flag = [&](bool bad, const std::string& what) {
    if (bad) out.push_back(what);
  };
  flag(std::abs(d.eps1) < 5 * std::abs(d.omega1), "eps1 not >> omega1");
  for (int k = 0; k < 2; ++k)
    flag(std::abs(d.eps2) < 5 * std::abs(d.eta[k] * d.omega2),
         "eps2 not >> eta_" + std::to_string(k + 1) + " omega2");
  flag(std::abs(d.eps1) > 0.2 * d.nu || std::abs(d.eps2) > 0.2 * d.nu, "detunings not << nu");
  flag(std::abs(d.kappa1()) > 0.2, "kappa1 above 0.2");
  return out;
}

TimeDependentOperator lab_hamiltonian(const LabDrive& d, int fock_dim, double n_mean,
                                      bool exact_displacement) {
  if (fock_dim < 4 || fock_dim - 1 < 4.0 * n_mean)
    throw Error(ErrorCode::TruncationTooSmall, "Fock space too small for the expected occupation");
  const HilbertSpace space{2, 1, fock_dim};
  const Matrix a = annihilation(fock_dim);
  const Matrix x = a + a.adjoint();
  const Matrix disp = exact_displacement
                          ? Matrix((kI * d.eta * x).exp())
                          : Matrix(Matrix::Identity(fock_dim, fock_dim) + kI * d.eta * x);
  // basis {g, e}
  Matrix sz(2, 2);
  sz << -1, 0, 0, 1;
  TimeDependentOperator h(space.dim());
  const double w0 = d.omega0 + d.eta * d.eta * d.nu;
  h.add(0.5 * w0 * on_center(space, sz, 0) + d.nu * on_mode(space, a.adjoint() * a));
  h.add_with_hc(0.5 * d.rabi * embed(space, {ket_bra(2, 1, 0)}, disp), -d.omega_l);
  return h;
}

TimeDependentOperator rotating_frame_hamiltonian(const DriveConfig& d, const HilbertSpace& space) {
  validate(space);
  if (space.levels != 3) throw Error(ErrorCode::InvalidParameter, "Lambda system needs 3 levels");
  const Matrix ad = annihilation(space.fock_dim).adjoint();
  const Matrix id_f = Matrix::Identity(space.fock_dim, space.fock_dim);
  TimeDependentOperator h(space.dim());
  auto on = [&](int k, const Matrix& nv, const Matrix& mode) {
    std::vector<Matrix> ops(static_cast<std::size_t>(space.centers), Matrix::Identity(3, 3));
    ops[static_cast<std::size_t>(k)] = nv;
    return embed(space, ops, mode);
  };
  auto add_path = [&](int k, int g_carrier, int g_sideband) {
    h.add_with_hc(0.5 * d.omega1 * on(k, ket_bra(3, lambda::e, g_carrier), id_f), -d.eps1);
    h.add_with_hc(0.5 * d.omega2 * on(k, ket_bra(3, lambda::e, g_sideband), id_f), -(d.nu + d.eps2));
    h.add_with_hc(kI * 0.5 * d.eta[static_cast<std::size_t>(k)] * d.omega2 *
                      on(k, ket_bra(3, lambda::e, g_sideband), ad),
                  -d.eps2);
  };
  for (int k = 0; k < space.centers; ++k) {
    add_path(k, lambda::gp, lambda::gm);
    if (d.path == Path::double_path) add_path(k, lambda::gm, lambda::gp);
  }
  return h;
}

Matrix optical_dipolar_operator(const HilbertSpace& space, double j_opt) {
  if (space.centers != 2 || space.levels != 3)
    throw Error(ErrorCode::InvalidParameter, "dipolar exchange needs two Lambda-system centers");
  const Matrix id_f = Matrix::Identity(space.fock_dim, space.fock_dim);
  Matrix h = Matrix::Zero(space.dim(), space.dim());
  for (int g : {lambda::gp, lambda::gm}) {
    const Matrix hop = embed(space, {ket_bra(3, lambda::e, g), ket_bra(3, g, lambda::e)}, id_f);
    h += 0.5 * j_opt * (hop + hop.adjoint());
  }
  return h;
}

// ---- tier I -------------------------------------------------------------------

namespace {

void require_perturbative(const DriveConfig& d) {
  if (d.eps1 == 0 || d.eps2 == 0) throw Error(ErrorCode::PerturbationInvalid, "zero detuning");
  if (std::abs(d.kappa1()) >= 1) throw Error(ErrorCode::PerturbationInvalid, "kappa1 >= 1");
}

// 1/eps, minus the partner with detuning eps + splitting when a second excited
// state is included (its Raman contribution carries the opposite sign).
double inv(const DriveConfig& d, double eps) {
  double v = 1.0 / eps;
  if (d.second_state_splitting > 0) v -= 1.0 / (eps + std::copysign(d.second_state_splitting, eps));
  return v;
}

double chi_shift(Path p) { return p == Path::double_path ? 0.25 : 0.125; }

}  // namespace

double raman_amplitude(const DriveConfig& d, int k) {
  return 0.25 * d.omega1 * d.eta[static_cast<std::size_t>(k)] * d.omega2 * (inv(d, d.eps1) + inv(d, d.eps2));
}

EffectiveModel effective_I_model(const DriveConfig& d, int centers) {
  require_perturbative(d);
  if (centers < 1 || centers > 2) throw Error(ErrorCode::InvalidParameter, "one or two centers");
  EffectiveModel m;
  m.tier = Tier::I;
  m.path = d.path;
  m.centers = centers;
  const double carrier = d.omega2 * d.omega2 * inv(d, d.nu + d.eps2);
  const double stark1 = d.omega1 * d.omega1 * inv(d, d.eps1);
  for (int k = 0; k < centers; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const double eta = d.eta[ks];
    const double side = d.compensate_eta2 ? 0.0 : eta * eta * d.omega2 * d.omega2 * inv(d, d.eps2);
    m.omega_tilde[ks] = raman_amplitude(d, k);
    if (d.path == Path::double_path) {
      m.delta[ks] = 0.5 * (stark1 + side + carrier);
      m.delta_n[ks] = 0.5 * side;
    } else {
      m.delta[ks] = 0.25 * (stark1 - side - carrier);
      m.delta_n[ks] = -0.25 * side;
    }
    if (!d.compensate_eta2) m.mode_shift += chi_shift(d.path) * eta * eta * d.omega2 * d.omega2 / d.eps2;
  }
  m.delta_eps = d.eps1 - d.eps2 + m.mode_shift;
  const double om = std::max(std::abs(m.omega_tilde[0]), std::abs(m.omega_tilde[1]));
  m.kappa2 = m.delta_eps == 0 ? std::numeric_limits<double>::infinity() : om / std::abs(m.delta_eps);
  return m;
}

namespace {

Matrix qubit_single(const EffectiveModel& m) { return m.path == Path::double_path ? pauli_x() : pauli_z(); }

// Σ_k (δ_k + δn_k n)/2 · s_k on {g+1,g-1}^centers ⊗ Fock.
Matrix single_qubit_terms(const HilbertSpace& space, const EffectiveModel& m,
                          const std::array<double, 2>& delta, const std::array<double, 2>& delta_n) {
  const Matrix n = on_mode(space, annihilation(space.fock_dim).adjoint() * annihilation(space.fock_dim));
  Matrix h = Matrix::Zero(space.dim(), space.dim());
  for (int k = 0; k < space.centers; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const Matrix s = on_center(space, qubit_single(m), k);
    h += 0.5 * (delta[ks] * s + delta_n[ks] * (s * n));
  }
  return h;
}

}  // namespace

TimeDependentOperator effective_I_operator(const EffectiveModel& m, int fock_dim) {
  const HilbertSpace space{2, m.centers, fock_dim};
  validate(space);
  const Matrix ad = on_mode(space, annihilation(fock_dim).adjoint());
  const Matrix id = Matrix::Identity(space.dim(), space.dim());
  TimeDependentOperator h(space.dim());
  h.add(single_qubit_terms(space, m, m.delta, m.delta_n));
  for (int k = 0; k < m.centers; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const Matrix g = m.path == Path::double_path ? Matrix(on_center(space, pauli_x(), k) + id)
                                                 : on_center(space, sigma_plus(), k);
    h.add_with_hc(kI * 0.5 * m.omega_tilde[ks] * (ad * g), m.delta_eps);
  }
  return h;
}

EffectiveHamiltonian effective_I(const DriveConfig& drive, int centers, int fock_dim) {
  EffectiveModel m = effective_I_model(drive, centers);
  return {m, effective_I_operator(m, fock_dim)};
}

// ---- tier II ------------------------------------------------------------------

EffectiveModel effective_II_model(const EffectiveModel& t1) {
  if (t1.tier != Tier::I) throw Error(ErrorCode::InvalidParameter, "tier-I model expected");
  if (t1.centers != 2) throw Error(ErrorCode::InvalidParameter, "gate needs two centers");
  if (t1.delta_eps == 0 || !std::isfinite(t1.kappa2) || t1.kappa2 >= 1)
    throw Error(ErrorCode::PerturbationInvalid, "kappa2 = |Ω̃/Δε| must be below 1");
  EffectiveModel m = t1;
  m.tier = Tier::II;
  const double de = t1.delta_eps;
  const auto& w = t1.omega_tilde;
  m.omega_gate = w[0] * w[1] / de;
  for (std::size_t k = 0; k < 2; ++k) {
    if (t1.path == Path::double_path) {
      // Cross terms of (Σ_k G_k)^2 with G_k = Ω̃_k σx^k + Ω_a,k.
      const double a_sum = t1.dipolar ? t1.dipolar->omega_a[0] + t1.dipolar->omega_a[1] : w[0] + w[1];
      m.delta[k] = t1.delta[k] - a_sum * w[k] / de;
    } else {
      m.delta[k] = t1.delta[k] + w[k] * w[k] / (4 * de);
      m.delta_n[k] = t1.delta_n[k] + 2 * w[k] * w[k] / (4 * de);
    }
  }
  return m;
}

Matrix effective_II_operator(const EffectiveModel& m, int fock_dim) {
  if (m.tier != Tier::II) throw Error(ErrorCode::InvalidParameter, "tier-II model expected");
  const HilbertSpace space{2, 2, fock_dim};
  validate(space);
  Matrix h = single_qubit_terms(space, m, m.delta, m.delta_n);
  const Matrix id_f = Matrix::Identity(fock_dim, fock_dim);
  const Matrix xx = embed(space, {pauli_x(), pauli_x()}, id_f);
  const Matrix yy = embed(space, {pauli_y(), pauli_y()}, id_f);
  const Matrix zz = embed(space, {pauli_z(), pauli_z()}, id_f);
  if (m.path == Path::double_path) {
    h -= 0.5 * m.omega_gate * xx;
  } else {
    h -= 0.25 * 0.5 * m.omega_gate * (xx + yy);
  }
  if (m.dipolar) {
    h += 0.5 * m.dipolar->j_opt_tilde * (xx + yy + zz);
    // Secular part of the magnetic term in the presence of the σx fields.
    h += 0.25 * m.dipolar->j_mag * (zz + yy);
  }
  return h;
}

EffectiveHamiltonian effective_II(const EffectiveModel& tier1, int fock_dim) {
  EffectiveModel m = effective_II_model(tier1);
  TimeDependentOperator h;
  h.add(effective_II_operator(m, fock_dim));
  return {m, h};
}

double eps2_for_kappa2(DriveConfig d, double kappa2) {
  if (!(kappa2 > 0)) throw Error(ErrorCode::InvalidParameter, "kappa2 must be positive");
  double eps2 = d.eps1;
  for (int it = 0; it < 200; ++it) {
    d.eps2 = eps2;
    const EffectiveModel m = effective_I_model(d, 2);
    const double target_de = std::abs(m.omega_tilde[0]) / kappa2;
    const double next = d.eps1 + m.mode_shift - target_de;
    if (std::abs(next - eps2) <= 1e-15 * std::abs(d.eps1)) return next;
    eps2 = next;
  }
  throw Error(ErrorCode::PerturbationInvalid, "detuning iteration did not converge");
}

DriveConfig standard_drive(double eta, double nu, double kappa1, double kappa2, Path path,
                           bool compensate_eta2) {
  DriveConfig d;
  d.nu = nu;
  d.eta = {eta, eta};
  d.path = path;
  d.compensate_eta2 = compensate_eta2;
  d.omega2 = kappa1 * nu;
  d.omega1 = eta * d.omega2;
  d.eps1 = d.omega1 / kappa1;
  d.eps2 = eps2_for_kappa2(d, kappa2);
  return d;
}

// ---- dipolar ------------------------------------------------------------------

DipolarCouplings dipolar_couplings(const Eigen::Vector3d& r, const Eigen::Vector3d& p1,
                                   const Eigen::Vector3d& p2, const MaterialModel& mat,
                                   int mag_exponent) {
  const double dist = r.norm();
  if (!(dist > 0)) throw Error(ErrorCode::ZeroSeparation, "NV centers coincide");
  const Eigen::Vector3d er = r / dist;
  const Eigen::Vector3d a = p1.normalized();
  const Eigen::Vector3d b = p2.normalized();
  const double ang = a.dot(b) - 3.0 * a.dot(er) * b.dot(er);
  const double k0 = kTwoPi / mat.lambda0;
  const double nkr = mat.n_refr * k0 * dist;
  DipolarCouplings out;
  out.angular_factor = ang;
  out.j_opt = 1.5 * mat.gamma_e * mat.xi0 / (nkr * nkr * nkr) * ang;
  out.j_mag = 2.0 * kMu0Over4Pi * kGammaElectron * kGammaElectron * kHbar / std::pow(dist, mag_exponent) * ang;
  out.far_field_warning = nkr > 0.3;
  return out;
}

namespace {

// Raman-type ratio x/(J - eps) with the per-center replacement for unequal
// configurations: (x_self eps + (J/2) x_cross) / (J^2 - eps^2).
double dressed(double x_self, double x_cross, double j_half, double eps) {
  const double den = j_half * j_half - eps * eps;
  if (den == 0) throw Error(ErrorCode::DressedResonance, "detuning equals ±j_opt/2");
  return (x_self * eps + 0.5 * j_half * x_cross) / den;
}

}  // namespace

EffectiveModel effective_I_dipolar_model(const DriveConfig& d, double j_opt, double j_mag, double n_mean) {
  require_perturbative(d);
  if (d.path != Path::double_path)
    throw Error(ErrorCode::InvalidParameter, "dipolar tier-I model implemented for the double path");
  const double jh = 0.5 * j_opt;
  const double e1 = d.eps1, e2 = d.eps2, e3 = d.nu + d.eps2;
  for (double e : {e1, e2}) {
    const double margin = std::abs(jh - e);
    if (margin <= 5 * std::max(std::abs(d.omega1), std::abs(d.eta[0] * d.omega2)))
      throw Error(ErrorCode::DressedResonance, "drive not far detuned from the dressed state");
    if (std::abs(j_opt) > std::abs(e) && std::abs(d.kappa1() * d.kappa1() * j_opt / e) >= 0.1)
      throw Error(ErrorCode::QuasiResonantDoubleExcitation, "|kappa1^2 j/eps| >= 0.1");
  }
  const double w1 = d.omega1;
  const std::array<double, 2> s{d.eta[0] * d.omega2, d.eta[1] * d.omega2};  // sideband amplitudes
  const double c2 = d.omega2;
  EffectiveModel m;
  m.tier = Tier::I;
  m.path = d.path;
  m.centers = 2;
  DipolarTerms dip;
  dip.j_opt = j_opt;
  dip.j_mag = j_mag;
  for (std::size_t k = 0; k < 2; ++k) {
    const std::size_t o = 1 - k;
    const double comp = d.compensate_eta2 ? 0.0 : 1.0;
    // Each 1/eps of the uncoupled model becomes -1/(J - eps), generalized by `dressed`.
    const double stark1 = -dressed(w1 * w1, 2 * w1 * w1, jh, e1);
    const double side = -comp * dressed(s[k] * s[k], 2 * s[k] * s[o], jh, e2);
    const double carrier = -dressed(c2 * c2, 2 * c2 * c2, jh, e3);
    m.delta[k] = 0.5 * (stark1 + side + carrier);
    m.delta_n[k] = 0.5 * side;
    m.omega_tilde[k] = -0.25 * (dressed(w1 * s[k], w1 * s[o] + w1 * s[k], jh, e1) +
                                dressed(w1 * s[k], w1 * s[o] + w1 * s[k], jh, e2));
    dip.omega_a[k] = 0.5 * m.omega_tilde[k] -
                     0.125 * s[k] * w1 * (e1 / (jh * jh - e1 * e1) + e2 / (jh * jh - e2 * e2));
    if (!d.compensate_eta2) {
      const double side_shift = -dressed(s[k] * s[k], 2 * s[k] * s[o], jh, e2);
      m.mode_shift += chi_shift(d.path) * side_shift;
    }
  }
  m.delta_eps = d.eps1 - d.eps2 + m.mode_shift;
  const double s12 = s[0] * s[1];
  const double f1 = 1.0 / (jh * jh - e1 * e1), f2 = 1.0 / (jh * jh - e2 * e2), f3 = 1.0 / (jh * jh - e3 * e3);
  const double nfac = d.compensate_eta2 ? 0.0 : 1.0 + n_mean;
  dip.j_opt_tilde = -0.25 * j_opt *
                    (w1 * w1 * f1 + s12 * nfac * f2 +
                     s12 * w1 * w1 * j_opt / (16 * m.delta_eps) * (f1 + f2) * (f1 + f2) + c2 * c2 * f3);
  m.dipolar = dip;
  const double om = std::max(std::abs(m.omega_tilde[0]), std::abs(m.omega_tilde[1]));
  m.kappa2 = m.delta_eps == 0 ? std::numeric_limits<double>::infinity() : om / std::abs(m.delta_eps);
  return m;
}

TimeDependentOperator effective_I_dipolar_operator(const EffectiveModel& m, int fock_dim) {
  if (!m.dipolar) throw Error(ErrorCode::InvalidParameter, "model has no dipolar terms");
  const HilbertSpace space{2, 2, fock_dim};
  validate(space);
  const Matrix ad = on_mode(space, annihilation(fock_dim).adjoint());
  const Matrix id = Matrix::Identity(space.dim(), space.dim());
  const Matrix id_f = Matrix::Identity(fock_dim, fock_dim);
  TimeDependentOperator h(space.dim());
  Matrix stat = single_qubit_terms(space, m, m.delta, m.delta_n);
  stat += 0.5 * m.dipolar->j_opt_tilde *
          (embed(space, {pauli_x(), pauli_x()}, id_f) + embed(space, {pauli_y(), pauli_y()}, id_f) +
           embed(space, {pauli_z(), pauli_z()}, id_f));
  stat += 0.5 * m.dipolar->j_mag * embed(space, {pauli_z(), pauli_z()}, id_f);
  h.add(stat);
  for (int k = 0; k < 2; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const Matrix g = m.omega_tilde[ks] * on_center(space, pauli_x(), k) + m.dipolar->omega_a[ks] * id;
    h.add_with_hc(kI * 0.5 * (ad * g), m.delta_eps);
  }
  return h;
}

EffectiveHamiltonian effective_I_dipolar(const DriveConfig& drive, double j_opt, double j_mag,
                                         double n_mean, int fock_dim) {
  EffectiveModel m = effective_I_dipolar_model(drive, j_opt, j_mag, n_mean);
  return {m, effective_I_dipolar_operator(m, fock_dim)};
}

GateRates dipolar_gate_rates(const EffectiveModel& m) {
  const double w2 = m.omega_tilde[0] * m.omega_tilde[1] / m.delta_eps;
  const double jt = m.dipolar ? m.dipolar->j_opt_tilde : 0.0;
  const double jm = m.dipolar ? m.dipolar->j_mag : 0.0;
  return {-w2 + 2 * jt + jm / 2, -w2 - jm / 2};
}

// ---- microwave-assisted gate --------------------------------------------------

Matrix spin1_x() {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 1) = m(1, 0) = m(1, 2) = m(2, 1) = 1.0 / std::sqrt(2.0);
  return m;
}
Matrix spin1_y() {
  Matrix m = Matrix::Zero(3, 3);
  const double r = 1.0 / std::sqrt(2.0);
  m(0, 1) = -kI * r;
  m(1, 0) = kI * r;
  m(1, 2) = -kI * r;
  m(2, 1) = kI * r;
  return m;
}
Matrix spin1_z() {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = 1;
  m(2, 2) = -1;
  return m;
}

MwHamiltonian mw_hamiltonian(const DriveConfig& d, int fock_dim, bool include_carrier) {
  require_perturbative(d);
  if (!(d.omega_mw > 0)) throw Error(ErrorCode::WeakDriving, "no microwave drive");
  MwHamiltonian out;
  MwModel& m = out.model;
  const double carrier = include_carrier ? d.omega2 * d.omega2 / (d.nu + d.eps2) : 0.0;
  const double stark1 = d.omega1 * d.omega1 / d.eps1;
  m.delta_identity = 0.25 * (stark1 + carrier);
  m.delta_sp = 0.25 * (stark1 - carrier);
  m.omega_tilde = 0.25 * d.omega1 * (d.eta[0] * d.omega2) * (1.0 / d.eps1 + 1.0 / d.eps2);
  m.delta_eps = d.eps1 - d.eps2;
  if (m.delta_eps == 0) throw Error(ErrorCode::PerturbationInvalid, "Δε = 0");
  m.omega_gate = 9.0 / 8.0 * m.omega_tilde * m.omega_tilde / (8.0 * m.delta_eps);
  m.kappa2 = std::abs(m.omega_tilde / m.delta_eps);
  const double scale = std::max({std::abs(m.omega_tilde), std::abs(m.delta_sp), std::abs(m.delta_identity)});
  if (d.omega_mw < 10 * scale) {
    std::ostringstream msg;
    msg << "Omega_MW / max(effective scales) = " << d.omega_mw / scale << " < 10";
    throw Error(ErrorCode::WeakDriving, msg.str());
  }

  const HilbertSpace space{3, 2, fock_dim};
  validate(space);
  const Matrix ad = on_mode(space, annihilation(fock_dim).adjoint());
  const Matrix id_pm = ket_bra(3, 0, 0) + ket_bra(3, 2, 2);
  const Matrix sz_pm = ket_bra(3, 0, 0) - ket_bra(3, 2, 2);
  const Matrix sp_pm = ket_bra(3, triplet::gp, triplet::gm);
  const Matrix sx_pm = sp_pm + sp_pm.adjoint();
  const Matrix p0 = ket_bra(3, 1, 1);

  out.mw_drive = Matrix::Zero(space.dim(), space.dim());
  out.full = TimeDependentOperator(space.dim());
  out.rwa = TimeDependentOperator(space.dim());
  Matrix stat = Matrix::Zero(space.dim(), space.dim());
  Matrix rwa_stat = Matrix::Zero(space.dim(), space.dim());
  const Matrix rwa_sx = 0.75 * sx_pm - 0.25 * id_pm + 0.5 * p0;
  const Matrix rwa_id = -0.25 * sx_pm + 0.75 * id_pm + 0.5 * p0;
  for (int k = 0; k < 2; ++k) {
    out.mw_drive += 0.5 * d.omega_mw * on_center(space, spin1_x(), k);
    stat += 0.5 * m.delta_identity * on_center(space, id_pm, k) + 0.5 * m.delta_sp * on_center(space, sz_pm, k);
    out.full.add_with_hc(kI * 0.5 * m.omega_tilde * (ad * on_center(space, sp_pm, k)), m.delta_eps);
    rwa_stat += 0.5 * m.delta_identity * on_center(space, rwa_id, k);
    out.rwa.add_with_hc(kI * 0.5 * m.omega_tilde * (ad * on_center(space, 0.5 * rwa_sx, k)), m.delta_eps);
  }
  out.full.add(out.mw_drive + stat);
  out.rwa.add(rwa_stat);
  return out;
}

}  // namespace nvp
