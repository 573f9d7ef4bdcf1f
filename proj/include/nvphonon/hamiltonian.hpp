#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nvphonon/material.hpp"
#include "nvphonon/operators.hpp"

namespace nvp {

// ---- strain ---------------------------------------------------------------

/// Displacement gradient e(mu, nu) = du_mu / dr_nu.
struct StrainTensor {
  Eigen::Matrix3d e = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d symmetrized() const { return 0.5 * (e + e.transpose()); }
};

struct StrainShifts {
  double d1, d2, d3, d4;
};
StrainShifts strain_shifts(const StrainTensor& strain, const MaterialModel& material);

/// Ground triplet: 2 d1 times the identity.
Matrix strain_gs(const StrainTensor& strain, const MaterialModel& material);
/// Excited manifold in the basis {A1, A2, Ex, Ey, E1, E2}.
Matrix strain_es(const StrainTensor& strain, const MaterialModel& material);

// ---- single-level bases ----------------------------------------------------

/// Lambda system per NV: {g+1, g-1, e}.
namespace lambda {
inline constexpr int gp = 0, gm = 1, e = 2;
}
/// Microwave triplet per NV: {g+1, g0, g-1}.
namespace triplet {
inline constexpr int gp = 0, g0 = 1, gm = 2;
}

/// Qubit Pauli operators on {g+1, g-1}; sigma_z = |g+1><g+1| - |g-1><g-1|,
/// sigma_plus = |g+1><g-1|.
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix sigma_plus();

// ---- drives -----------------------------------------------------------------

enum class Path { single_path, double_path };

struct DriveConfig {
  double omega1 = 0;  ///< Rabi frequency on g+1 <-> e (carrier, detuning eps1)
  double omega2 = 0;  ///< Rabi frequency of the blue-sideband laser on g-1 <-> e
  double eps1 = 0;
  double eps2 = 0;
  std::array<double, 2> eta{0, 0};  ///< per-NV coupling coefficients
  double nu = 0;                    ///< mode frequency
  Path path = Path::double_path;
  bool compensate_eta2 = false;     ///< drop every eta^2 term (shift-compensation drive on)
  double omega_mw = 0;
  /// Splitting of a second excited state (0 = ignored). When set, each Raman
  /// amplitude gets a subtracted partner with detunings eps + splitting.
  double second_state_splitting = 0;

  double kappa1() const { return omega1 / eps1; }
};

/// Human-readable warnings for violated sideband hierarchies.
std::vector<std::string> drive_warnings(const DriveConfig& drive);

/// Lab-frame two-level NV {g, e} coupled to one mode.
struct LabDrive {
  double omega0 = 0;   ///< bare transition frequency
  double omega_l = 0;  ///< laser frequency
  double rabi = 0;
  double eta = 0;
  double nu = 0;
};

/// H(t) = w0~ sz/2 + nu a†a + [rabi/2 |e><g| e^{-i wL t} D + h.c.] with
/// w0~ = w0 + eta^2 nu and D = 1 + i eta (a + a†), or the exact exponential
/// exp(i eta (a + a†)) when `exact_displacement`. `n_mean` is the expected
/// phonon occupation used for the truncation check.
TimeDependentOperator lab_hamiltonian(const LabDrive& drive, int fock_dim, double n_mean = 0,
                                      bool exact_displacement = false);

/// Rotating-frame Lambda-system drive of every center in `space` (levels = 3,
/// Lambda basis), summed over centers; double path adds the g+1 <-> g-1 mirror.
TimeDependentOperator rotating_frame_hamiltonian(const DriveConfig& drive, const HilbertSpace& space);

/// Optical dipolar exchange (j_opt/2)(|e,g><g,e| + h.c.) in the Lambda basis.
Matrix optical_dipolar_operator(const HilbertSpace& space, double j_opt);

// ---- effective models -----------------------------------------------------------

enum class Tier { I, II };

struct DipolarTerms {
  double j_opt = 0;
  double j_mag = 0;
  double j_opt_tilde = 0;
  std::array<double, 2> omega_a{0, 0};
};

/// Coefficients of an effective Hamiltonian. delta and delta_n are the scalar
/// part and the n-operator coefficient of the single-qubit term, so that the
/// single-qubit coefficient is delta + delta_n * n.
struct EffectiveModel {
  Tier tier = Tier::I;
  Path path = Path::double_path;
  int centers = 2;
  std::array<double, 2> omega_tilde{0, 0};
  std::array<double, 2> delta{0, 0};
  std::array<double, 2> delta_n{0, 0};
  double delta_eps = 0;   ///< including the mode-shift term
  double mode_shift = 0;  ///< part of delta_eps coming from the eta^2 shift
  double omega_gate = 0;  ///< tier II
  double kappa2 = 0;      ///< |omega_tilde / delta_eps| (largest center)
  std::optional<DipolarTerms> dipolar;
};

struct EffectiveHamiltonian {
  EffectiveModel model;
  TimeDependentOperator h;  ///< on {g+1, g-1}^centers ⊗ Fock
};

/// Raman amplitude, Stark shifts and Δε after eliminating the excited state.
EffectiveModel effective_I_model(const DriveConfig& drive, int centers = 2);
TimeDependentOperator effective_I_operator(const EffectiveModel& model, int fock_dim);
EffectiveHamiltonian effective_I(const DriveConfig& drive, int centers, int fock_dim);

/// Second elimination (virtual phonon) from a tier-I model.
EffectiveModel effective_II_model(const EffectiveModel& tier1);
Matrix effective_II_operator(const EffectiveModel& model, int fock_dim);
EffectiveHamiltonian effective_II(const EffectiveModel& tier1, int fock_dim);

/// Detuning eps2 that makes |Ω̃/Δε| = kappa2 at fixed eps1 (Δε = eps1 - eps2 + shift > 0).
double eps2_for_kappa2(DriveConfig drive, double kappa2);

/// Figure-convention drive: Ω2 = kappa1 nu, Ω1 = eta Ω2, eps1 = Ω1/kappa1 and
/// eps2 solved for kappa2. Both centers get the same eta.
DriveConfig standard_drive(double eta, double nu, double kappa1, double kappa2, Path path,
                           bool compensate_eta2 = false);

// ---- dipolar couplings -----------------------------------------------------------

struct DipolarCouplings {
  double j_opt;
  double j_mag;
  double angular_factor;
  bool far_field_warning;  ///< n k0 r not small
};

/// `mag_exponent` selects the r-power of the magnetic coupling (3 by default).
DipolarCouplings dipolar_couplings(const Eigen::Vector3d& separation, const Eigen::Vector3d& p1,
                                   const Eigen::Vector3d& p2, const MaterialModel& material,
                                   int mag_exponent = 3);

/// Tier-I double-path model with optical and magnetic dipolar corrections.
/// `n_mean` is the phonon occupation used inside the dipolar exchange term.
EffectiveModel effective_I_dipolar_model(const DriveConfig& drive, double j_opt, double j_mag,
                                         double n_mean = 0);
TimeDependentOperator effective_I_dipolar_operator(const EffectiveModel& model, int fock_dim);
EffectiveHamiltonian effective_I_dipolar(const DriveConfig& drive, double j_opt, double j_mag,
                                         double n_mean, int fock_dim);

struct GateRates {
  double m1;  ///< rotation rate in {|g+1,g+1>, |g-1,g-1>}
  double m2;  ///< rotation rate in {|g+1,g-1>, |g-1,g+1>}
};
GateRates dipolar_gate_rates(const EffectiveModel& dipolar_model);

// ---- microwave-assisted gate ----------------------------------------------------

struct MwModel {
  double delta_identity;  ///< coefficient of 1_pm / 2
  double delta_sp;        ///< coefficient of sigma_z^pm / 2
  double omega_tilde;
  double delta_eps;
  double omega_gate;      ///< (9/8) Ω̃² / (8 Δε)
  double kappa2;
};

struct MwHamiltonian {
  MwModel model;
  TimeDependentOperator full;  ///< triplet^2 ⊗ Fock, microwave drive included
  TimeDependentOperator rwa;   ///< microwave interaction frame after the rotating-wave substitutions
  Matrix mw_drive;             ///< the static microwave part of `full`
};

/// Triplet operators (basis {g+1, g0, g-1}).
Matrix spin1_x();
Matrix spin1_y();
Matrix spin1_z();

/// Requires drive.omega_mw > 0; WeakDriving if it is not at least 10x the
/// effective scales. `include_carrier` keeps the Ω2²/(ν+ε2) Stark terms.
MwHamiltonian mw_hamiltonian(const DriveConfig& drive, int fock_dim, bool include_carrier = true);

/// Eta-weighted Raman pieces shared by effective models (exposed for tests).
double raman_amplitude(const DriveConfig& drive, int center);

}  // namespace nvp
