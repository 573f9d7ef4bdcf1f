#pragma once

#include <array>
#include <vector>

#include "nvphonon/dynamics.hpp"
#include "nvphonon/hamiltonian.hpp"
#include "nvphonon/material.hpp"
#include "nvphonon/operators.hpp"

namespace nvp {

// ---- closed-form evolution ------------------------------------------------------

struct ExactEvolution {
  cplx alpha;  ///< displacement amplitude per unit of Ô
  cplx beta;   ///< phase coefficient; U carries exp(i Im(beta) Ô²)
  Matrix u;    ///< on {g+1,g-1}^2 ⊗ Fock
};

/// Displacement amplitude and phase of the double-path tier-I coupling
/// iΩ̃/2 a† Ô e^{iΔε t} + h.c. with Ô = σx¹ + σx² + 2.
cplx exact_alpha(double omega_tilde, double delta_eps, double t);
cplx exact_beta(double omega_tilde, double delta_eps, double t);

/// U = Σ_o P_o ⊗ D(α o) e^{i Im(β) o²} over the eigenvalues o ∈ {0, 2, 4} of Ô.
/// Throws TruncationTooSmall if a displaced vacuum D(4α)|0> leaves more than
/// 1e-10 of its weight above the truncation.
ExactEvolution exact_unitary(double omega_tilde, double delta_eps, double t, int fock_dim);

/// Propagator of a (time-dependent) Hamiltonian by integrating every column.
Matrix propagate_unitary(const TimeDependentOperator& h, double t_final, const StepControl& control = {1e-12, 1e-14});

/// |Tr(P U† V P)|² / (Tr P)² with P the projector on the listed basis states
/// (all states if `keep` is empty).
double operator_fidelity(const Matrix& u, const Matrix& v, const std::vector<int>& keep = {});

/// Basis states of {g+1,g-1}^2 ⊗ Fock with phonon number <= n_max.
std::vector<int> low_fock_states(int fock_dim, int n_max);

struct ExactCheckReport {
  double omega_tilde = 0;
  double delta_eps = 0;
  double kappa2 = 0;
  int m = 0;
  double t_gate = 0;
  cplx alpha;
  cplx beta;
  double fidelity_integrated = 0;   ///< compensated tier I (local terms removed) vs exact U
  double distance_effective_II = 0; ///< ‖U - e^{iφ} exp(-i H_II t)‖ at closure
};

/// Exact unitary at t = 2πm/Δε against direct integration of the compensated
/// tier-I coupling (fidelity on Fock states n <= fock_dim/2) and against the
/// tier-II propagator.
ExactCheckReport exact_check(const DriveConfig& drive, int m, int fock_dim);

// ---- figure of merit ---------------------------------------------------------

struct SweepPoint {
  double diameter = 0;
  double kappa1 = 0;
  double kappa2 = 0;
  double eta = 0;
  double nu = 0;
  double omega2 = 0;
  double omega_gate = 0;
  double gamma_eff = 0;
  double ratio = 0;  ///< omega_gate / gamma_eff
};

struct SweepOptions {
  bool nanodiamond_rate = false;       ///< Γ = gamma_nd
  double second_state_splitting = 0;   ///< 0: single excited state
  int workers = 1;
};

/// One point: PBC lowest mode of a sphere, figure-convention drive
/// (Ω2 = κ1 ν, Ω1 = η Ω2), exact tier-II Ω_gate and Γ_eff = κ1² Γ.
SweepPoint figure_of_merit_point(const MaterialModel& material, double diameter, double kappa1, double kappa2,
                                 const SweepOptions& options = {});

/// Points ordered by (kappa1, kappa2, diameter), evaluated on `options.workers` threads.
std::vector<SweepPoint> gate_figure_of_merit(const MaterialModel& material, const std::vector<double>& kappa1,
                                             const std::vector<double>& kappa2, const std::vector<double>& diameters,
                                             const SweepOptions& options = {});

/// Scaling-level ratio (κ1 κ2 η Ω2) / (κ1² Γ) with Ω2 = κ1 ν.
double scaling_ratio(double kappa1, double kappa2, double eta, double nu, double gamma);

/// Diameter where Ω_gate/Γ_eff = 1, by bisection on log(ratio) in [d_lo, d_hi].
/// Throws NoRootInBracket if the ratio does not cross 1 there.
double crossing_diameter(const MaterialModel& material, double kappa1, double kappa2, double d_lo, double d_hi,
                         const SweepOptions& options = {});

struct DirectComparison {
  double raman_ratio = 0;   ///< (κ2/κ1) η Ω / Γ
  double direct_ratio = 0;  ///< κ1 η Ω / Γ
  double advantage = 0;     ///< raman / direct
};

DirectComparison direct_gate_comparison(double kappa1, double kappa2, double eta, double omega, double gamma);

// ---- closure times ---------------------------------------------------------

enum class ClosureScheme { raman, microwave };

struct Closure {
  int m = 0;
  double t_gate = 0;
  double kappa2 = 0;
};

/// Smallest m (even when an echo must land on a closure time) whose implied
/// κ2 for rotation θ stays <= kappa2_max: κ2 = sqrt(θ/(2πm)) for the Raman
/// gate, sqrt(32θ/(9πm)) for the microwave-assisted gate.
Closure closure_times(double delta_eps, double theta, ClosureScheme scheme = ClosureScheme::raman, bool echo = true,
                      double kappa2_max = 1.0);

// ---- lab vs effective --------------------------------------------------------

struct HierarchyReport {
  double t_final = 0;
  double max_population_error = 0;  ///< over samples and the four qubit states
  double trace_drift = 0;
  long steps = 0;
  std::vector<double> t;
  std::vector<std::array<double, 4>> lab;        ///< effective-frame populations of the lab run
  std::vector<std::array<double, 4>> effective;  ///< tier-I populations
};

/// Rotating-frame Lambda model started in the dressed |g+1 g+1, 0> and mapped
/// to the effective frame, against tier I started in |g+1 g+1, 0>, over
/// `periods` × 2π/Δε.
HierarchyReport compare_lab_effective(const DriveConfig& drive, int fock_dim, double periods = 1.0, int samples = 100,
                                      const StepControl& control = {1e-10, 1e-12});

}  // namespace nvp
