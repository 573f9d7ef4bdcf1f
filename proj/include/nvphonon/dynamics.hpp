#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nvphonon/hamiltonian.hpp"
#include "nvphonon/integrator.hpp"
#include "nvphonon/material.hpp"
#include "nvphonon/operators.hpp"

namespace nvp {

// ---- dissipators ----------------------------------------------------------------

struct Dissipator {
  TimeDependentOperator jump;
  double rate = 0;
  std::string label;
};

enum class Frame { lab, effective_I };
enum class DecayChannels {
  collective,   ///< one jump (|g+1> + |g-1>)<e| per center, rate Γ
  independent,  ///< |g+1><e| and |g-1><e| per center, rate Γ/2 each
};

struct DissipationConfig {
  double q_factor = std::numeric_limits<double>::infinity();
  double n_th = 0;
  bool nanodiamond_rate = false;  ///< use gamma_nd instead of gamma_e
  DecayChannels channels = DecayChannels::collective;
};

Frame parse_frame(const std::string& name);  ///< "lab" | "effective_I"; UnknownFrame otherwise

/// Lab frame: Lambda-basis space; decay with the displacement factor expanded
/// to first order in eta (terms at ±nu in the mode frame) plus the thermal
/// mode-relaxation pair. Effective frame: qubit space {g+1,g-1}^centers ⊗ Fock,
/// sigma_eff = -i sigma_- S(t) and a_eff = a - [S,[S,a]]/2 with S the
/// antiderivative of the rotating-frame drive.
std::vector<Dissipator> make_dissipators(const DriveConfig& drive, const MaterialModel& material,
                                         const DissipationConfig& config, Frame frame,
                                         const HilbertSpace& lab_space);

/// Squared Frobenius norm summed over the frequency components of a jump.
double jump_weight(const Dissipator& d);

// ---- pulses ------------------------------------------------------------------------

enum class PulseTag { echo_sy, echo_sz, echo_sx_pm, mw_frame_pulse };

struct Pulse {
  double time = 0;
  PulseTag tag = PulseTag::echo_sy;
  std::vector<int> targets{0, 1};
};

struct PulseSchedule {
  std::vector<Pulse> pulses;
  /// Throws InvalidParameter unless times increase strictly within [0, t_final].
  void validate(double t_final) const;
};

/// Level layout of a space, needed to build pulses and reduced observables.
enum class LevelBasis {
  qubit,    ///< {g+1, g-1}
  lambda,   ///< {g+1, g-1, e}
  triplet,  ///< {g+1, g0, g-1}
};

/// Ideal pulse unitary on the full space. echo_sy / echo_sz are π rotations
/// about y / z in {g+1, g-1} (other levels untouched); echo_sx_pm likewise
/// about x; mw_frame_pulse is exp(-iπ S_z) on the triplet.
Matrix pulse_unitary(PulseTag tag, const std::vector<int>& targets, const HilbertSpace& space, LevelBasis basis);

// ---- propagation ----------------------------------------------------------------

struct EvolveOptions {
  std::vector<double> sample_times;  ///< sorted, within [0, t_final]
  StepControl control{1e-9, 1e-11};
  double leak_threshold = 1e-4;
  bool keep_snapshots = false;
  LevelBasis basis = LevelBasis::qubit;
  /// Optional effective-frame map applied to states before observables are taken.
  std::function<Matrix(double, const Matrix&)> density_map;
  std::function<Vector(double, const Vector&)> state_map;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<std::string> labels;                ///< NV product-basis labels
  std::vector<std::vector<double>> populations;   ///< [time][label]
  std::vector<double> n_mean;
  std::vector<double> fidelity;                   ///< filled by simulate_gate
  std::vector<Matrix> snapshots;                  ///< reduced NV density matrices
  std::vector<Matrix> states;                     ///< full density matrices if keep_snapshots
  double trace_drift = 0;
  double min_eigenvalue = 0;
  long steps = 0;
};

/// Lindblad propagation of a density matrix. Pulses are instantaneous
/// unitaries; a sample coinciding with a pulse records the post-pulse state.
Trajectory evolve(const Matrix& rho0, const TimeDependentOperator& h, const std::vector<Dissipator>& dissipators,
                  const std::vector<std::pair<double, Matrix>>& pulses, double t_final, const HilbertSpace& space,
                  const EvolveOptions& options);

/// Schrödinger propagation of a state vector (no dissipation).
Trajectory evolve_pure(const Vector& psi0, const TimeDependentOperator& h,
                       const std::vector<std::pair<double, Matrix>>& pulses, double t_final,
                       const HilbertSpace& space, const EvolveOptions& options);

/// Throws InvalidState unless rho is Hermitian, unit trace and PSD within 1e-10.
void validate_density(const Matrix& rho);

/// Reduced density matrix of the NV degrees of freedom (Fock traced out).
Matrix reduce_nv(const Matrix& rho, const HilbertSpace& space);
/// Two-qubit density matrix on {g+1, g-1}^2 taken from a reduced NV matrix.
Matrix qubit_block(const Matrix& rho_nv, const HilbertSpace& space, LevelBasis basis);
double mean_phonon(const Matrix& rho, const HilbertSpace& space);
/// Population of the two highest Fock levels.
double fock_edge_population(const Matrix& rho, const HilbertSpace& space);

enum class Manifold { M1, M2 };
/// Fidelity with (|aa> - i e^{iφ}|bb>)/√2 maximized over φ; M1: a,b = g+1,g-1
/// on both centers; M2: |g+1,g-1> and |g-1,g+1>.
double bell_fidelity(const Matrix& rho_qubits, Manifold manifold);

/// Basis-product state |l1, l2> ⊗ thermal(n_th) (vacuum for n_th = 0).
Matrix product_density(const HilbertSpace& space, const std::vector<int>& levels, double n_th = 0);
Vector product_state(const HilbertSpace& space, const std::vector<int>& levels);

// ---- effective frame ------------------------------------------------------------

/// Indices of the all-ground (Lambda levels 0,1) subspace, in qubit order.
std::vector<int> ground_subspace(const HilbertSpace& lambda_space);

/// P_g exp(iS(t)) ψ with S the antiderivative of the rotating-frame drive.
class EffectiveFrameMap {
 public:
  EffectiveFrameMap(const TimeDependentOperator& rotating_frame_h, const HilbertSpace& lambda_space);
  Vector operator()(double t, const Vector& psi_lab) const;
  /// The dressed lab state exp(-iS(t)) ψ_ground corresponding to an effective state.
  Vector dress(double t, const Vector& psi_effective) const;
  const TimeDependentOperator& generator() const { return s_; }

 private:
  TimeDependentOperator s_;
  std::vector<int> ground_;
  int dim_;
};

// ---- gate simulation ---------------------------------------------------------------

enum class GateTier { lab, effective_I, effective_II };

struct GateConfig {
  DriveConfig drive;
  GateTier tier = GateTier::effective_I;
  bool echo = true;
  PulseTag echo_tag = PulseTag::echo_sy;
  double t_final = 0;      ///< 0: π/2 rotation time π/(2|Ω_gate|)
  int fock_dim = 16;
  int samples = 200;
  double n_th_initial = 0;
  std::vector<int> initial_levels{0, 0};  ///< qubit indices (0 = g+1, 1 = g-1)
  Manifold target = Manifold::M1;
  std::optional<DissipationConfig> dissipation;  ///< lab/effective_I only
  const MaterialModel* material = nullptr;
  StepControl control{1e-12, 1e-14};
};

struct GateReport {
  double t_gate = 0;
  double omega_gate = 0;
  double delta_eps = 0;
  double kappa2 = 0;
  double fidelity = 0;          ///< at t_final
  double refocus_residual = 0;  ///< |<n>(t_final) - <n>(0)|
  double n_peak = 0;
  double cross_population = 0;  ///< population outside the target manifold at t_final
  double trace_drift = 0;
  double min_eigenvalue = 0;
  long steps = 0;
  std::vector<std::string> warnings;
};

struct GateResult {
  Trajectory trajectory;
  GateReport report;
};

GateResult simulate_gate(const GateConfig& config);

struct MwGateConfig {
  DriveConfig drive;  ///< omega_mw > 0, single path
  bool echo = true;
  int closure_index = 2;  ///< t_gate = 2π n / Δε
  int fock_dim = 12;
  int samples = 200;
  bool include_carrier = false;
  StepControl control{1e-11, 1e-13};
};

struct MwGateReport {
  double t_gate = 0;
  double omega_gate = 0;
  double kappa2 = 0;
  double g0_leakage = 0;       ///< max over time of the total |g0> population
  double rotation_angle = 0;   ///< fitted from final M1 populations
  double expected_angle = 0;   ///< |Ω_gate| t_gate
  double refocus_residual = 0;
  double trace_drift = 0;
  long steps = 0;
};

struct MwGateResult {
  Trajectory trajectory;
  MwGateReport report;
};

/// Exact microwave-interaction-frame propagation of the triplet Hamiltonian
/// (no rotating-wave approximation), echo at t_gate/2.
MwGateResult simulate_mw_gate(const MwGateConfig& config);

// ---- decay fits ------------------------------------------------------------------

struct DecayFit {
  double gamma_fit = 0;
  double gamma_ratio = 0;  ///< gamma_fit / Γ
  double trace_drift = 0;
};

/// Bright-state decay of a single double-path-driven NV (Ω1 only) with the
/// decay channel redirected to a sink level; the ground population is fitted
/// to an exponential. `frame` selects the full drive or the effective jump
/// operator on the ground manifold.
DecayFit fit_effective_decay(double kappa1, double eps1, double gamma, Frame frame,
                             DecayChannels channels = DecayChannels::collective);

}  // namespace nvp
