#include "nvphonon/dynamics.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "nvphonon/errors.hpp"
#include "nvphonon/units.hpp"

namespace nvp {

Frame parse_frame(const std::string& name) {
  if (name == "lab") return Frame::lab;
  if (name == "effective_I" || name == "eff1") return Frame::effective_I;
  throw Error(ErrorCode::UnknownFrame, "frame '" + name + "'");
}

namespace {

std::vector<std::pair<Matrix, double>> decay_ops(DecayChannels channels, int levels, int e, int gp, int gm) {
  if (channels == DecayChannels::collective) return {{ket_bra(levels, gp, e) + ket_bra(levels, gm, e), 1.0}};
  return {{ket_bra(levels, gp, e), 0.5}, {ket_bra(levels, gm, e), 0.5}};
}

Matrix local(const HilbertSpace& s, const Matrix& nv, int k, const Matrix& mode) {
  std::vector<Matrix> ops(static_cast<std::size_t>(s.centers), Matrix::Identity(s.levels, s.levels));
  ops[static_cast<std::size_t>(k)] = nv;
  return embed(s, ops, mode);
}

}  // namespace

std::vector<Dissipator> make_dissipators(const DriveConfig& drive, const MaterialModel& material,
                                         const DissipationConfig& config, Frame frame,
                                         const HilbertSpace& space) {
  validate(space);
  if (space.levels != 3) throw Error(ErrorCode::InvalidParameter, "dissipators need the Lambda basis");
  if (config.q_factor <= 0 || config.n_th < 0) throw Error(ErrorCode::InvalidParameter, "Q > 0 and n_th >= 0 required");
  const double gamma = config.nanodiamond_rate ? material.gamma_nd : material.gamma_e;
  const int f = space.fock_dim;
  const Matrix id_f = Matrix::Identity(f, f);
  const Matrix a = annihilation(f);
  std::vector<Dissipator> out;

  const double mode_rate = std::isinf(config.q_factor) ? 0.0 : drive.nu / config.q_factor;
  if (frame == Frame::lab) {
    for (int k = 0; k < space.centers; ++k) {
      const double eta = drive.eta[static_cast<std::size_t>(k)];
      for (const auto& [op, weight] : decay_ops(config.channels, 3, lambda::e, lambda::gp, lambda::gm)) {
        Dissipator d;
        d.jump = TimeDependentOperator(space.dim());
        d.jump.add(local(space, op, k, id_f));
        if (f > 1 && eta != 0) {
          d.jump.add(-kI * eta * local(space, op, k, a), -drive.nu);
          d.jump.add(-kI * eta * local(space, op, k, a.adjoint()), drive.nu);
        }
        d.rate = weight * gamma;
        d.label = "decay_" + std::to_string(k + 1);
        out.push_back(std::move(d));
      }
    }
    if (f > 1) {
      TimeDependentOperator down(space.dim()), up(space.dim());
      down.add(on_mode(space, a));
      up.add(on_mode(space, a.adjoint()));
      out.push_back({down, mode_rate * (config.n_th + 1), "mode_down"});
      out.push_back({up, mode_rate * config.n_th, "mode_up"});
    }
    return out;
  }

  if (frame != Frame::effective_I) throw Error(ErrorCode::UnknownFrame, "unsupported frame");
  const TimeDependentOperator s = antiderivative(rotating_frame_hamiltonian(drive, space));
  const std::vector<int> ground = ground_subspace(space);
  for (int k = 0; k < space.centers; ++k) {
    for (const auto& [op, weight] : decay_ops(config.channels, 3, lambda::e, lambda::gp, lambda::gm)) {
      Dissipator d;
      d.jump = restrict_to((-kI * local(space, op, k, id_f)) * s, ground);
      d.jump.prune(1e-14);
      d.rate = weight * gamma;
      d.label = "decay_eff_" + std::to_string(k + 1);
      out.push_back(std::move(d));
    }
  }
  if (f > 1) {
    const Matrix am = on_mode(space, a);
    const TimeDependentOperator sa = s * am;
    TimeDependentOperator comm = sa;
    comm += (-1.0 * am) * s;               // [S, a]
    TimeDependentOperator dc = s * comm;  // [S, [S, a]]
    const TimeDependentOperator cs = comm * s;
    for (const auto& t : cs.terms()) dc.add(-t.op, t.omega);
    TimeDependentOperator aeff(space.dim());
    aeff.add(am);
    for (const auto& t : dc.terms()) aeff.add(-0.5 * t.op, t.omega);
    aeff = restrict_to(aeff, ground);
    aeff.prune(1e-14);
    out.push_back({aeff, mode_rate * (config.n_th + 1), "mode_down_eff"});
    out.push_back({aeff.adjoint(), mode_rate * config.n_th, "mode_up_eff"});
  }
  return out;
}

double jump_weight(const Dissipator& d) {
  double w = 0;
  for (const auto& t : d.jump.terms()) w += t.op.squaredNorm();
  return w;
}

// ---- pulses ------------------------------------------------------------------------

void PulseSchedule::validate(double t_final) const {
  double prev = -1;
  for (const auto& p : pulses) {
    if (!(p.time >= 0 && p.time <= t_final)) throw Error(ErrorCode::InvalidParameter, "pulse outside [0, t_final]");
    if (p.time <= prev) throw Error(ErrorCode::InvalidParameter, "pulse times must increase strictly");
    prev = p.time;
  }
}

namespace {

std::array<int, 2> qubit_levels(LevelBasis basis) {
  return basis == LevelBasis::triplet ? std::array<int, 2>{triplet::gp, triplet::gm} : std::array<int, 2>{0, 1};
}

int level_count(LevelBasis basis) { return basis == LevelBasis::qubit ? 2 : 3; }

}  // namespace

Matrix pulse_unitary(PulseTag tag, const std::vector<int>& targets, const HilbertSpace& space, LevelBasis basis) {
  const int n = level_count(basis);
  if (space.levels != n) throw Error(ErrorCode::InvalidParameter, "pulse basis does not match the space");
  Matrix u = Matrix::Identity(n, n);
  if (tag == PulseTag::mw_frame_pulse) {
    if (basis != LevelBasis::triplet) throw Error(ErrorCode::InvalidParameter, "frame pulse needs the triplet basis");
    u(0, 0) = -1;
    u(2, 2) = -1;
  } else {
    const Matrix p = tag == PulseTag::echo_sy ? pauli_y() : tag == PulseTag::echo_sz ? pauli_z() : pauli_x();
    const auto q = qubit_levels(basis);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) u(q[i], q[j]) = -kI * p(i, j);
  }
  std::vector<Matrix> ops(static_cast<std::size_t>(space.centers), Matrix::Identity(n, n));
  for (int t : targets) ops.at(static_cast<std::size_t>(t)) = u;
  return embed(space, ops, Matrix::Identity(space.fock_dim, space.fock_dim));
}

// ---- observables ----------------------------------------------------------------------

void validate_density(const Matrix& rho) {
  if (rho.rows() != rho.cols()) throw Error(ErrorCode::InvalidState, "density matrix not square");
  if (hermiticity_defect(rho) > 1e-10) throw Error(ErrorCode::InvalidState, "density matrix not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-10) throw Error(ErrorCode::InvalidState, "trace differs from 1");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) throw Error(ErrorCode::InvalidState, "density matrix not positive");
}

Matrix reduce_nv(const Matrix& rho, const HilbertSpace& s) {
  const int nv = s.nv_dim(), f = s.fock_dim;
  Matrix out = Matrix::Zero(nv, nv);
  for (int i = 0; i < nv; ++i)
    for (int j = 0; j < nv; ++j) out(i, j) = rho.block(i * f, j * f, f, f).trace();
  return out;
}

Matrix qubit_block(const Matrix& rho_nv, const HilbertSpace& s, LevelBasis basis) {
  const auto q = qubit_levels(basis);
  std::vector<int> idx;
  if (s.centers == 1) {
    idx = {q[0], q[1]};
  } else {
    for (int a : q)
      for (int b : q) idx.push_back(a * s.levels + b);
  }
  return restrict_to(rho_nv, idx);
}

double mean_phonon(const Matrix& rho, const HilbertSpace& s) {
  double n = 0;
  for (int i = 0; i < s.nv_dim(); ++i)
    for (int k = 0; k < s.fock_dim; ++k) n += k * rho(i * s.fock_dim + k, i * s.fock_dim + k).real();
  return n;
}

double fock_edge_population(const Matrix& rho, const HilbertSpace& s) {
  if (s.fock_dim < 4) return 0;
  double p = 0;
  for (int i = 0; i < s.nv_dim(); ++i)
    for (int k = s.fock_dim - 2; k < s.fock_dim; ++k) p += rho(i * s.fock_dim + k, i * s.fock_dim + k).real();
  return p;
}

double bell_fidelity(const Matrix& rho, Manifold manifold) {
  if (rho.rows() != 4) throw Error(ErrorCode::InvalidParameter, "two-qubit density matrix expected");
  const int a = manifold == Manifold::M1 ? 0 : 1;
  const int b = manifold == Manifold::M1 ? 3 : 2;
  return std::clamp(0.5 * (rho(a, a).real() + rho(b, b).real()) + std::abs(rho(a, b)), 0.0, 1.0);
}

Vector product_state(const HilbertSpace& s, const std::vector<int>& levels) {
  if (static_cast<int>(levels.size()) != s.centers) throw Error(ErrorCode::InvalidParameter, "one level per center");
  int idx = 0;
  for (int l : levels) idx = idx * s.levels + l;
  Vector psi = Vector::Zero(s.dim());
  psi(idx * s.fock_dim) = 1.0;
  return psi;
}

Matrix product_density(const HilbertSpace& s, const std::vector<int>& levels, double n_th) {
  const Vector psi = product_state(s, levels);
  int idx = 0;
  for (int l : levels) idx = idx * s.levels + l;
  Matrix rho = Matrix::Zero(s.dim(), s.dim());
  if (n_th <= 0) return psi * psi.adjoint();
  double z = 0;
  for (int k = 0; k < s.fock_dim; ++k) z += std::pow(n_th / (1 + n_th), k);
  for (int k = 0; k < s.fock_dim; ++k) rho(idx * s.fock_dim + k, idx * s.fock_dim + k) = std::pow(n_th / (1 + n_th), k) / z;
  return rho;
}

// ---- propagation ------------------------------------------------------------------

namespace {

std::vector<std::string> basis_labels(const HilbertSpace& s, LevelBasis basis) {
  std::vector<std::string> names;
  switch (basis) {
    case LevelBasis::qubit: names = {"g+1", "g-1"}; break;
    case LevelBasis::lambda: names = {"g+1", "g-1", "e"}; break;
    case LevelBasis::triplet: names = {"g+1", "g0", "g-1"}; break;
  }
  if (static_cast<int>(names.size()) != s.levels) {
    names.clear();
    for (int i = 0; i < s.levels; ++i) names.push_back(std::to_string(i));
  }
  std::vector<std::string> out;
  if (s.centers == 1) return names;
  for (const auto& a : names)
    for (const auto& b : names) out.push_back(a + "," + b);
  return out;
}

struct Sampler {
  const HilbertSpace& sim_space;
  HilbertSpace obs_space;
  const EvolveOptions& opt;
  Trajectory& traj;

  void check_leak(double edge, double t) const {
    if (edge > opt.leak_threshold)
      throw Error(ErrorCode::TruncationLeak, "top Fock populations " + std::to_string(edge) + " at t = " + std::to_string(t));
  }

  void record_density(double t, const Matrix& rho_sim) {
    check_leak(fock_edge_population(rho_sim, sim_space), t);
    const Matrix rho = opt.density_map ? opt.density_map(t, rho_sim) : rho_sim;
    const Matrix red = reduce_nv(rho, obs_space);
    push(t, red, mean_phonon(rho, obs_space));
    if (opt.keep_snapshots) traj.states.push_back(rho);
  }

  void record_state(double t, const Vector& psi_sim) {
    const int f = sim_space.fock_dim;
    double edge = 0;
    if (f >= 4)
      for (int i = 0; i < sim_space.nv_dim(); ++i) edge += psi_sim.segment(i * f + f - 2, 2).squaredNorm();
    check_leak(edge, t);
    const Vector psi = opt.state_map ? opt.state_map(t, psi_sim) : psi_sim;
    const int fo = obs_space.fock_dim, nv = obs_space.nv_dim();
    Eigen::Map<const Matrix> m(psi.data(), fo, nv);
    const Matrix red = m.transpose() * m.conjugate();
    double n = 0;
    for (int k = 0; k < fo; ++k) n += k * m.row(k).squaredNorm();
    push(t, red, n);
    if (opt.keep_snapshots) traj.states.push_back(psi * psi.adjoint());
  }

  void push(double t, const Matrix& red, double n) {
    traj.t.push_back(t);
    std::vector<double> pops(static_cast<std::size_t>(red.rows()));
    for (Eigen::Index i = 0; i < red.rows(); ++i) pops[static_cast<std::size_t>(i)] = red(i, i).real();
    traj.populations.push_back(std::move(pops));
    traj.n_mean.push_back(n);
    traj.snapshots.push_back(red);
  }
};

std::vector<double> breakpoints(const std::vector<double>& samples, const std::vector<std::pair<double, Matrix>>& pulses,
                                double t_final) {
  std::vector<double> bp(samples);
  for (const auto& p : pulses) bp.push_back(p.first);
  bp.push_back(t_final);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  for (double t : bp)
    if (t < 0 || t > t_final) throw Error(ErrorCode::InvalidParameter, "sample or pulse time outside [0, t_final]");
  return bp;
}

template <class State, class Rhs, class Apply, class Record>
long march(State& y, const std::vector<double>& samples, const std::vector<std::pair<double, Matrix>>& pulses,
           double t_final, const StepControl& control, Rhs&& rhs, Apply&& apply, Record&& record) {
  const std::vector<double> bp = breakpoints(samples, pulses, t_final);
  Dopri5<State> stepper(control);
  double t = 0;
  std::size_t next_pulse = 0;
  for (double b : bp) {
    stepper.integrate(y, t, b, rhs);
    t = b;
    while (next_pulse < pulses.size() && pulses[next_pulse].first == b) apply(pulses[next_pulse++].second);
    if (std::binary_search(samples.begin(), samples.end(), b)) record(b, y);
  }
  return stepper.stats().accepted + stepper.stats().rejected;
}

std::vector<double> sorted_samples(const EvolveOptions& opt) {
  std::vector<double> s = opt.sample_times;
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

Trajectory evolve(const Matrix& rho0, const TimeDependentOperator& h, const std::vector<Dissipator>& dissipators,
                  const std::vector<std::pair<double, Matrix>>& pulses, double t_final, const HilbertSpace& space,
                  const EvolveOptions& options) {
  validate_density(rho0);
  if (rho0.rows() != space.dim() || h.dim() != space.dim())
    throw Error(ErrorCode::InvalidParameter, "state / Hamiltonian dimension mismatch");
  Trajectory traj;
  HilbertSpace obs = space;
  if (options.density_map) {
    obs.levels = 2;
  }
  traj.labels = basis_labels(obs, options.basis);
  Sampler sampler{space, obs, options, traj};

  const SparseTerms hs(h);
  struct Channel {
    SparseTerms jump;
    double rate;
    bool is_static;
    SparseMatrix l;
    SparseMatrix k;
  };
  std::vector<Channel> channels;
  for (const auto& d : dissipators) {
    if (d.rate < 0) throw Error(ErrorCode::InvalidParameter, "negative dissipation rate");
    if (d.rate == 0) continue;
    Channel c{SparseTerms(d.jump), d.rate, false, {}, {}};
    c.is_static = c.jump.ops.size() == 1 && c.jump.omega[0] == 0.0;
    if (c.is_static) {
      c.l = c.jump.ops[0];
      c.k = SparseMatrix(c.l.adjoint()) * c.l;
    }
    channels.push_back(std::move(c));
  }

  auto rhs = [&](double t, const Matrix& rho) -> Matrix {
    const Matrix hr = hs.apply(t, rho);
    Matrix out = -kI * (hr - hr.adjoint());
    for (const auto& c : channels) {
      SparseMatrix l, k;
      if (c.is_static) {
        l = c.l;
        k = c.k;
      } else {
        l = c.jump.at(t);
        k = SparseMatrix(l.adjoint()) * l;
      }
      const Matrix lr = l * rho;
      const Matrix kr = k * rho;
      out += c.rate * (l * Matrix(lr.adjoint()) - 0.5 * (kr + kr.adjoint()));
    }
    return out;
  };

  Matrix rho = rho0;
  const double tr0 = rho0.trace().real();
  double min_eig = 1.0;
  auto record = [&](double t, const Matrix& r) {
    traj.trace_drift = std::max(traj.trace_drift, std::abs(r.trace().real() - tr0));
    if (!channels.empty()) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (r + r.adjoint()), Eigen::EigenvaluesOnly);
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    }
    sampler.record_density(t, r);
  };
  auto apply = [&](const Matrix& u) { rho = u * rho * u.adjoint(); };
  traj.steps = march(rho, sorted_samples(options), pulses, t_final, options.control, rhs, apply, record);
  traj.trace_drift = std::max(traj.trace_drift, std::abs(rho.trace().real() - tr0));
  traj.min_eigenvalue = channels.empty() ? 0.0 : min_eig;
  return traj;
}

Trajectory evolve_pure(const Vector& psi0, const TimeDependentOperator& h,
                       const std::vector<std::pair<double, Matrix>>& pulses, double t_final,
                       const HilbertSpace& space, const EvolveOptions& options) {
  if (psi0.size() != space.dim() || h.dim() != space.dim())
    throw Error(ErrorCode::InvalidParameter, "state / Hamiltonian dimension mismatch");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw Error(ErrorCode::InvalidState, "state not normalized");
  Trajectory traj;
  HilbertSpace obs = space;
  if (options.state_map) obs.levels = 2;
  traj.labels = basis_labels(obs, options.basis);
  Sampler sampler{space, obs, options, traj};
  const SparseTerms hs(h);
  auto rhs = [&](double t, const Vector& psi) -> Vector { return -kI * hs.apply(t, psi); };
  Vector psi = psi0;
  auto record = [&](double t, const Vector& p) {
    traj.trace_drift = std::max(traj.trace_drift, std::abs(p.squaredNorm() - 1.0));
    sampler.record_state(t, p);
  };
  auto apply = [&](const Matrix& u) { psi = u * psi; };
  traj.steps = march(psi, sorted_samples(options), pulses, t_final, options.control, rhs, apply, record);
  traj.trace_drift = std::max(traj.trace_drift, std::abs(psi.squaredNorm() - 1.0));
  return traj;
}

// ---- effective frame --------------------------------------------------------------

std::vector<int> ground_subspace(const HilbertSpace& s) {
  if (s.levels != 3) throw Error(ErrorCode::InvalidParameter, "Lambda basis expected");
  std::vector<int> idx;
  const int nq = s.centers == 2 ? 4 : 2;
  for (int q = 0; q < nq; ++q) {
    const int nv = s.centers == 2 ? (q / 2) * 3 + (q % 2) : q;
    for (int n = 0; n < s.fock_dim; ++n) idx.push_back(nv * s.fock_dim + n);
  }
  return idx;
}

EffectiveFrameMap::EffectiveFrameMap(const TimeDependentOperator& h, const HilbertSpace& space)
    : s_(antiderivative(h)), ground_(ground_subspace(space)), dim_(space.dim()) {}

namespace {

// exp(i c S) psi by its Taylor series; S is small (order kappa1).
Vector exp_apply(const Matrix& s, const Vector& psi, double sign) {
  Vector out = psi, term = psi;
  for (int k = 1; k < 60; ++k) {
    term = (sign * kI / double(k)) * (s * term);
    out += term;
    if (term.norm() < 1e-17 * out.norm()) break;
  }
  return out;
}

}  // namespace

Vector EffectiveFrameMap::operator()(double t, const Vector& psi) const {
  const Vector full = exp_apply(s_.at(t), psi, 1.0);
  Vector out(static_cast<Eigen::Index>(ground_.size()));
  for (std::size_t i = 0; i < ground_.size(); ++i) out(static_cast<Eigen::Index>(i)) = full(ground_[i]);
  return out;
}

Vector EffectiveFrameMap::dress(double t, const Vector& psi_eff) const {
  Vector full = Vector::Zero(dim_);
  for (std::size_t i = 0; i < ground_.size(); ++i) full(ground_[i]) = psi_eff(static_cast<Eigen::Index>(i));
  return exp_apply(s_.at(t), full, -1.0);
}

// ---- gate simulation -------------------------------------------------------------

namespace {

std::vector<double> uniform_samples(double t_final, int n) {
  std::vector<double> s;
  for (int k = 0; k <= n; ++k) s.push_back(t_final * k / n);
  s.back() = t_final;
  return s;
}

}  // namespace

GateResult simulate_gate(const GateConfig& cfg) {
  const MaterialModel& material = cfg.material ? *cfg.material : diamond_default();
  GateResult res;
  GateReport& rep = res.report;
  rep.warnings = drive_warnings(cfg.drive);

  const EffectiveModel m1 = effective_I_model(cfg.drive, 2);
  const EffectiveModel m2 = effective_II_model(m1);
  rep.omega_gate = m2.omega_gate;
  rep.delta_eps = m1.delta_eps;
  rep.kappa2 = m1.kappa2;
  const double t_final = cfg.t_final > 0 ? cfg.t_final : kPi / (2 * std::abs(m2.omega_gate));
  rep.t_gate = t_final;

  HilbertSpace space;
  LevelBasis basis = LevelBasis::qubit;
  TimeDependentOperator h;
  switch (cfg.tier) {
    case GateTier::lab:
      space = {3, 2, cfg.fock_dim};
      basis = LevelBasis::lambda;
      h = rotating_frame_hamiltonian(cfg.drive, space);
      break;
    case GateTier::effective_I:
      space = {2, 2, cfg.fock_dim};
      basis = LevelBasis::qubit;
      h = effective_I_operator(m1, cfg.fock_dim);
      break;
    case GateTier::effective_II:
      space = {2, 2, cfg.fock_dim};
      basis = LevelBasis::qubit;
      h = TimeDependentOperator(space.dim());
      h.add(effective_II_operator(m2, cfg.fock_dim));
      break;
  }
  validate(space);

  std::vector<std::pair<double, Matrix>> pulses;
  if (cfg.echo) pulses.emplace_back(0.5 * t_final, pulse_unitary(cfg.echo_tag, {0, 1}, space, basis));

  EvolveOptions opt;
  opt.sample_times = uniform_samples(t_final, cfg.samples);
  opt.control = cfg.control;
  opt.basis = basis;

  const bool dissipative = cfg.dissipation.has_value();
  if (dissipative || cfg.n_th_initial > 0) {
    std::vector<Dissipator> diss;
    if (dissipative) {
      if (cfg.tier == GateTier::effective_II)
        throw Error(ErrorCode::InvalidParameter, "dissipation is defined for the lab and tier-I frames");
      const HilbertSpace lab{3, 2, cfg.fock_dim};
      diss = make_dissipators(cfg.drive, material, *cfg.dissipation,
                              cfg.tier == GateTier::lab ? Frame::lab : Frame::effective_I, lab);
    }
    const Matrix rho0 = product_density(space, cfg.initial_levels, cfg.n_th_initial);
    res.trajectory = evolve(rho0, h, diss, pulses, t_final, space, opt);
  } else {
    res.trajectory = evolve_pure(product_state(space, cfg.initial_levels), h, pulses, t_final, space, opt);
  }

  Trajectory& tr = res.trajectory;
  for (const auto& red : tr.snapshots) tr.fidelity.push_back(bell_fidelity(qubit_block(red, space, basis), cfg.target));
  const Matrix q_end = qubit_block(tr.snapshots.back(), space, basis);
  rep.fidelity = tr.fidelity.back();
  const int a = cfg.target == Manifold::M1 ? 0 : 1, b = cfg.target == Manifold::M1 ? 3 : 2;
  rep.cross_population = std::max(0.0, 1.0 - q_end(a, a).real() - q_end(b, b).real());
  rep.refocus_residual = std::abs(tr.n_mean.back() - tr.n_mean.front());
  rep.n_peak = *std::max_element(tr.n_mean.begin(), tr.n_mean.end());
  rep.trace_drift = tr.trace_drift;
  rep.min_eigenvalue = tr.min_eigenvalue;
  rep.steps = tr.steps;
  return res;
}

MwGateResult simulate_mw_gate(const MwGateConfig& cfg) {
  const MwHamiltonian mw = mw_hamiltonian(cfg.drive, cfg.fock_dim, cfg.include_carrier);
  const HilbertSpace space{3, 2, cfg.fock_dim};
  TimeDependentOperator coupling = mw.full;
  coupling.add(-mw.mw_drive);
  TimeDependentOperator h = to_interaction_frame(coupling, mw.mw_drive);
  h.prune(1e-15);

  MwGateResult res;
  MwGateReport& rep = res.report;
  rep.omega_gate = mw.model.omega_gate;
  rep.kappa2 = mw.model.kappa2;
  rep.t_gate = kTwoPi * cfg.closure_index / std::abs(mw.model.delta_eps);
  rep.expected_angle = std::abs(rep.omega_gate) * rep.t_gate;

  std::vector<std::pair<double, Matrix>> pulses;
  if (cfg.echo) pulses.emplace_back(0.5 * rep.t_gate, pulse_unitary(PulseTag::echo_sz, {0, 1}, space, LevelBasis::triplet));
  EvolveOptions opt;
  opt.sample_times = uniform_samples(rep.t_gate, cfg.samples);
  opt.control = cfg.control;
  opt.basis = LevelBasis::triplet;
  res.trajectory = evolve_pure(product_state(space, {triplet::gp, triplet::gp}), h, pulses, rep.t_gate, space, opt);

  const Trajectory& tr = res.trajectory;
  for (const auto& pops : tr.populations) {
    double g0 = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i == triplet::g0 || j == triplet::g0) g0 += pops[static_cast<std::size_t>(i * 3 + j)];
    rep.g0_leakage = std::max(rep.g0_leakage, g0);
  }
  const auto& fin = tr.populations.back();
  const double ppp = fin[static_cast<std::size_t>(triplet::gp * 3 + triplet::gp)];
  const double pmm = fin[static_cast<std::size_t>(triplet::gm * 3 + triplet::gm)];
  rep.rotation_angle = 2 * std::atan2(std::sqrt(std::max(pmm, 0.0)), std::sqrt(std::max(ppp, 0.0)));
  rep.refocus_residual = std::abs(tr.n_mean.back() - tr.n_mean.front());
  rep.trace_drift = tr.trace_drift;
  rep.steps = tr.steps;
  return res;
}

// ---- decay fits ---------------------------------------------------------------------

DecayFit fit_effective_decay(double kappa1, double eps1, double gamma, Frame frame, DecayChannels channels) {
  if (!(kappa1 > 0 && kappa1 < 1) || !(eps1 > 0) || !(gamma > 0))
    throw Error(ErrorCode::InvalidParameter, "0 < kappa1 < 1, eps1 > 0, gamma > 0 required");
  // levels {g+1, g-1, e, sink}, no mode
  const int gp = 0, gm = 1, e = 2, sink = 3;
  const double omega1 = kappa1 * eps1;
  TimeDependentOperator v(4);
  v.add_with_hc(0.5 * omega1 * (ket_bra(4, e, gp) + ket_bra(4, e, gm)), -eps1);
  std::vector<std::pair<Matrix, double>> lab_jumps;
  if (channels == DecayChannels::collective) {
    lab_jumps.push_back({std::sqrt(2.0) * ket_bra(4, sink, e), gamma});
  } else {
    lab_jumps.push_back({ket_bra(4, sink, e), 0.5 * gamma});
    lab_jumps.push_back({ket_bra(4, sink, e), 0.5 * gamma});
  }
  const double expected = channels == DecayChannels::collective ? kappa1 * kappa1 * gamma : 0.5 * kappa1 * kappa1 * gamma;
  const double t_final = 3.0 / expected;

  Matrix rho0 = Matrix::Zero(4, 4);
  rho0(gp, gp) = rho0(gm, gm) = rho0(gp, gm) = rho0(gm, gp) = 0.5;
  const HilbertSpace space{4, 1, 1};
  EvolveOptions opt;
  const int n = 300;
  opt.sample_times = uniform_samples(t_final, n);
  opt.control = {1e-10, 1e-12};
  opt.basis = LevelBasis::lambda;

  std::vector<Dissipator> diss;
  TimeDependentOperator h(4);
  if (frame == Frame::lab) {
    h = v;
    for (const auto& [l, r] : lab_jumps) {
      TimeDependentOperator j(4);
      j.add(l);
      diss.push_back({j, r, "decay"});
    }
  } else {
    const TimeDependentOperator s = antiderivative(v);
    h.add(Matrix::Zero(4, 4));
    for (const auto& [l, r] : lab_jumps) {
      // keep only the ground -> sink parts
      const TimeDependentOperator jump = (-kI * l) * s;
      TimeDependentOperator proj(4);
      for (const auto& t : jump.terms()) {
        Matrix op = Matrix::Zero(4, 4);
        op.col(gp) = t.op.col(gp);
        op.col(gm) = t.op.col(gm);
        op.row(e).setZero();
        proj.add(op, t.omega);
      }
      proj.prune(1e-14);
      diss.push_back({proj, r, "decay_eff"});
    }
  }
  const Trajectory tr = evolve(rho0, h, diss, {}, t_final, space, opt);
  // least-squares slope of log(ground population) after the initial dressing transient
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    if (tr.t[i] < 0.1 * t_final) continue;
    const double pg = tr.populations[i][gp] + tr.populations[i][gm];
    const double y = std::log(pg);
    sx += tr.t[i];
    sy += y;
    sxx += tr.t[i] * tr.t[i];
    sxy += tr.t[i] * y;
    ++cnt;
  }
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  DecayFit fit;
  fit.gamma_fit = -slope;
  fit.gamma_ratio = fit.gamma_fit / gamma;
  fit.trace_drift = tr.trace_drift;
  return fit;
}

}  // namespace nvp
