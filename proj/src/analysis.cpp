#include "nvphonon/analysis.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

#include "nvphonon/errors.hpp"
#include "nvphonon/integrator.hpp"
#include "nvphonon/phonon_pbc.hpp"
#include "nvphonon/units.hpp"

namespace nvp {

cplx exact_alpha(double omega_tilde, double delta_eps, double t) {
  return -0.5 * kI * (omega_tilde / delta_eps) * (std::exp(kI * (delta_eps * t)) - 1.0);
}

cplx exact_beta(double omega_tilde, double delta_eps, double t) {
  return kI * (omega_tilde * omega_tilde / (4 * delta_eps)) *
         (t + (kI / delta_eps) * (std::exp(kI * (delta_eps * t)) - 1.0));
}

namespace {

Matrix displacement(cplx z, int fock_dim) {
  const int big = fock_dim + 40;
  const Matrix a = annihilation(big);
  const Matrix gen = z * a.adjoint() - std::conj(z) * a;
  return gen.exp().topLeftCorner(fock_dim, fock_dim);
}

double poisson_tail(double mean, int n_cut) {
  // P(n >= n_cut) for a Poisson distribution
  double p = std::exp(-mean), below = 0;
  for (int n = 0; n < n_cut; ++n) {
    below += p;
    p *= mean / (n + 1);
  }
  return std::max(0.0, 1.0 - below);
}

}  // namespace

ExactEvolution exact_unitary(double omega_tilde, double delta_eps, double t, int fock_dim) {
  if (fock_dim < 1) throw Error(ErrorCode::NonPositiveDimension, "fock_dim must be positive");
  if (delta_eps == 0) throw Error(ErrorCode::InvalidParameter, "delta_eps must be nonzero");
  ExactEvolution ev;
  ev.alpha = exact_alpha(omega_tilde, delta_eps, t);
  ev.beta = exact_beta(omega_tilde, delta_eps, t);
  if (poisson_tail(std::norm(4.0 * ev.alpha), fock_dim) > 1e-10)
    throw Error(ErrorCode::TruncationTooSmall, "displacement too large for the Fock truncation");
  Matrix plus(2, 1), minus(2, 1);
  plus << 1, 1;
  minus << 1, -1;
  plus /= std::sqrt(2.0);
  minus /= std::sqrt(2.0);
  const std::array<Matrix, 2> x{plus, minus};
  const std::array<int, 2> sign{1, -1};
  ev.u = Matrix::Zero(4 * fock_dim, 4 * fock_dim);
  for (int s1 = 0; s1 < 2; ++s1)
    for (int s2 = 0; s2 < 2; ++s2) {
      const double o = sign[s1] + sign[s2] + 2;
      const Matrix v = kron(x[s1], x[s2]);
      const Matrix p = v * v.adjoint();
      const Matrix mode = displacement(ev.alpha * o, fock_dim) * std::exp(kI * (ev.beta.imag() * o * o));
      ev.u += kron(p, mode);
    }
  return ev;
}

Matrix propagate_unitary(const TimeDependentOperator& h, double t_final, const StepControl& control) {
  const SparseTerms hs(h);
  Matrix u = Matrix::Identity(h.dim(), h.dim());
  Dopri5<Matrix> stepper(control);
  stepper.integrate(u, 0.0, t_final, [&](double t, const Matrix& y) -> Matrix { return -kI * hs.apply(t, y); });
  return u;
}

double operator_fidelity(const Matrix& u, const Matrix& v, const std::vector<int>& keep) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) throw Error(ErrorCode::InvalidParameter, "dimension mismatch");
  const Matrix w = u.adjoint() * v;
  if (keep.empty()) return std::norm(w.trace()) / std::pow(double(u.rows()), 2);
  cplx tr = 0;
  for (int i : keep) tr += w(i, i);
  return std::norm(tr) / std::pow(double(keep.size()), 2);
}

std::vector<int> low_fock_states(int fock_dim, int n_max) {
  std::vector<int> out;
  for (int q = 0; q < 4; ++q)
    for (int n = 0; n <= std::min(n_max, fock_dim - 1); ++n) out.push_back(q * fock_dim + n);
  return out;
}

ExactCheckReport exact_check(const DriveConfig& drive, int m, int fock_dim) {
  if (m < 1) throw Error(ErrorCode::InvalidParameter, "m >= 1 required");
  if (drive.path != Path::double_path) throw Error(ErrorCode::InvalidParameter, "closed form is for the double path");
  DriveConfig d = drive;
  if (!d.compensate_eta2) {
    // keep the requested kappa2 once the eta^2 shifts are dropped
    const double k2 = effective_I_model(d, 2).kappa2;
    d.compensate_eta2 = true;
    d.eps2 = eps2_for_kappa2(d, k2);
  }
  EffectiveModel m1 = effective_I_model(d, 2);
  for (int k = 0; k < 2; ++k) {
    m1.delta[k] = 0;
    m1.delta_n[k] = 0;
  }
  if (std::abs(m1.omega_tilde[0] - m1.omega_tilde[1]) > 1e-12 * std::abs(m1.omega_tilde[0]))
    throw Error(ErrorCode::InvalidParameter, "closed form needs equal couplings");
  ExactCheckReport r;
  r.omega_tilde = m1.omega_tilde[0];
  r.delta_eps = m1.delta_eps;
  r.kappa2 = m1.kappa2;
  r.m = m;
  r.t_gate = kTwoPi * m / std::abs(m1.delta_eps);
  const ExactEvolution ev = exact_unitary(r.omega_tilde, r.delta_eps, r.t_gate, fock_dim);
  r.alpha = ev.alpha;
  r.beta = ev.beta;
  const Matrix u_int = propagate_unitary(effective_I_operator(m1, fock_dim), r.t_gate);
  r.fidelity_integrated = operator_fidelity(ev.u, u_int, low_fock_states(fock_dim, fock_dim / 2));

  const EffectiveModel m2 = effective_II_model(m1);
  const Matrix h2 = effective_II_operator(m2, fock_dim);
  const Matrix u2 = (-kI * r.t_gate * h2).exp();
  const cplx phase = (u2.adjoint() * ev.u).trace();
  r.distance_effective_II = (ev.u - (phase / std::abs(phase)) * u2).norm() / std::sqrt(double(u2.rows()));
  return r;
}

// ---- figure of merit ---------------------------------------------------------

SweepPoint figure_of_merit_point(const MaterialModel& material, double diameter, double kappa1, double kappa2,
                                 const SweepOptions& options) {
  const PbcMode mode = lowest_mode(make_sphere(diameter, material), material);
  DriveConfig drive = standard_drive(mode.eta, mode.nu, kappa1, kappa2, Path::double_path);
  if (options.second_state_splitting > 0) {
    drive.second_state_splitting = options.second_state_splitting;
    drive.eps2 = eps2_for_kappa2(drive, kappa2);
  }
  const EffectiveModel m2 = effective_II_model(effective_I_model(drive, 2));
  const double gamma = options.nanodiamond_rate ? material.gamma_nd : material.gamma_e;
  SweepPoint p;
  p.diameter = diameter;
  p.kappa1 = kappa1;
  p.kappa2 = kappa2;
  p.eta = mode.eta;
  p.nu = mode.nu;
  p.omega2 = drive.omega2;
  p.omega_gate = std::abs(m2.omega_gate);
  p.gamma_eff = kappa1 * kappa1 * gamma;
  p.ratio = p.omega_gate / p.gamma_eff;
  return p;
}

std::vector<SweepPoint> gate_figure_of_merit(const MaterialModel& material, const std::vector<double>& kappa1,
                                             const std::vector<double>& kappa2, const std::vector<double>& diameters,
                                             const SweepOptions& options) {
  struct Job {
    double k1, k2, d;
  };
  std::vector<Job> jobs;
  for (double k1 : kappa1)
    for (double k2 : kappa2)
      for (double d : diameters) jobs.push_back({k1, k2, d});
  std::vector<SweepPoint> out(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        out[i] = figure_of_merit_point(material, jobs[i].d, jobs[i].k1, jobs[i].k2, options);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(options.workers, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

double scaling_ratio(double kappa1, double kappa2, double eta, double nu, double gamma) {
  const double omega2 = kappa1 * nu;
  return (kappa1 * kappa2 * eta * omega2) / (kappa1 * kappa1 * gamma);
}

double crossing_diameter(const MaterialModel& material, double kappa1, double kappa2, double d_lo, double d_hi,
                         const SweepOptions& options) {
  auto f = [&](double d) { return std::log(figure_of_merit_point(material, d, kappa1, kappa2, options).ratio); };
  double f_lo = f(d_lo), f_hi = f(d_hi);
  if (f_lo * f_hi > 0) throw Error(ErrorCode::NoRootInBracket, "ratio does not cross 1 in the diameter range");
  for (int it = 0; it < 200 && d_hi - d_lo > 1e-15 * d_hi; ++it) {
    const double mid = 0.5 * (d_lo + d_hi);
    const double fm = f(mid);
    if ((fm > 0) == (f_lo > 0)) {
      d_lo = mid;
      f_lo = fm;
    } else {
      d_hi = mid;
    }
  }
  return 0.5 * (d_lo + d_hi);
}

DirectComparison direct_gate_comparison(double kappa1, double kappa2, double eta, double omega, double gamma) {
  if (!(kappa1 > 0) || !(kappa2 > 0) || !(gamma > 0)) throw Error(ErrorCode::InvalidParameter, "positive kappas and gamma required");
  DirectComparison c;
  c.raman_ratio = (kappa2 / kappa1) * eta * omega / gamma;
  c.direct_ratio = kappa1 * eta * omega / gamma;
  c.advantage = c.raman_ratio / c.direct_ratio;
  return c;
}

// ---- closure times ---------------------------------------------------------

Closure closure_times(double delta_eps, double theta, ClosureScheme scheme, bool echo, double kappa2_max) {
  if (!(theta > 0 && theta <= kPi)) throw Error(ErrorCode::InvalidParameter, "theta must lie in (0, pi]");
  if (delta_eps == 0) throw Error(ErrorCode::InvalidParameter, "delta_eps must be nonzero");
  const int step = echo ? 2 : 1;
  for (int m = step; m <= 100000; m += step) {
    const double k2 = scheme == ClosureScheme::raman ? std::sqrt(theta / (kTwoPi * m))
                                                     : std::sqrt(32 * theta / (9 * kPi * m));
    if (k2 <= kappa2_max) return {m, kTwoPi * m / std::abs(delta_eps), k2};
  }
  throw Error(ErrorCode::NoAdmissibleM, "no closure index gives kappa2 within bounds");
}

// ---- lab vs effective --------------------------------------------------------

HierarchyReport compare_lab_effective(const DriveConfig& drive, int fock_dim, double periods, int samples,
                                      const StepControl& control) {
  const HilbertSpace lab{3, 2, fock_dim};
  const HilbertSpace q{2, 2, fock_dim};
  const TimeDependentOperator h_lab = rotating_frame_hamiltonian(drive, lab);
  const EffectiveFrameMap map(h_lab, lab);
  const EffectiveModel m1 = effective_I_model(drive, 2);
  const TimeDependentOperator h_eff = effective_I_operator(m1, fock_dim);

  HierarchyReport r;
  r.t_final = periods * kTwoPi / std::abs(m1.delta_eps);
  EvolveOptions opt;
  for (int k = 0; k <= samples; ++k) opt.sample_times.push_back(r.t_final * k / samples);
  opt.sample_times.back() = r.t_final;
  opt.control = control;
  opt.basis = LevelBasis::qubit;

  const Vector psi_eff = product_state(q, {0, 0});
  const Trajectory te = evolve_pure(psi_eff, h_eff, {}, r.t_final, q, opt);
  EvolveOptions lab_opt = opt;
  lab_opt.state_map = [&map](double t, const Vector& psi) { return map(t, psi); };
  const Trajectory tl = evolve_pure(map.dress(0.0, psi_eff), h_lab, {}, r.t_final, lab, lab_opt);

  r.t = te.t;
  for (std::size_t i = 0; i < te.t.size(); ++i) {
    std::array<double, 4> a{}, b{};
    for (int s = 0; s < 4; ++s) {
      a[s] = tl.populations[i][static_cast<std::size_t>(s)];
      b[s] = te.populations[i][static_cast<std::size_t>(s)];
      r.max_population_error = std::max(r.max_population_error, std::abs(a[s] - b[s]));
    }
    r.lab.push_back(a);
    r.effective.push_back(b);
  }
  r.trace_drift = std::max(tl.trace_drift, te.trace_drift);
  r.steps = tl.steps + te.steps;
  return r;
}

}  // namespace nvp
