#include "cli.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "nvphonon/analysis.hpp"
#include "nvphonon/dynamics.hpp"
#include "nvphonon/errors.hpp"
#include "nvphonon/phonon_pbc.hpp"
#include "nvphonon/phonon_sphere.hpp"
#include "nvphonon/units.hpp"

#ifndef NVPHONON_PRESET_DIR
#define NVPHONON_PRESET_DIR "presets"
#endif

namespace nvp::cli {

using json = nlohmann::ordered_json;

namespace {

double thz(double omega) { return omega / kTwoPi / 1e12; }
double ghz(double omega) { return omega / kTwoPi / 1e9; }
double mhz(double omega) { return omega / kTwoPi / 1e6; }
double khz(double omega) { return omega / kTwoPi / 1e3; }

std::string hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Context {
  std::string command;
  Config config;
  std::ostream& out;

  std::string provenance() const {
    return std::string("nvphonon ") + kVersion + " command=" + command + " config_hash=" + hex(config.hash());
  }
};

// Output sink: the --out file when given, the caller's stream otherwise.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw Error(ErrorCode::ConfigError, "cannot write " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

void write_json(const json& j, const std::string& path, std::ostream& fallback) {
  Sink s(path, fallback);
  s.get() << j.dump(2) << "\n";
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json model_json(const EffectiveModel& m) {
  json j;
  j["tier"] = m.tier == Tier::I ? "I" : "II";
  j["path"] = m.path == Path::double_path ? "double" : "single";
  j["omega_tilde"] = {m.omega_tilde[0], m.omega_tilde[1]};
  j["delta"] = {m.delta[0], m.delta[1]};
  j["delta_n"] = {m.delta_n[0], m.delta_n[1]};
  j["delta_eps"] = m.delta_eps;
  j["mode_shift"] = m.mode_shift;
  j["omega_gate"] = m.omega_gate;
  j["kappa2"] = number_or_null(m.kappa2);
  if (m.dipolar) {
    j["dipolar"] = {{"j_opt", m.dipolar->j_opt},
                    {"j_mag", m.dipolar->j_mag},
                    {"j_opt_tilde", m.dipolar->j_opt_tilde},
                    {"omega_a", {m.dipolar->omega_a[0], m.dipolar->omega_a[1]}}};
  }
  return j;
}

json drive_json(const DriveSetup& s) {
  const DriveConfig& d = s.drive;
  return {{"diameter_nm", s.diameter_nm},
          {"eta", d.eta[0]},
          {"nu", d.nu},
          {"omega1", d.omega1},
          {"omega2", d.omega2},
          {"eps1", d.eps1},
          {"eps2", d.eps2},
          {"omega_mw", d.omega_mw},
          {"path", d.path == Path::double_path ? "double" : "single"},
          {"compensate_eta2", d.compensate_eta2},
          {"second_state_splitting", d.second_state_splitting},
          {"kappa1", d.kappa1()},
          {"warnings", drive_warnings(d)}};
}

json terms_json(const TimeDependentOperator& h) {
  json arr = json::array();
  for (const auto& t : h.terms()) arr.push_back({{"omega", t.omega}, {"norm", t.op.norm()}});
  return arr;
}

void write_matrices(const std::string& path, const Context& ctx,
                    const std::vector<std::pair<std::string, TimeDependentOperator>>& ops) {
  Sink s(path, ctx.out);
  CsvWriter w(s.get(), ctx.provenance(), {"operator", "omega", "row", "col", "re", "im"});
  for (const auto& [name, h] : ops)
    for (const auto& t : h.terms())
      for (Eigen::Index j = 0; j < t.op.cols(); ++j)
        for (Eigen::Index i = 0; i < t.op.rows(); ++i) {
          const cplx v = t.op(i, j);
          if (v != cplx(0)) w.row({name}, {t.omega, double(i), double(j), v.real(), v.imag()});
        }
}

Path parse_path(const std::string& s) {
  if (s == "double") return Path::double_path;
  if (s == "single") return Path::single_path;
  throw Error(ErrorCode::ConfigError, "drive.path must be double or single, got '" + s + "'");
}

// ---- modes -------------------------------------------------------------------------

Eigen::Vector3d probe_point(const Config& c, double radius) {
  const auto p = c.vector3("modes.probe", {0.5, 0.0, 0.0});
  const double r = p[0] * radius;
  return {r * std::sin(p[1]) * std::cos(p[2]), r * std::sin(p[1]) * std::sin(p[2]), r * std::cos(p[1])};
}

std::vector<double> diameters_nm(const Config& c, const std::string& list_key, const std::string& single_key,
                                 double fallback_nm) {
  return c.has(list_key) ? c.list(list_key) : std::vector<double>{c.number(single_key, fallback_nm)};
}

int run_modes(Context& ctx, const std::string& out_path) {
  const Config& c = ctx.config;
  const MaterialModel mat = resolve_material(c);
  const std::string kind = c.text("modes.kind", "pbc");
  Sink sink(out_path, ctx.out);
  if (kind == "pbc") {
    CsvWriter w(sink.get(), ctx.provenance(), {"d_nm", "nu_THz", "eta"});
    for (double d : diameters_nm(c, "modes.d_nm", "modes.diameter_nm", 10)) {
      const PbcMode m = lowest_mode(make_sphere(d * kNano, mat), mat);
      w.row({d, thz(m.nu), m.eta});
    }
  } else if (kind == "sphere") {
    const double d = c.number("modes.diameter_nm", 10) * kNano;
    const int lmax = c.integer("modes.lmax", 2), nmax = c.integer("modes.nmax", 2);
    if (lmax < 0 || nmax < 1) throw Error(ErrorCode::ConfigError, "modes.lmax >= 0 and modes.nmax >= 1 required");
    const Geometry g = make_sphere(d, mat);
    const Eigen::Vector3d probe = probe_point(c, g.radius);
    CsvWriter w(sink.get(), ctx.provenance(), {"family", "l", "m", "n", "chi", "nu_THz", "eta_probe"});
    for (int l = 1; l <= lmax; ++l)
      for (int n = 0; n < nmax; ++n) {
        const SphereMode m = solve_mode(ModeFamily::torsional, l, 0, n, g, mat);
        w.row({"torsional"}, {double(l), 0.0, double(n), m.chi, thz(m.nu), coupling_eta(m, probe, mat)});
      }
    for (int l = 0; l <= lmax; ++l)
      for (int n = 0; n < nmax; ++n) {
        const SphereMode m = solve_mode(ModeFamily::spheroidal, l, 0, n, g, mat);
        w.row({"spheroidal"}, {double(l), 0.0, double(n), m.chi, thz(m.nu), coupling_eta(m, probe, mat)});
      }
  } else if (kind == "breathing") {
    CsvWriter w(sink.get(), ctx.provenance(), {"d_nm", "nu_sphere_THz", "eta_sphere_center", "nu_pbc_THz", "eta_pbc"});
    for (double d : diameters_nm(c, "modes.d_nm", "modes.diameter_nm", 10)) {
      const Geometry g = make_sphere(d * kNano, mat);
      const SphereMode s = solve_mode(ModeFamily::spheroidal, 0, 0, 0, g, mat);
      const PbcMode p = lowest_mode(g, mat);
      w.row({d, thz(s.nu), std::abs(coupling_eta(s, Eigen::Vector3d::Zero(), mat)), thz(p.nu), p.eta});
    }
  } else {
    throw Error(ErrorCode::ConfigError, "modes.kind must be pbc, sphere or breathing");
  }
  return 0;
}

int run_eta_map(Context& ctx, const std::string& out_path) {
  const Config& c = ctx.config;
  const MaterialModel mat = resolve_material(c);
  const std::string fam = c.text("eta_map.family", "spheroidal");
  if (fam != "spheroidal" && fam != "torsional") throw Error(ErrorCode::ConfigError, "eta_map.family must be spheroidal or torsional");
  const Geometry g = make_sphere(c.number("eta_map.diameter_nm", 10) * kNano, mat);
  const SphereMode m = solve_mode(fam == "spheroidal" ? ModeFamily::spheroidal : ModeFamily::torsional,
                                  c.integer("eta_map.l", 0), c.integer("eta_map.m", 0), c.integer("eta_map.n", 0), g, mat);
  const auto samples = eta_map(m, mat, c.integer("eta_map.nr", 40), c.integer("eta_map.ntheta", 40),
                               c.number("eta_map.phi", 0.0));
  Sink sink(out_path, ctx.out);
  CsvWriter w(sink.get(), ctx.provenance(), {"r_nm", "theta", "eta"});
  for (const auto& s : samples) w.row({s.r / kNano, s.theta, s.eta});
  return 0;
}

// ---- hamiltonian dump --------------------------------------------------------------

std::pair<DipolarCouplings, EffectiveModel> dipolar_model(const Config& c, const MaterialModel& mat, const DriveSetup& s) {
  const auto r = c.vector3("dipolar.r_nm", {10, 0, 0});
  const auto p1 = c.vector3("dipolar.p1", {0, 0, 1});
  const auto p2 = c.vector3("dipolar.p2", {0, 0, 1});
  const DipolarCouplings dc = dipolar_couplings(Eigen::Vector3d(r[0], r[1], r[2]) * kNano,
                                                Eigen::Vector3d(p1[0], p1[1], p1[2]),
                                                Eigen::Vector3d(p2[0], p2[1], p2[2]), mat,
                                                c.integer("dipolar.mag_exponent", 3));
  return {dc, effective_I_dipolar_model(s.drive, dc.j_opt, dc.j_mag, c.number("dipolar.n_mean", 0.0))};
}

json couplings_json(const DipolarCouplings& dc) {
  return {{"j_opt", dc.j_opt},           {"j_opt_MHz", mhz(dc.j_opt)},   {"j_mag", dc.j_mag},
          {"j_mag_kHz", khz(dc.j_mag)},  {"angular_factor", dc.angular_factor},
          {"far_field_warning", dc.far_field_warning}};
}

int run_hamiltonian(Context& ctx, const std::string& out_path) {
  const Config& c = ctx.config;
  const MaterialModel mat = resolve_material(c);
  const DriveSetup s = resolve_drive(c, mat);
  const std::string tier = c.text("hamiltonian.tier", "eff1");
  const int fock = c.integer("hamiltonian.fock_dim", 8);
  json j;
  j["provenance"] = ctx.provenance();
  j["tier"] = tier;
  j["drive"] = drive_json(s);
  std::vector<std::pair<std::string, TimeDependentOperator>> ops;
  if (tier == "lab") {
    const HilbertSpace space{3, 2, fock};
    ops.emplace_back("rotating_frame", rotating_frame_hamiltonian(s.drive, space));
  } else if (tier == "eff1") {
    const EffectiveHamiltonian e = effective_I(s.drive, 2, fock);
    j["model"] = model_json(e.model);
    ops.emplace_back("effective_I", e.h);
  } else if (tier == "eff2") {
    const EffectiveModel m2 = effective_II_model(effective_I_model(s.drive, 2));
    j["model"] = model_json(m2);
    TimeDependentOperator h;
    h.add(effective_II_operator(m2, fock));
    ops.emplace_back("effective_II", h);
  } else if (tier == "mw") {
    const MwHamiltonian mw = mw_hamiltonian(s.drive, fock, c.flag("gate.include_carrier", false));
    j["model"] = {{"delta_identity", mw.model.delta_identity}, {"delta_sp", mw.model.delta_sp},
                  {"omega_tilde", mw.model.omega_tilde},       {"delta_eps", mw.model.delta_eps},
                  {"omega_gate", mw.model.omega_gate},         {"kappa2", mw.model.kappa2}};
    ops.emplace_back("full", mw.full);
    ops.emplace_back("rwa", mw.rwa);
  } else if (tier == "dipolar") {
    const auto [dc, m] = dipolar_model(c, mat, s);
    j["couplings"] = couplings_json(dc);
    j["model"] = model_json(m);
    ops.emplace_back("effective_I_dipolar", effective_I_dipolar_operator(m, fock));
  } else {
    throw Error(ErrorCode::ConfigError, "hamiltonian.tier must be lab, eff1, eff2, mw or dipolar");
  }
  for (const auto& [name, h] : ops) j["terms"][name] = terms_json(h);
  write_json(j, out_path, ctx.out);
  if (c.has("hamiltonian.matrices")) write_matrices(c.text("hamiltonian.matrices"), ctx, ops);
  return 0;
}

// ---- gate simulation ---------------------------------------------------------------

StepControl control_from(const Config& c, StepControl base) {
  base.rtol = c.number("gate.rtol", base.rtol);
  base.atol = c.number("gate.atol", base.atol);
  return base;
}

std::optional<DissipationConfig> dissipation_from(const Config& c) {
  if (!c.flag("dissipation.enabled", false)) return std::nullopt;
  DissipationConfig d;
  d.q_factor = c.number("dissipation.q_factor", std::numeric_limits<double>::infinity());
  d.n_th = c.number("dissipation.n_th", 0.0);
  const std::string g = c.text("dissipation.gamma", "bulk");
  if (g != "bulk" && g != "nanodiamond") throw Error(ErrorCode::ConfigError, "dissipation.gamma must be bulk or nanodiamond");
  d.nanodiamond_rate = g == "nanodiamond";
  const std::string ch = c.text("dissipation.channels", "collective");
  if (ch != "collective" && ch != "independent")
    throw Error(ErrorCode::ConfigError, "dissipation.channels must be collective or independent");
  d.channels = ch == "collective" ? DecayChannels::collective : DecayChannels::independent;
  return d;
}

json gate_report_json(const GateReport& r, bool echo) {
  return {{"echo", echo},
          {"t_gate_us", r.t_gate * 1e6},
          {"omega_gate", r.omega_gate},
          {"delta_eps", r.delta_eps},
          {"kappa2", r.kappa2},
          {"fidelity", r.fidelity},
          {"refocus_residual", r.refocus_residual},
          {"n_peak", r.n_peak},
          {"cross_population", r.cross_population},
          {"trace_drift", r.trace_drift},
          {"min_eigenvalue", r.min_eigenvalue},
          {"steps", r.steps},
          {"warnings", r.warnings}};
}

int run_raman_gate(Context& ctx, const DriveSetup& s, const std::string& out_path, const std::string& report_path) {
  const Config& c = ctx.config;
  const MaterialModel mat = resolve_material(c);
  GateConfig g;
  g.drive = s.drive;
  const std::string tier = c.text("gate.tier", "eff1");
  if (tier == "lab") g.tier = GateTier::lab;
  else if (tier == "eff1") g.tier = GateTier::effective_I;
  else if (tier == "eff2") g.tier = GateTier::effective_II;
  else throw Error(ErrorCode::ConfigError, "gate.tier must be lab, eff1 or eff2");
  const std::string pulse = c.text("gate.echo_pulse", "sy");
  if (pulse == "sy") g.echo_tag = PulseTag::echo_sy;
  else if (pulse == "sz") g.echo_tag = PulseTag::echo_sz;
  else if (pulse == "sx") g.echo_tag = PulseTag::echo_sx_pm;
  else throw Error(ErrorCode::ConfigError, "gate.echo_pulse must be sy, sz or sx");
  g.fock_dim = c.integer("gate.fock_dim", 16);
  g.samples = c.integer("gate.samples", 200);
  g.n_th_initial = c.number("gate.n_th_initial", 0.0);
  if (c.has("gate.initial")) {
    const auto lv = c.list("gate.initial");
    if (lv.size() != 2 || (lv[0] != 0 && lv[0] != 1) || (lv[1] != 0 && lv[1] != 1))
      throw Error(ErrorCode::ConfigError, "gate.initial expects two qubit levels (0 or 1)");
    g.initial_levels = {int(lv[0]), int(lv[1])};
  }
  const std::string target = c.text("gate.target", "M1");
  if (target != "M1" && target != "M2") throw Error(ErrorCode::ConfigError, "gate.target must be M1 or M2");
  g.target = target == "M1" ? Manifold::M1 : Manifold::M2;
  g.dissipation = dissipation_from(c);
  g.material = &mat;
  g.control = control_from(c, g.control);
  if (c.has("gate.t_final_us")) {
    g.t_final = c.number("gate.t_final_us") * 1e-6;
  } else if (c.has("gate.closure_m")) {
    const int m = c.integer("gate.closure_m", 1);
    if (m < 1) throw Error(ErrorCode::ConfigError, "gate.closure_m must be >= 1");
    g.t_final = kTwoPi * m / std::abs(effective_I_model(g.drive, 2).delta_eps);
  }

  std::vector<bool> variants;
  if (c.flag("gate.compare_echo", false)) variants = {false, true};
  else variants = {c.flag("gate.echo", true)};

  const bool lab = g.tier == GateTier::lab;
  const HilbertSpace space{lab ? 3 : 2, 2, g.fock_dim};
  const LevelBasis basis = lab ? LevelBasis::lambda : LevelBasis::qubit;
  Sink sink(out_path, ctx.out);
  CsvWriter w(sink.get(), ctx.provenance(),
              {"echo", "t_us", "pop_pp", "pop_mm", "pop_pm", "pop_mp", "n_mean", "fidelity"});
  json reports = json::array();
  for (bool echo : variants) {
    g.echo = echo;
    const GateResult r = simulate_gate(g);
    const Trajectory& tr = r.trajectory;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
      const Matrix q = qubit_block(tr.snapshots[i], space, basis);
      w.row({echo ? 1.0 : 0.0, tr.t[i] * 1e6, q(0, 0).real(), q(3, 3).real(), q(1, 1).real(), q(2, 2).real(),
             tr.n_mean[i], tr.fidelity[i]});
    }
    reports.push_back(gate_report_json(r.report, echo));
  }
  if (!report_path.empty()) {
    json j;
    j["provenance"] = ctx.provenance();
    j["drive"] = drive_json(s);
    j["runs"] = reports;
    write_json(j, report_path, ctx.out);
  }
  return 0;
}

int run_mw_gate(Context& ctx, const DriveSetup& s, const std::string& out_path, const std::string& report_path) {
  const Config& c = ctx.config;
  MwGateConfig g;
  g.drive = s.drive;
  g.echo = c.flag("gate.echo", true);
  g.closure_index = c.integer("gate.closure_m", 2);
  g.fock_dim = c.integer("gate.fock_dim", 12);
  g.samples = c.integer("gate.samples", 200);
  g.include_carrier = c.flag("gate.include_carrier", false);
  g.control = control_from(c, g.control);
  const MwGateResult r = simulate_mw_gate(g);
  const Trajectory& tr = r.trajectory;
  Sink sink(out_path, ctx.out);
  CsvWriter w(sink.get(), ctx.provenance(), {"t_us", "pop_pp", "pop_mm", "pop_pm", "pop_mp", "pop_g0", "n_mean"});
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    const auto& p = tr.populations[i];
    double g0 = 0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (a == triplet::g0 || b == triplet::g0) g0 += p[static_cast<std::size_t>(a * 3 + b)];
    w.row({tr.t[i] * 1e6, p[0], p[8], p[2], p[6], g0, tr.n_mean[i]});
  }
  if (!report_path.empty()) {
    const MwGateReport& m = r.report;
    json j;
    j["provenance"] = ctx.provenance();
    j["drive"] = drive_json(s);
    j["report"] = {{"t_gate_us", m.t_gate * 1e6},         {"omega_gate", m.omega_gate},
                   {"kappa2", m.kappa2},                  {"g0_leakage", m.g0_leakage},
                   {"rotation_angle", m.rotation_angle},  {"expected_angle", m.expected_angle},
                   {"refocus_residual", m.refocus_residual}, {"trace_drift", m.trace_drift},
                   {"steps", m.steps}};
    write_json(j, report_path, ctx.out);
  }
  return 0;
}

int run_gate(Context& ctx, const std::string& out_path, const std::string& report_path) {
  const MaterialModel mat = resolve_material(ctx.config);
  const DriveSetup s = resolve_drive(ctx.config, mat);
  const std::string scheme = ctx.config.text("gate.scheme", "raman");
  if (scheme == "raman") return run_raman_gate(ctx, s, out_path, report_path);
  if (scheme == "mw") return run_mw_gate(ctx, s, out_path, report_path);
  throw Error(ErrorCode::ConfigError, "gate.scheme must be raman or mw");
}

// ---- sweep ---------------------------------------------------------------------

int run_sweep(Context& ctx, const std::string& out_path, const std::string& report_path) {
  const Config& c = ctx.config;
  const MaterialModel mat = resolve_material(c);
  const std::vector<double> k1 = c.has("sweep.k1") ? c.list("sweep.k1") : std::vector<double>{0.01, 0.05, 0.1};
  const std::vector<double> k2 = c.has("sweep.k2") ? c.list("sweep.k2") : std::vector<double>{0.05, 0.1, 0.35};
  const std::vector<double> d_nm = c.has("sweep.d_nm") ? c.list("sweep.d_nm") : parse_list("5:50:1");
  std::vector<double> d = d_nm;
  for (double& x : d) x *= kNano;
  SweepOptions opt;
  const std::string g = c.text("sweep.gamma", "bulk");
  if (g != "bulk" && g != "nanodiamond") throw Error(ErrorCode::ConfigError, "sweep.gamma must be bulk or nanodiamond");
  opt.nanodiamond_rate = g == "nanodiamond";
  opt.second_state_splitting = c.number("sweep.second_state_GHz", 0.0) * kTwoPi * 1e9;
  opt.workers = worker_count();
  const auto points = gate_figure_of_merit(mat, k1, k2, d, opt);
  {
    Sink sink(out_path, ctx.out);
    CsvWriter w(sink.get(), ctx.provenance(),
                {"d_nm", "kappa1", "kappa2", "eta", "nu_THz", "omega2_GHz", "omega_gate_kHz", "gamma_eff_kHz", "ratio"});
    for (std::size_t i = 0; i < points.size(); ++i) {
      const SweepPoint& p = points[i];
      w.row({d_nm[i % d_nm.size()], p.kappa1, p.kappa2, p.eta, thz(p.nu), ghz(p.omega2), khz(p.omega_gate),
             khz(p.gamma_eff), p.ratio});
    }
  }
  if (!report_path.empty()) {
    const auto range = c.has("sweep.crossing_range_nm") ? c.list("sweep.crossing_range_nm") : std::vector<double>{2, 200};
    if (range.size() != 2) throw Error(ErrorCode::ConfigError, "sweep.crossing_range_nm expects lo,hi");
    json j;
    j["provenance"] = ctx.provenance();
    j["crossings"] = json::array();
    for (double a : k1)
      for (double b : k2) {
        json e{{"kappa1", a}, {"kappa2", b}};
        try {
          e["crossing_nm"] = crossing_diameter(mat, a, b, range[0] * kNano, range[1] * kNano, opt) / kNano;
        } catch (const Error& err) {
          if (err.code() != ErrorCode::NoRootInBracket) throw;
          e["crossing_nm"] = nullptr;
        }
        j["crossings"].push_back(e);
      }
    write_json(j, report_path, ctx.out);
  }
  return 0;
}

// ---- exact check / dipolar ------------------------------------------------------

int run_exact(Context& ctx, const std::string& out_path) {
  const Config& c = ctx.config;
  const MaterialModel mat = resolve_material(c);
  const double d_nm = c.number("exact.diameter_nm", 15), d = d_nm * kNano;
  const PbcMode mode = lowest_mode(make_sphere(d, mat), mat);
  const DriveConfig drive = standard_drive(mode.eta, mode.nu, c.number("exact.k1", 0.05), c.number("exact.k2", 0.05),
                                           Path::double_path, true);
  const ExactCheckReport r = exact_check(drive, c.integer("exact.m", 2), c.integer("exact.fock_dim", 11));
  json j;
  j["provenance"] = ctx.provenance();
  j["diameter_nm"] = d_nm;
  j["omega_tilde"] = r.omega_tilde;
  j["delta_eps"] = r.delta_eps;
  j["kappa2"] = r.kappa2;
  j["m"] = r.m;
  j["t_gate_us"] = r.t_gate * 1e6;
  j["alpha"] = {r.alpha.real(), r.alpha.imag()};
  j["beta"] = {r.beta.real(), r.beta.imag()};
  j["infidelity_integrated"] = 1 - r.fidelity_integrated;
  j["distance_effective_II"] = r.distance_effective_II;
  write_json(j, out_path, ctx.out);
  return 0;
}

int run_dipolar(Context& ctx, const std::string& out_path) {
  const Config& c = ctx.config;
  const MaterialModel mat = resolve_material(c);
  const DriveSetup s = resolve_drive(c, mat);
  const auto [dc, m] = dipolar_model(c, mat, s);
  const GateRates rates = dipolar_gate_rates(effective_II_model(m));
  json j;
  j["provenance"] = ctx.provenance();
  j["couplings"] = couplings_json(dc);
  j["drive"] = drive_json(s);
  j["model"] = model_json(m);
  j["gate_rates"] = {{"m1", rates.m1}, {"m2", rates.m2}};
  write_json(j, out_path, ctx.out);
  return 0;
}

bool is_config_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidParameter:
    case ErrorCode::NonPositiveDimension:
    case ErrorCode::InvalidQuantumNumber:
    case ErrorCode::UnknownFrame:
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string preset_dir() {
  if (const char* env = std::getenv("NVPHONON_PRESET_DIR")) return env;
  return NVPHONON_PRESET_DIR;
}

int worker_count() {
  if (const char* env = std::getenv("NVPHONON_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) throw Error(ErrorCode::ConfigError, "NVPHONON_WORKERS must be a positive integer");
    return static_cast<int>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

MaterialModel resolve_material(const Config& config) {
  MaterialModel m = with_overrides(diamond_default(), config.material_overrides());
  validate(m);
  return m;
}

DriveSetup resolve_drive(const Config& c, const MaterialModel& mat) {
  DriveSetup s;
  s.diameter_nm = c.number("drive.diameter_nm", 15);
  s.diameter = s.diameter_nm * kNano;
  const PbcMode mode = lowest_mode(make_sphere(s.diameter, mat), mat);
  s.eta = mode.eta;
  s.nu = mode.nu;
  const Path path = parse_path(c.text("drive.path", "double"));
  const bool comp = c.flag("drive.compensate_eta2", false);
  const double splitting = c.number("drive.second_state_GHz", 0.0) * kTwoPi * 1e9;
  const std::string kind = c.text("drive.mode", "standard");
  DriveConfig& d = s.drive;
  auto kappa2 = [&]() {
    if (c.has("drive.kappa2")) return c.number("drive.kappa2");
    if (c.has("drive.theta_deg")) {
      const double theta = c.number("drive.theta_deg") * kPi / 180;
      const int m = c.integer("drive.closure_m", 2);
      if (m < 1) throw Error(ErrorCode::ConfigError, "drive.closure_m must be >= 1");
      return std::sqrt(theta / (kTwoPi * m));
    }
    return 0.05;
  };
  if (kind == "standard") {
    const double k2 = kappa2();
    d = standard_drive(s.eta, s.nu, c.number("drive.kappa1", 0.05), k2, path, comp);
    const double scale = c.number("drive.omega2_scale", 1.0);
    if (!(scale > 0)) throw Error(ErrorCode::ConfigError, "drive.omega2_scale must be positive");
    d.omega1 *= scale;
    d.omega2 *= scale;
    d.eps1 *= scale;
    d.second_state_splitting = splitting;
    if (scale != 1.0 || splitting > 0) d.eps2 = eps2_for_kappa2(d, k2);
  } else if (kind == "explicit") {
    d.nu = s.nu;
    d.eta = {s.eta, s.eta};
    d.path = path;
    d.compensate_eta2 = comp;
    d.second_state_splitting = splitting;
    d.omega1 = c.number("drive.omega1_MHz") * kTwoPi * 1e6;
    d.omega2 = c.has("drive.omega2_MHz") ? c.number("drive.omega2_MHz") * kTwoPi * 1e6 : d.omega1 / s.eta;
    d.eps1 = c.number("drive.eps1_GHz") * kTwoPi * 1e9;
    d.omega_mw = c.number("drive.omega_mw_MHz", 0.0) * kTwoPi * 1e6;
    if (c.has("drive.eps2_GHz")) d.eps2 = c.number("drive.eps2_GHz") * kTwoPi * 1e9;
    else if (c.has("drive.delta_eps_kHz")) d.eps2 = d.eps1 - c.number("drive.delta_eps_kHz") * kTwoPi * 1e3;
    else d.eps2 = eps2_for_kappa2(d, kappa2());
  } else {
    throw Error(ErrorCode::ConfigError, "drive.mode must be standard or explicit");
  }
  return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phonon modes, NV-phonon couplings and phonon-mediated gate simulations", "nvphonon"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  struct Common {
    std::string config_path, preset, out, report;
    std::vector<std::string> sets;
    std::vector<std::pair<std::string, std::string>> flags;
  };
  std::map<std::string, Common> common;

  auto add_common = [&](CLI::App* sub, const std::string& name, bool report) {
    Common& cm = common[name];
    sub->add_option("--config", cm.config_path, "config file (key = value)");
    sub->add_option("--preset", cm.preset, "preset name from the presets directory");
    sub->add_option("--set", cm.sets, "override, key=value (repeatable)");
    sub->add_option("--out", cm.out, "output path (stdout if omitted)");
    if (report) sub->add_option("--report", cm.report, "JSON report path");
  };
  auto bind = [&](CLI::App* sub, const std::string& name, const std::string& flag, const std::string& key,
                  const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&common, name, key](const std::string& v) { common[name].flags.emplace_back(key, v); }, help);
  };

  auto* modes = app.add_subcommand("modes", "mode tables: pbc, sphere or breathing");
  add_common(modes, "modes", false);
  modes->add_option_function<std::string>(
      "kind", [&common](const std::string& v) { common["modes"].flags.emplace_back("modes.kind", v); },
      "pbc | sphere | breathing");
  bind(modes, "modes", "--diameter-nm", "modes.diameter_nm", "diameter in nm");
  bind(modes, "modes", "--d-nm", "modes.d_nm", "diameter list or start:stop:step in nm");
  bind(modes, "modes", "--lmax", "modes.lmax", "largest l");
  bind(modes, "modes", "--nmax", "modes.nmax", "overtones per l");
  bind(modes, "modes", "--probe", "modes.probe", "r/R,theta,phi of the coupling probe");

  auto* emap = app.add_subcommand("eta-map", "coupling map of one sphere mode");
  add_common(emap, "eta-map", false);
  bind(emap, "eta-map", "--diameter-nm", "eta_map.diameter_nm", "diameter in nm");
  bind(emap, "eta-map", "--family", "eta_map.family", "spheroidal | torsional");
  bind(emap, "eta-map", "--l", "eta_map.l", "angular number");
  bind(emap, "eta-map", "--m", "eta_map.m", "azimuthal number");
  bind(emap, "eta-map", "--n", "eta_map.n", "overtone");
  bind(emap, "eta-map", "--nr", "eta_map.nr", "radial samples");
  bind(emap, "eta-map", "--ntheta", "eta_map.ntheta", "polar samples");

  auto* ham = app.add_subcommand("hamiltonian", "Hamiltonian coefficient tables");
  auto* dump = ham->add_subcommand("dump", "write coefficients (JSON) and optionally matrices (CSV)");
  ham->require_subcommand(1);
  add_common(dump, "hamiltonian", false);
  bind(dump, "hamiltonian", "--tier", "hamiltonian.tier", "lab | eff1 | eff2 | mw | dipolar");
  bind(dump, "hamiltonian", "--matrices", "hamiltonian.matrices", "CSV path for the dense matrices");

  auto* gate = app.add_subcommand("gate-sim", "gate dynamics");
  add_common(gate, "gate-sim", true);
  bind(gate, "gate-sim", "--tier", "gate.tier", "lab | eff1 | eff2");

  auto* sweep = app.add_subcommand("sweep", "gate rate over decay rate vs size");
  add_common(sweep, "sweep", true);
  bind(sweep, "sweep", "--k1", "sweep.k1", "kappa1 list");
  bind(sweep, "sweep", "--k2", "sweep.k2", "kappa2 list");
  bind(sweep, "sweep", "--d-nm", "sweep.d_nm", "diameters, list or start:stop:step (nm)");

  auto* exact = app.add_subcommand("exact-check", "closed-form unitary against integration");
  add_common(exact, "exact-check", false);
  bind(exact, "exact-check", "--k1", "exact.k1", "kappa1");
  bind(exact, "exact-check", "--k2", "exact.k2", "kappa2");
  bind(exact, "exact-check", "--m", "exact.m", "closure index");

  auto* dip = app.add_subcommand("dipolar", "dipolar couplings and corrected model");
  add_common(dip, "dipolar", false);
  bind(dip, "dipolar", "--r-nm", "dipolar.r_nm", "separation x,y,z in nm");
  bind(dip, "dipolar", "--p1", "dipolar.p1", "dipole 1 x,y,z");
  bind(dip, "dipolar", "--p2", "dipolar.p2", "dipole 2 x,y,z");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  std::string name;
  for (const auto* sub : {modes, emap, gate, sweep, exact, dip})
    if (sub->parsed()) name = sub->get_name();
  if (dump->parsed()) name = "hamiltonian";
  const Common& cm = common[name];

  try {
    Config config;
    if (!cm.preset.empty()) config.merge(Config::load(preset_dir() + "/" + cm.preset + ".conf"));
    if (!cm.config_path.empty()) config.merge(Config::load(cm.config_path));
    for (const auto& [k, v] : cm.flags) config.set(k, v, "command line");
    for (const auto& kv : cm.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "--set expects key=value, got '" + kv + "'");
      config.set(kv.substr(0, eq), kv.substr(eq + 1), "--set");
    }
    const std::string command = name == "hamiltonian" ? "hamiltonian dump" : name;
    if (config.has("command") && config.text("command") != command)
      throw Error(ErrorCode::ConfigError, "config is for command '" + config.text("command") + "', not '" + command + "'");
    Context ctx{command, config, out};
    if (name == "modes") return run_modes(ctx, cm.out);
    if (name == "eta-map") return run_eta_map(ctx, cm.out);
    if (name == "hamiltonian") return run_hamiltonian(ctx, cm.out);
    if (name == "gate-sim") return run_gate(ctx, cm.out, cm.report);
    if (name == "sweep") return run_sweep(ctx, cm.out, cm.report);
    if (name == "exact-check") return run_exact(ctx, cm.out);
    if (name == "dipolar") return run_dipolar(ctx, cm.out);
  } catch (const Error& e) {
    if (is_config_error(e.code())) {
      err << "nvphonon: " << e.what() << "\n";
      return 2;
    }
    err << "nvphonon: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "nvphonon: invariant violated: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace nvp::cli
