#include "nvphonon/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nvphonon/errors.hpp"

namespace nvp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

bool known(const std::string& key) {
  if (key.rfind("material.", 0) == 0) return key.size() > 9;
  const auto& k = known_config_keys();
  return std::find(k.begin(), k.end(), key) != k.end();
}

double to_number(const std::string& text, const std::string& key, const std::string& origin) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || trim(text.substr(pos)).size() > 0)
    throw Error(ErrorCode::ConfigError, origin + ": '" + key + "' expects a number, got '" + text + "'");
  return v;
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys{
      "command",
      // mode tables
      "modes.kind", "modes.diameter_nm", "modes.d_nm", "modes.lmax", "modes.nmax", "modes.probe",
      "eta_map.family", "eta_map.l", "eta_map.m", "eta_map.n", "eta_map.nr", "eta_map.ntheta", "eta_map.phi",
      "eta_map.diameter_nm",
      // drive
      "drive.mode", "drive.diameter_nm", "drive.kappa1", "drive.kappa2", "drive.path", "drive.compensate_eta2",
      "drive.omega1_MHz", "drive.omega2_MHz", "drive.eps1_GHz", "drive.eps2_GHz", "drive.delta_eps_kHz",
      "drive.omega_mw_MHz", "drive.second_state_GHz", "drive.theta_deg", "drive.closure_m", "drive.omega2_scale",
      // gate simulation
      "gate.scheme", "gate.tier", "gate.echo", "gate.echo_pulse", "gate.compare_echo", "gate.t_final_us",
      "gate.closure_m", "gate.fock_dim", "gate.samples", "gate.n_th_initial", "gate.initial", "gate.target",
      "gate.include_carrier", "gate.rtol", "gate.atol",
      // dissipation
      "dissipation.enabled", "dissipation.q_factor", "dissipation.n_th", "dissipation.gamma",
      "dissipation.channels",
      // sweep
      "sweep.k1", "sweep.k2", "sweep.d_nm", "sweep.gamma", "sweep.second_state_GHz", "sweep.crossing_range_nm",
      // exact check
      "exact.k1", "exact.k2", "exact.m", "exact.fock_dim", "exact.diameter_nm",
      // dipolar
      "dipolar.r_nm", "dipolar.p1", "dipolar.p2", "dipolar.mag_exponent", "dipolar.n_mean",
      // hamiltonian dump
      "hamiltonian.tier", "hamiltonian.fock_dim", "hamiltonian.matrices",
  };
  return keys;
}

Config Config::parse(std::istream& in, const std::string& source) {
  Config c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string origin = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, origin + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw Error(ErrorCode::ConfigError, origin + ": expected key = value");
    c.set(key, value, origin);
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
  return parse(in, path.string());
}

void Config::set(const std::string& key, const std::string& value, const std::string& origin) {
  if (!known(key)) throw Error(ErrorCode::ConfigError, origin + ": unknown key '" + key + "'");
  entries_[key] = {value, origin};
}

void Config::merge(const Config& other) {
  for (const auto& [k, e] : other.entries_) entries_[k] = e;
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

const Config::Entry& Config::entry(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw Error(ErrorCode::ConfigError, "missing required key '" + key + "'");
  return it->second;
}

std::string Config::text(const std::string& key) const { return entry(key).value; }

std::string Config::text(const std::string& key, const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

double Config::number(const std::string& key) const {
  const Entry& e = entry(key);
  return to_number(e.value, key, e.origin);
}

double Config::number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

int Config::integer(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const double v = number(key);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw Error(ErrorCode::ConfigError, entry(key).origin + ": '" + key + "' expects an integer");
  return static_cast<int>(v);
}

bool Config::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = text(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::ConfigError, entry(key).origin + ": '" + key + "' expects true or false");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(to_number(trim(item), "range", "list"));
    if (parts.size() != 3 || !(parts[2] > 0) || parts[1] < parts[0])
      throw Error(ErrorCode::ConfigError, "range '" + text + "' must be start:stop:step with step > 0");
    const long n = std::lround(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    if (n > 10000000) throw Error(ErrorCode::ConfigError, "range '" + text + "' too long");
    for (long i = 0; i <= n; ++i) out.push_back(parts[0] + i * parts[2]);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_number(trim(item), "list", "list"));
  if (out.empty()) throw Error(ErrorCode::ConfigError, "empty list");
  return out;
}

std::vector<double> Config::list(const std::string& key) const {
  const Entry& e = entry(key);
  try {
    return parse_list(e.value);
  } catch (const Error& err) {
    throw Error(ErrorCode::ConfigError, e.origin + ": '" + key + "': " + err.what());
  }
}

std::array<double, 3> Config::vector3(const std::string& key, const std::array<double, 3>& fallback) const {
  if (!has(key)) return fallback;
  const auto v = list(key);
  if (v.size() != 3) throw Error(ErrorCode::ConfigError, entry(key).origin + ": '" + key + "' expects x,y,z");
  return {v[0], v[1], v[2]};
}

std::map<std::string, double> Config::material_overrides() const {
  std::map<std::string, double> out;
  for (const auto& [k, e] : entries_)
    if (k.rfind("material.", 0) == 0) out[k] = to_number(e.value, k, e.origin);
  return out;
}

std::string Config::canonical() const {
  std::string s;
  for (const auto& [k, e] : entries_) s += k + " = " + e.value + "\n";
  return s;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t Config::hash() const { return fnv1a(canonical()); }

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value == 0.0 ? 0.0 : value);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& out, const std::string& provenance, const std::vector<std::string>& columns)
    : out_(out), columns_(columns.size()) {
  out_ << "# " << provenance << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) { row({}, values); }

void CsvWriter::row(const std::vector<std::string>& labels, const std::vector<double>& values) {
  if (labels.size() + values.size() != columns_)
    throw Error(ErrorCode::InvalidParameter, "row width does not match the header");
  bool first = true;
  for (const auto& l : labels) {
    out_ << (first ? "" : ",") << l;
    first = false;
  }
  for (double v : values) {
    out_ << (first ? "" : ",") << format_number(v);
    first = false;
  }
  out_ << "\n";
}

}  // namespace nvp
