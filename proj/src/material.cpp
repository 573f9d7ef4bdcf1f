#include "nvphonon/material.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "nvphonon/errors.hpp"
#include "nvphonon/units.hpp"

namespace nvp {

namespace {

MaterialModel make_diamond() {
  MaterialModel m{};
  m.zeta = 610e12;
  m.beta = 1.0;
  m.rho = 3512.0;
  m.v_t = 1.283e4;
  m.v_l = 1.831e4;
  m.c_pbc = 1.2e4;
  m.gamma_e = to_angular(15.0 * kMHz);
  m.gamma_nd = to_angular(7.5 * kMHz);
  m.lambda0 = 637e-9;
  m.n_refr = 2.4;
  m.xi0 = 0.03;
  m.delta_es = to_angular(4.0 * kGHz);
  return m;
}

double* field(MaterialModel& m, const std::string& key) {
  static const std::pair<const char*, double MaterialModel::*> table[] = {
      {"zeta", &MaterialModel::zeta},       {"beta", &MaterialModel::beta},
      {"rho", &MaterialModel::rho},         {"v_t", &MaterialModel::v_t},
      {"v_l", &MaterialModel::v_l},         {"c_pbc", &MaterialModel::c_pbc},
      {"gamma_e", &MaterialModel::gamma_e}, {"gamma_nd", &MaterialModel::gamma_nd},
      {"lambda0", &MaterialModel::lambda0}, {"n_refr", &MaterialModel::n_refr},
      {"xi0", &MaterialModel::xi0},         {"delta_es", &MaterialModel::delta_es},
  };
  std::string name = key;
  if (name.rfind("material.", 0) == 0) name = name.substr(9);
  for (const auto& [k, ptr] : table)
    if (name == k) return &(m.*ptr);
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const MaterialModel& diamond_default() {
  static const MaterialModel diamond = make_diamond();
  return diamond;
}

void validate(const MaterialModel& m) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidParameter, what);
  };
  require(std::isfinite(m.zeta), "zeta must be finite");
  require(m.rho > 0 && m.v_t > 0 && m.v_l > 0 && m.c_pbc > 0, "speeds and density must be positive");
  require(m.gamma_e > 0 && m.gamma_nd > 0, "decay rates must be positive");
  require(m.lambda0 > 0, "lambda0 must be positive");
  require(m.xi0 > 0 && m.xi0 <= 1, "xi0 must lie in (0, 1]");
  require(m.n_refr >= 1, "refractive index must be >= 1");
  require(m.v_l > m.v_t, "v_l must exceed v_t");
}

MaterialModel with_overrides(MaterialModel base, const std::map<std::string, double>& overrides) {
  for (const auto& [key, value] : overrides) {
    double* slot = field(base, key);
    if (!slot) throw Error(ErrorCode::ConfigError, "unknown material key '" + key + "'");
    *slot = value;
  }
  validate(base);
  return base;
}

MaterialModel load_material(const std::filesystem::path& path, const MaterialModel& base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
  std::map<std::string, double> overrides;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ConfigError, path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string text = trim(line.substr(eq + 1));
    std::size_t used = 0;
    double value = 0;
    try {
      value = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size() || text.empty())
      throw Error(ErrorCode::ConfigError,
                  path.string() + ":" + std::to_string(lineno) + ": '" + key + "' is not a number");
    overrides[key] = value;
  }
  return with_overrides(base, overrides);
}

double Geometry::volume() const {
  if (shape == Shape::sphere) return 4.0 / 3.0 * kPi * radius * radius * radius;
  return edges[0] * edges[1] * edges[2];
}

double Geometry::extent(int axis) const {
  if (shape == Shape::sphere) return 2.0 * radius;
  return edges.at(static_cast<std::size_t>(axis));
}

Geometry make_geometry(Shape shape, const std::array<double, 3>& dimensions,
                       const MaterialModel& material) {
  Geometry g{};
  g.shape = shape;
  if (shape == Shape::sphere) {
    if (!(dimensions[0] > 0))
      throw Error(ErrorCode::NonPositiveDimension, "sphere diameter must be positive");
    g.radius = 0.5 * dimensions[0];
  } else {
    for (double d : dimensions)
      if (!(d > 0)) throw Error(ErrorCode::NonPositiveDimension, "box edges must be positive");
    g.edges = dimensions;
  }
  g.mass = material.rho * g.volume();
  return g;
}

}  // namespace nvp
