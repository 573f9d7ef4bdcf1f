#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "cli.hpp"
#include "nvphonon/config.hpp"
#include "nvphonon/errors.hpp"
#include "nvphonon/units.hpp"

using namespace nvp;

namespace {

Config parse(const std::string& text) {
  std::istringstream in(text);
  return Config::parse(in, "test.conf");
}

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("config parses key = value with comments and typed getters") {
  const Config c = parse("# header\nmodes.kind = sphere  # inline\nmodes.lmax = 3\n\ngate.echo = no\nsweep.k1 = 0.01, 0.05\n");
  CHECK(c.text("modes.kind") == "sphere");
  CHECK(c.integer("modes.lmax", 0) == 3);
  CHECK_FALSE(c.flag("gate.echo", true));
  CHECK(c.list("sweep.k1") == std::vector<double>{0.01, 0.05});
  CHECK(c.number("modes.diameter_nm", 7.5) == 7.5);
}

TEST_CASE("config errors carry their origin") {
  try {
    parse("modes.kind = pbc\nmodes.nonsense = 1\n");
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    CHECK(std::string(e.what()).find("test.conf:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("modes.kind pbc\n"), Error);
  const Config c = parse("modes.lmax = two\n");
  CHECK_THROWS_AS(c.integer("modes.lmax", 0), Error);
}

TEST_CASE("range lists are inclusive and reject bad steps") {
  const auto r = parse_list("5:7:0.5");
  REQUIRE(r.size() == 5);
  CHECK(r.front() == 5);
  CHECK(r.back() == doctest::Approx(7).epsilon(1e-15));
  CHECK_THROWS_AS(parse_list("5:7:0"), Error);
  CHECK_THROWS_AS(parse_list("5:7:-1"), Error);
}

TEST_CASE("hash depends on content, not on insertion order") {
  Config a, b;
  a.set("modes.kind", "pbc");
  a.set("modes.lmax", "2");
  b.set("modes.lmax", "2");
  b.set("modes.kind", "pbc");
  CHECK(a.hash() == b.hash());
  b.set("modes.lmax", "3");
  CHECK(a.hash() != b.hash());
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("later sources override earlier ones") {
  Config base = parse("modes.lmax = 2\nmodes.nmax = 4\n");
  base.merge(parse("modes.lmax = 5\n"));
  CHECK(base.integer("modes.lmax", 0) == 5);
  CHECK(base.integer("modes.nmax", 0) == 4);
}

TEST_CASE("csv writer emits provenance, header and round-trippable numbers") {
  std::ostringstream out;
  CsvWriter w(out, "prov", {"a", "b"});
  w.row({0.1, -0.0});
  CHECK(out.str() == "# prov\na,b\n0.10000000000000001,0\n");
  CHECK_THROWS_AS(w.row({1.0}), Error);
}

TEST_CASE("cli: modes pbc table and provenance") {
  const Run r = run({"modes", "pbc", "--d-nm", "10,20"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# nvphonon 0.1.0 command=modes config_hash=", 0) == 0);
  std::getline(in, line);
  CHECK(line == "d_nm,nu_THz,eta");
  std::getline(in, line);
  CHECK(line.rfind("10,1.2", 0) == 0);
}

TEST_CASE("cli: output is deterministic") {
  const std::vector<std::string> args{"sweep", "--k1", "0.05", "--k2", "0.05,0.1", "--d-nm", "10:30:5"};
  const Run a = run(args), b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("cli: sweep does not depend on the worker count") {
  const std::vector<std::string> args{"sweep", "--k1", "0.01,0.1", "--d-nm", "5:40:5"};
  setenv("NVPHONON_WORKERS", "1", 1);
  const Run a = run(args);
  setenv("NVPHONON_WORKERS", "3", 1);
  const Run b = run(args);
  setenv("NVPHONON_WORKERS", "zero", 1);
  const Run c = run(args);
  unsetenv("NVPHONON_WORKERS");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(c.code == 2);
}

TEST_CASE("cli: exit codes") {
  CHECK(run({"modes", "cubes"}).code == 2);
  CHECK(run({"modes", "pbc", "--set", "modes.bogus=1"}).code == 2);
  CHECK(run({"modes", "pbc", "--set", "nokey"}).code == 2);
  CHECK(run({"modes", "pbc", "--d-nm", "-5"}).code == 2);
  CHECK(run({"no-such-command"}).code == 2);
  CHECK(run({"modes", "pbc", "--preset", "does-not-exist"}).code == 2);
  CHECK(run({"modes", "pbc", "--preset", "fig2c"}).code == 2);  // preset is for another command
  // kappa2 >= 1 breaks the perturbative hierarchy: a numerical failure, not a usage error
  const Run r = run({"exact-check", "--k2", "1.5"});
  CHECK(r.code == 3);
  CHECK(r.err.find("PerturbationInvalid") != std::string::npos);
  CHECK(run({"--version"}).code == 0);
}

TEST_CASE("cli: presets exist and carry their command") {
  for (const char* p : {"fig1b", "fig2c", "fig3a", "fig3b", "figB1c", "figD1b"}) {
    INFO(p);
    const Config c = Config::load(cli::preset_dir() + "/" + p + ".conf");
    CHECK(c.has("command"));
  }
  CHECK(run({"modes", "--preset", "fig1b"}).code == 0);
  CHECK(run({"modes", "--preset", "figB1c"}).code == 0);
}

TEST_CASE("cli: explicit drive derives eps2 from the detuning") {
  const MaterialModel mat = diamond_default();
  Config c;
  c.set("drive.mode", "explicit");
  c.set("drive.omega1_MHz", "6.3");
  c.set("drive.eps1_GHz", "0.4");
  c.set("drive.delta_eps_kHz", "53");
  const cli::DriveSetup s = cli::resolve_drive(c, mat);
  CHECK(s.drive.eps1 - s.drive.eps2 == doctest::Approx(kTwoPi * 53e3).epsilon(1e-9));
  CHECK(s.drive.omega2 * s.eta == doctest::Approx(s.drive.omega1).epsilon(1e-12));
}

TEST_CASE("cli: theta and closure index fix kappa2") {
  Config c;
  c.set("drive.theta_deg", "90");
  c.set("drive.closure_m", "2");
  c.set("drive.compensate_eta2", "true");
  const cli::DriveSetup s = cli::resolve_drive(c, diamond_default());
  const EffectiveModel m = effective_I_model(s.drive, 2);
  CHECK(m.kappa2 == doctest::Approx(1 / (2 * std::sqrt(2.0))).epsilon(1e-9));
}
