#include <doctest.h>

#include <fstream>
#include <sstream>

#include "hybridq/constants.hpp"
#include "hybridq/estimate.hpp"
#include "hybridq/scenario.hpp"
#include "support.hpp"

using namespace hybridq;
namespace k = hybridq::constants;

namespace {

std::vector<ScenarioIssue> issues_of(const std::string& text, Command c = Command::any) {
  try {
    parse_scenario(text, c);
  } catch (const ScenarioParseError& e) {
    CHECK(e.exit_code() == 2);
    return e.issues();
  }
  FAIL("expected a parse error");
  return {};
}

bool mentions(const std::vector<ScenarioIssue>& issues, const std::string& what) {
  for (const auto& i : issues)
    if (i.message.find(what) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("minimal physical scenario") {
  const Scenario sc = parse_scenario("[cpb]\ng_c_2pi_MHz = 50\n");
  CHECK(sc.units() == Scenario::Units::physical);
  CHECK(sc.si("cpb", "g_c") == doctest::Approx(2 * k::pi * 50e6));
  // model units: rad/us
  CHECK(sc.g_c_model() == doctest::Approx(2 * k::pi * 50));
}

TEST_CASE("empty file lists every missing section") {
  const auto gate = issues_of("", Command::gate);
  CHECK(mentions(gate, "[cpb]"));
  CHECK(mentions(gate, "[pulses]"));
  const auto sweep = issues_of("", Command::sweep);
  CHECK(sweep.size() >= 3);
  CHECK(mentions(sweep, "[simulation]"));
  CHECK(mentions(issues_of("", Command::estimate), "[estimate]"));
}

TEST_CASE("duplicate key names both lines") {
  const auto is = issues_of("[cpb]\ng_c_2pi_MHz = 50\n\ng_c_2pi_MHz = 40\n");
  REQUIRE(is.size() == 1);
  CHECK(is[0].line == 4);
  CHECK(is[0].message.find("2") != std::string::npos);
  CHECK(is[0].message.find("4") != std::string::npos);
}

TEST_CASE("all problems are reported together") {
  const std::string text =
      "[system]\n"
      "units = gc\n"
      "colour = blue\n"      // unknown key
      "[cpb]\n"
      "g_c_gc = 1\n"
      "delta_c_us = 3\n"     // frequency key with a time unit
      "gamma_phi_gc = x\n"   // not a number
      "[nonsense]\n"         // unknown section
      "just words\n";        // syntax
  const auto is = issues_of(text);
  CHECK(is.size() >= 5);
  CHECK(mentions(is, "unknown key 'colour'"));
  CHECK(mentions(is, "unit mismatch"));
  CHECK(mentions(is, "unknown section"));
  CHECK(mentions(is, "syntax error"));
  for (std::size_t i = 1; i < is.size(); ++i) CHECK(is[i - 1].line <= is[i].line);
}

TEST_CASE("unit rules per mode") {
  CHECK(mentions(issues_of("[system]\nunits = gc\n[cpb]\ng_c_gc = 2\n"), "g_c_gc must be 1"));
  CHECK(mentions(issues_of("[system]\nunits = gc\n[cpb]\ng_c_gc = 1\ndelta_c_2pi_MHz = 3\n"), "unit mismatch"));
  CHECK(mentions(issues_of("[cpb]\ng_c_2pi_MHz = 50\ngamma_phi_2pi_MHz = 1\nT2_us = 2\n"), "not both"));

  const Scenario sc = parse_scenario("[system]\nunits = gc\n[cpb]\ng_c_gc = 1\ndelta_c_gc = -30\nT2_per_gc = 1e3\n");
  CHECK(sc.model_frequency("cpb", "delta_c") == -30.0);
  CHECK(sc.model_time("cpb", "T2") == 1e3);

  const Scenario ph = parse_scenario("[cpb]\ng_c_2pi_MHz = 50\ndelta_c_gc = -30\nT2_us = 2\n");
  CHECK(ph.model_frequency("cpb", "delta_c") == doctest::Approx(-30 * 2 * k::pi * 50));
  CHECK(ph.model_time("cpb", "T2") == doctest::Approx(2.0));
}

TEST_CASE("required keys per command") {
  const std::string base = "[system]\nunits = gc\n[cpb]\ng_c_gc = 1\n[pulses]\ndelta0_gc = 30\n";
  CHECK_NOTHROW(parse_scenario(base, Command::calibrate));
  CHECK(mentions(issues_of(base, Command::gate), "delta1"));
  CHECK_NOTHROW(parse_scenario(base + "calibrate = true\n", Command::gate));

  const std::string mc = "[estimate]\nmc_samples = 20000\n";
  CHECK(mentions(issues_of(mc, Command::estimate), "seed"));
  const Scenario seeded = parse_scenario(mc, Command::estimate, 99);
  CHECK(seeded.integer("estimate", "seed") == 99);
  const Scenario own = parse_scenario(mc + "seed = 5\n", Command::estimate, 7);
  CHECK(own.integer("estimate", "seed") == 7);
}

TEST_CASE("values and lists") {
  const Scenario sc = parse_scenario(
      "[system]\nunits = gc\ncavity_dim = 5\n[cpb]\ng_c_gc = 1\n[simulation]\ninitial = 1, 0, 0, 0\n"
      "sweep_log_range = 1e-4, 1e-2, 5\ndensity = true\n");
  CHECK(sc.integer("system", "cavity_dim") == 5);
  CHECK(sc.list("simulation", "initial") == std::vector<double>{1, 0, 0, 0});
  CHECK(sc.boolean_or("simulation", "density", false));
  CHECK(sc.integer_or("system", "ensemble_dim", 3) == 3);
}

TEST_CASE("molecule files") {
  const MoleculeSpec m = parse_molecule(
      "[molecule]\nname = X\nreference = test\ndipole_Debye = 2\nrotational_2pi_GHz = 10\nmass_amu = 40\n");
  CHECK(m.name == "X");
  CHECK(m.dipole == doctest::Approx(2 * k::debye));
  CHECK(m.rotational == doctest::Approx(2 * k::pi * 1e10));
  CHECK(m.mass == doctest::Approx(40 * k::amu));
  CHECK_THROWS_AS(parse_molecule("[molecule]\nname = X\n"), ScenarioParseError);
}

TEST_CASE("shipped scenarios parse for their commands") {
  auto read = [](const std::string& name) {
    std::ifstream in(hybridq::testing::source_path("scenarios/" + name));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  CHECK_NOTHROW(parse_scenario(read("gate.scn"), Command::gate));
  CHECK_NOTHROW(parse_scenario(read("dephasing_sweep.scn"), Command::sweep));
  CHECK_NOTHROW(parse_scenario(read("calibrate.scn"), Command::calibrate));
  CHECK_NOTHROW(parse_scenario(read("estimate_caf.scn"), Command::estimate));
  CHECK_NOTHROW(parse_scenario(read("estimate_cacl.scn"), Command::estimate));
  CHECK_NOTHROW(parse_scenario(read("swap.scn"), Command::simulate));
  CHECK_NOTHROW(parse_scenario(read("landau_zener.scn"), Command::simulate));
  CHECK_NOTHROW(parse_scenario(read("physical_gate.scn"), Command::gate));
}
