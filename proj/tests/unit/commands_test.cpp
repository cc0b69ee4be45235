#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hybridq/commands.hpp"
#include "support.hpp"

using namespace hybridq;
namespace fs = std::filesystem;
using hybridq::testing::source_path;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const ResultTable& table(const CommandOutput& out, const std::string& name) {
  for (const auto& t : out.tables)
    if (t.name() == name) return t;
  FAIL("no table " << name);
  return out.tables.front();
}

CommandOutput run(Command c, const std::string& scenario) {
  const std::string path = source_path("scenarios/" + scenario);
  return run_command(c, load_scenario(path, c), slurp(path));
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hybridq_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(HYBRIDQ_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("calibrate command") {
  const CommandOutput out = run(Command::calibrate, "calibrate.scn");
  CHECK(!out.failure);
  const ResultTable& t = table(out, "calibration");
  CHECK(t.number(0, "delta1") == doctest::Approx(0.42031727455691004).epsilon(1e-9));
  CHECK(std::abs(t.number(0, "residual1")) < 1e-6);
  CHECK(std::abs(t.number(0, "phi2_wrapped")) < 1e-6);
}

TEST_CASE("estimate command emits unit-tagged estimates") {
  const CommandOutput out = run(Command::estimate, "estimate_caf.scn");
  CHECK(out.metadata.seed == 12345LL);
  for (const char* name : {"vacuum_rabi", "raman_couplings", "collision_rate_swave", "gate_error_budget"}) {
    const ResultTable& t = table(out, name);
    CHECK(t.rows().size() == 1);
    for (const Column& c : t.columns()) CHECK(!c.unit.empty());
  }
  const std::string csv = table(out, "vacuum_rabi").to_csv();
  CHECK(csv.find('[') != std::string::npos);
}

TEST_CASE("CSV and JSON outputs agree") {
  const CommandOutput out = run(Command::estimate, "estimate_cacl.scn");
  const fs::path dir = scratch("agree");
  const auto files = write_outputs(out, dir.string(), OutputFormat::both);
  CHECK(files.size() == out.tables.size() + 1);
  const auto [meta, tables] = results_from_json(slurp(dir / "estimate.json"));
  REQUIRE(tables.size() == out.tables.size());
  for (const ResultTable& t : tables) CHECK(slurp(dir / ("estimate_" + t.name() + ".csv")) == t.to_csv());
  fs::remove_all(dir);
}

TEST_CASE("simulate command on the Landau-Zener scenario") {
  const CommandOutput out = run(Command::simulate, "landau_zener.scn");
  const ResultTable& t = table(out, "timeline");
  const std::size_t last = t.rows().size() - 1;
  CHECK(std::abs(t.number(last, "n_ensemble1") - (1 - std::exp(-1.0))) < 1e-3);
}

TEST_CASE("CLI exit codes") {
  const fs::path dir = scratch("exit");
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  const std::string out = " --out " + (dir / "o").string();
  CHECK(cli("calibrate " + source_path("scenarios/calibrate.scn") + out) == 0);
  CHECK(cli("bogus " + source_path("scenarios/calibrate.scn")) == 2);
  CHECK(cli("gate " + write("bad.scn", "[cpb\n")) == 2);
  CHECK(cli("gate " + write("small.scn", "[system]\nunits = gc\ncavity_dim = 2\n[cpb]\ng_c_gc = 1\n[pulses]\n"
                                         "delta0_gc = 30\ndelta1_gc = 0.44\nT_per_gc = 44.79\n") + out) == 3);
  CHECK(cli("simulate " + write("stiff.scn", "[system]\nunits = gc\ncavity_dim = 2\nensemble_dim = 2\n[cpb]\n"
                                             "g_c_gc = 1\n[cavity]\nkappa_gc = 1e16\n[simulation]\n"
                                             "duration_per_gc = 1\ninitial = 1, 0, 0, 0\n") + out) == 4);
  CHECK(cli("calibrate " + write("nobox.scn", "[system]\nunits = gc\n[cpb]\ng_c_gc = 1\n[pulses]\n"
                                              "delta0_gc = 30\ndelta1_max_gc = 0.01\n") + out) == 5);
  CHECK(fs::exists(dir / "o" / "calibrate_residual_map.csv"));
  fs::remove_all(dir);
}
