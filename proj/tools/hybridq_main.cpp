#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hybridq/commands.hpp"

using namespace hybridq;

int main(int argc, char** argv) {
  CLI::App app{"Hybrid cavity / molecular-ensemble quantum processor simulator"};
  app.set_version_flag("--version", std::string(HYBRIDQ_VERSION));
  std::string command, path, out_dir = ".", format = "both";
  std::optional<long long> seed;
  app.add_option("command", command, "simulate | gate | calibrate | estimate | sweep")
      ->required()
      ->check(CLI::IsMember({"simulate", "gate", "calibrate", "estimate", "sweep"}));
  app.add_option("scenario", path, "scenario file")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--format", format, "csv | json | both")->check(CLI::IsMember({"csv", "json", "both"}));
  app.add_option("--seed", seed, "overrides the scenario seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : int(ErrorKind::parse);
  }

  try {
    const Command cmd = *command_from_string(command);
    const OutputFormat fmt = format == "csv" ? OutputFormat::csv : format == "json" ? OutputFormat::json : OutputFormat::both;
    if (seed && *seed < 0) throw PreconditionError("--seed must be non-negative");
    const Scenario sc = load_scenario(path, cmd, seed);
    std::ifstream in(path, std::ios::binary);
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    const CommandOutput out = run_command(cmd, sc, text);
    for (const std::string& w : out.metadata.warnings) std::cerr << "warning: " << w << "\n";
    for (const std::string& f : write_outputs(out, out_dir, fmt)) std::cout << f << "\n";
    if (out.failure) std::rethrow_exception(out.failure);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
