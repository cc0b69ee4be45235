#pragma once

#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "hybridq/estimate.hpp"
#include "hybridq/integrate.hpp"
#include "hybridq/model.hpp"
#include "hybridq/protocols.hpp"
#include "hybridq/results.hpp"
#include "hybridq/scenario.hpp"

namespace hybridq {

enum class OutputFormat { csv, json, both };

// Reads and parses a scenario file; relative paths inside it resolve against
// its directory. `seed` replaces any seed keys (and satisfies the seed
// requirement of Monte Carlo runs).
Scenario load_scenario(const std::string& path, Command command, std::optional<long long> seed = std::nullopt);

// Pieces of the dispatch, exposed for tests.
SpaceLayout layout_from(const Scenario& sc);
// Static device from [system], [cavity], [cpb], [ensemble.i]; ensemble
// sweeps span [simulation] duration; a full [pulses] triple drives delta_c.
SystemModel model_from(const Scenario& sc);
EvolveOptions evolve_options_from(const Scenario& sc);
Ket initial_state_from(const Scenario& sc, const SpaceLayout& layout);
QuadraticPulse pulse_from(const Scenario& sc);
CalibrationOptions calibration_options_from(const Scenario& sc);
SweepDesign sweep_design_from(const Scenario& sc);
std::vector<EstimateReport> estimate_reports(const Scenario& sc);

struct CommandOutput {
  RunMetadata metadata;
  std::vector<ResultTable> tables;
  // A failure after partial results (a calibration residual map) is kept
  // here so the tables still get written before the error is reported.
  std::exception_ptr failure;
};

CommandOutput run_command(Command command, const Scenario& sc, const std::string& scenario_text);

// Writes <command>_<table>.csv files and/or <command>.json into dir and
// returns the paths written.
std::vector<std::string> write_outputs(const CommandOutput& out, const std::string& dir, OutputFormat format);

}  // namespace hybridq
