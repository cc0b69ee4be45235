#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hybridq/error.hpp"

namespace hybridq {

// Scenario files:
//
//   # comment
//   [section]
//   key_suffix = value
//
// The unit is part of the key (g_c_2pi_MHz, T_per_gc, temperature_K, ...).
// Values are numbers, integers, true/false, bare words or comma lists.
// Everything is converted once at parse time: physical quantities to SI
// (angular frequencies in rad/s), _gc / _per_gc quantities kept relative to
// g_c until a model is built.

enum class Dimension { none, frequency, time, length, mass, temperature, dipole, density, angle };
enum class ValueType { number, integer, boolean, text, list };

struct ScenarioValue {
  std::string key;  // as written
  int line = 0;
  Dimension dim = Dimension::none;
  ValueType type = ValueType::number;
  bool relative = false;  // _gc or _per_gc
  double number = 0.0;    // SI, or units of g_c / (1/g_c) when relative
  long long integer = 0;
  bool boolean = false;
  std::string text;
  std::vector<double> list;
};

struct ScenarioIssue {
  int line;
  std::string message;
};

class ScenarioParseError : public Error {
 public:
  explicit ScenarioParseError(std::vector<ScenarioIssue> issues);
  const std::vector<ScenarioIssue>& issues() const { return issues_; }

 private:
  std::vector<ScenarioIssue> issues_;
};

enum class Command { any, simulate, gate, calibrate, estimate, sweep };
std::optional<Command> command_from_string(std::string_view s);
std::string_view to_string(Command c);

class Scenario {
 public:
  enum class Units { gc, physical };

  Units units() const { return units_; }
  bool has_section(const std::string& section) const { return sections_.count(section) > 0; }
  bool has(const std::string& section, const std::string& base) const;
  const ScenarioValue& get(const std::string& section, const std::string& base) const;

  double number(const std::string& section, const std::string& base) const;
  double number_or(const std::string& section, const std::string& base, double fallback) const;
  long long integer(const std::string& section, const std::string& base) const;
  long long integer_or(const std::string& section, const std::string& base, long long fallback) const;
  bool boolean_or(const std::string& section, const std::string& base, bool fallback) const;
  std::string text_or(const std::string& section, const std::string& base, const std::string& fallback) const;
  const std::vector<double>& list(const std::string& section, const std::string& base) const;

  // Model units: g_c = 1 and times in 1/g_c for units = gc; rad/us and us
  // for units = physical.
  double g_c_model() const;
  double model_frequency(const std::string& section, const std::string& base) const;
  double model_frequency_or(const std::string& section, const std::string& base, double fallback) const;
  double model_time(const std::string& section, const std::string& base) const;
  double model_time_or(const std::string& section, const std::string& base, double fallback) const;
  // SI value of a physical quantity.
  double si(const std::string& section, const std::string& base) const;
  double si_or(const std::string& section, const std::string& base, double fallback) const;

  // Replace (or add) an integer key; used for --seed.
  void set_integer(const std::string& section, const std::string& base, long long value);

  std::string source_dir;  // for resolving relative paths

  friend Scenario parse_scenario(std::string_view text, Command command, std::optional<long long> seed);

 private:
  Units units_ = Units::physical;
  std::map<std::string, std::map<std::string, ScenarioValue>> sections_;
};

// Collects every problem before throwing ScenarioParseError (exit code 2).
// A given seed overrides [estimate] seed.
Scenario parse_scenario(std::string_view text, Command command = Command::any,
                        std::optional<long long> seed = std::nullopt);

// Molecule fixture files use the same grammar with a single [molecule]
// section.
struct MoleculeSpec;
MoleculeSpec parse_molecule(std::string_view text);

}  // namespace hybridq
