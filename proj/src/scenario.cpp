#include "hybridq/scenario.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "hybridq/constants.hpp"
#include "hybridq/estimate.hpp"

namespace hybridq {

namespace {

namespace k = constants;

struct Suffix {
  std::string_view text;
  Dimension dim;
  double to_si;  // multiplier; 0 for relative
};

constexpr std::array<Suffix, 15> suffixes{{
    {"_2pi_GHz", Dimension::frequency, k::two_pi_GHz},
    {"_2pi_MHz", Dimension::frequency, k::two_pi_MHz},
    {"_2pi_kHz", Dimension::frequency, k::two_pi_kHz},
    {"_2pi_Hz", Dimension::frequency, k::two_pi_Hz},
    {"_per_gc", Dimension::time, 0.0},
    {"_gc", Dimension::frequency, 0.0},
    {"_us", Dimension::time, 1e-6},
    {"_K", Dimension::temperature, 1.0},
    {"_Debye", Dimension::dipole, k::debye},
    {"_amu", Dimension::mass, k::amu},
    {"_um", Dimension::length, k::um},
    {"_cm", Dimension::length, k::cm},
    {"_aB", Dimension::length, k::bohr},
    {"_per_cm3", Dimension::density, k::per_cm3},
    {"_rad", Dimension::angle, 1.0},
}};

struct KeySpec {
  std::string_view base;
  Dimension dim;
  ValueType type;
  bool dynamic;  // enters the model; follows the [system] units choice
};

using D = Dimension;
using T = ValueType;

const std::map<std::string, std::vector<KeySpec>>& schema() {
  static const std::map<std::string, std::vector<KeySpec>> s = {
      {"system",
       {{"units", D::none, T::text, false},
        {"cavity_dim", D::none, T::integer, false},
        {"ensemble_dim", D::none, T::integer, false},
        {"ensemble1_dim", D::none, T::integer, false},
        {"ensemble2_dim", D::none, T::integer, false},
        {"workers", D::none, T::integer, false}}},
      {"cavity",
       {{"kappa", D::frequency, T::number, true},
        {"omega", D::frequency, T::number, false},
        {"gap", D::length, T::number, false},
        {"length", D::length, T::number, false}}},
      {"cpb",
       {{"g_c", D::frequency, T::number, true},
        {"delta_c", D::frequency, T::number, true},
        {"gamma_phi", D::frequency, T::number, true},
        {"T2", D::time, T::number, true},
        {"gamma_1", D::frequency, T::number, true}}},
      {"ensemble.1",
       {{"coupling", D::frequency, T::number, true},
        {"detuning", D::frequency, T::number, true},
        {"detuning_start", D::frequency, T::number, true},
        {"detuning_end", D::frequency, T::number, true},
        {"sweep_shape", D::none, T::text, false},
        {"steepness", D::none, T::number, false},
        {"coupling_ramp", D::time, T::number, true}}},
      {"pulses",
       {{"delta0", D::frequency, T::number, true},
        {"delta1", D::frequency, T::number, true},
        {"T", D::time, T::number, true},
        {"calibrate", D::none, T::boolean, false},
        {"branch", D::none, T::integer, false},
        {"phi1_target", D::angle, T::number, false},
        {"delta1_max", D::frequency, T::number, true},
        {"sweep_coupling", D::frequency, T::number, true},
        {"sweep_span", D::none, T::number, false},
        {"sweep_leakage", D::none, T::number, false},
        {"sweep_steepness", D::none, T::number, false},
        {"sweep_ramp", D::time, T::number, true},
        {"transfer_fraction", D::none, T::number, false}}},
      {"simulation",
       {{"protocol", D::none, T::text, false},
        {"method", D::none, T::text, false},
        {"rel_tol", D::none, T::number, false},
        {"abs_tol", D::none, T::number, false},
        {"max_step", D::time, T::number, true},
        {"fixed_step", D::time, T::number, true},
        {"samples", D::none, T::integer, false},
        {"duration", D::time, T::number, true},
        {"initial", D::none, T::list, false},
        {"initial_vacuum_weight", D::none, T::number, false},
        {"density", D::none, T::boolean, false},
        {"sweep_parameter", D::none, T::text, false},
        {"sweep_values", D::none, T::list, false},
        {"sweep_log_range", D::none, T::list, false},
        {"phase_samples", D::none, T::integer, false}}},
      {"estimate",
       {{"molecule_file", D::none, T::text, false},
        {"dipole", D::dipole, T::number, false},
        {"rotational", D::frequency, T::number, false},
        {"spin_rotation", D::frequency, T::number, false},
        {"hyperfine", D::frequency, T::number, false},
        {"mass", D::mass, T::number, false},
        {"nuclear_spin", D::none, T::number, false},
        {"density", D::density, T::number, false},
        {"temperature", D::temperature, T::number, false},
        {"hot_temperature", D::temperature, T::number, false},
        {"trap_temperature", D::temperature, T::number, false},
        {"count", D::none, T::number, false},
        {"count_range", D::none, T::list, false},
        {"wavelength", D::length, T::number, false},
        {"scattering_length", D::length, T::number, false},
        {"a00", D::length, T::number, false},
        {"a01", D::length, T::number, false},
        {"raman_ratio", D::none, T::number, false},
        {"raman_omega1", D::frequency, T::number, false},
        {"raman_omega2", D::frequency, T::number, false},
        {"raman_delta", D::frequency, T::number, false},
        {"trap_omega", D::frequency, T::number, false},
        {"trap_mismatch", D::none, T::number, false},
        {"alpha", D::none, T::number, false},
        {"collective_coupling", D::frequency, T::number, false},
        {"mc_samples", D::none, T::integer, false},
        {"seed", D::none, T::integer, false},
        {"n_max", D::none, T::integer, false}}},
      {"molecule",
       {{"name", D::none, T::text, false},
        {"dipole", D::dipole, T::number, false},
        {"rotational", D::frequency, T::number, false},
        {"spin_rotation", D::frequency, T::number, false},
        {"hyperfine", D::frequency, T::number, false},
        {"mass", D::mass, T::number, false},
        {"nuclear_spin", D::none, T::number, false},
        {"reference", D::none, T::text, false}}},
  };
  return s;
}

const std::vector<KeySpec>& section_schema(const std::string& section) {
  const std::string key = section == "ensemble.2" ? "ensemble.1" : section;
  return schema().at(key);
}

bool known_section(const std::string& s) { return s == "ensemble.2" || schema().count(s) > 0; }

std::string_view dimension_name(Dimension d) {
  switch (d) {
    case D::none: return "dimensionless";
    case D::frequency: return "frequency (_2pi_GHz, _2pi_MHz, _2pi_kHz, _2pi_Hz, _gc)";
    case D::time: return "time (_us, _per_gc)";
    case D::length: return "length (_um, _cm, _aB)";
    case D::mass: return "mass (_amu)";
    case D::temperature: return "temperature (_K)";
    case D::dipole: return "dipole moment (_Debye)";
    case D::density: return "density (_per_cm3)";
    case D::angle: return "angle (_rad)";
  }
  return "?";
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [p, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && p == last && std::isfinite(out);
}

bool parse_integer(const std::string& s, long long& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [p, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && p == last;
}

struct Issues {
  std::vector<ScenarioIssue> list;
  void add(int line, std::string msg) { list.push_back({line, std::move(msg)}); }
};

using SectionMap = std::map<std::string, std::map<std::string, ScenarioValue>>;

// Shared tokenizer + schema check for scenario and molecule files.
SectionMap read_sections(std::string_view text, Issues& issues) {
  SectionMap sections;
  std::map<std::string, int> header_line;
  std::string current;
  bool current_known = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        issues.add(line_no, "syntax error: unterminated section header '" + line + "'");
        current_known = false;
        continue;
      }
      current = trim(std::string_view(line).substr(1, line.size() - 2));
      current_known = known_section(current);
      if (!current_known) {
        issues.add(line_no, "unknown section [" + current + "]");
        continue;
      }
      if (auto it = header_line.find(current); it != header_line.end()) {
        issues.add(line_no, "duplicate section [" + current + "] (first at line " + std::to_string(it->second) +
                                ", again at line " + std::to_string(line_no) + ")");
        continue;
      }
      header_line[current] = line_no;
      sections[current];
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      issues.add(line_no, "syntax error: expected 'key = value' or '[section]'");
      continue;
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) {
      issues.add(line_no, "syntax error: empty key");
      continue;
    }
    if (current.empty()) {
      issues.add(line_no, "key '" + key + "' appears before any [section]");
      continue;
    }
    if (!current_known) continue;  // already reported
    if (value.empty()) {
      issues.add(line_no, "syntax error: key '" + key + "' has no value");
      continue;
    }

    // Split the unit suffix off the key.
    const std::vector<KeySpec>& specs = section_schema(current);
    const Suffix* suffix = nullptr;
    std::string base = key;
    for (const Suffix& s : suffixes) {
      if (key.size() > s.text.size() && key.compare(key.size() - s.text.size(), s.text.size(), s.text) == 0) {
        const std::string b = key.substr(0, key.size() - s.text.size());
        if (std::any_of(specs.begin(), specs.end(), [&](const KeySpec& k) { return k.base == b; })) {
          suffix = &s;
          base = b;
          break;
        }
      }
    }
    const auto spec = std::find_if(specs.begin(), specs.end(), [&](const KeySpec& k) { return k.base == base; });
    if (spec == specs.end()) {
      issues.add(line_no, "unknown key '" + key + "' in [" + current + "]");
      continue;
    }
    const Dimension got = suffix ? suffix->dim : D::none;
    if (got != spec->dim) {
      issues.add(line_no, "unit mismatch: '" + key + "' in [" + current + "] needs a " +
                              std::string(dimension_name(spec->dim)) + " key" +
                              (spec->dim == D::none ? " without unit suffix" : " suffix"));
      continue;
    }

    ScenarioValue v;
    v.key = key;
    v.line = line_no;
    v.dim = spec->dim;
    v.type = spec->type;
    v.relative = suffix && suffix->to_si == 0.0;
    bool ok = true;
    switch (spec->type) {
      case T::number:
        ok = parse_double(value, v.number);
        if (ok && suffix && !v.relative) v.number *= suffix->to_si;
        break;
      case T::integer:
        ok = parse_integer(value, v.integer);
        v.number = double(v.integer);
        break;
      case T::boolean:
        if (value == "true") v.boolean = true;
        else if (value == "false") v.boolean = false;
        else ok = false;
        break;
      case T::text:
        v.text = value;
        break;
      case T::list: {
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
          double x = 0.0;
          if (!parse_double(trim(item), x)) {
            ok = false;
            break;
          }
          v.list.push_back(x);
        }
        ok = ok && !v.list.empty();
        break;
      }
    }
    if (!ok) {
      static constexpr std::string_view names[] = {"a number", "an integer", "true or false", "text",
                                                   "a comma-separated list of numbers"};
      issues.add(line_no, "syntax error: value of '" + key + "' must be " + std::string(names[int(spec->type)]) +
                              ", got '" + value + "'");
      continue;
    }

    auto& sec = sections[current];
    if (auto it = sec.find(base); it != sec.end()) {
      issues.add(line_no, "duplicate key '" + base + "' in [" + current + "] at lines " +
                              std::to_string(it->second.line) + " and " + std::to_string(line_no));
      continue;
    }
    sec.emplace(base, std::move(v));
  }
  return sections;
}

}  // namespace

ScenarioParseError::ScenarioParseError(std::vector<ScenarioIssue> issues)
    : Error(ErrorKind::parse,
            [&] {
              std::ostringstream os;
              os << issues.size() << " scenario error" << (issues.size() == 1 ? "" : "s") << ":";
              for (const auto& i : issues) {
                os << "\n  ";
                if (i.line > 0) os << "line " << i.line << ": ";
                os << i.message;
              }
              return os.str();
            }()),
      issues_(std::move(issues)) {}

std::optional<Command> command_from_string(std::string_view s) {
  if (s == "simulate") return Command::simulate;
  if (s == "gate") return Command::gate;
  if (s == "calibrate") return Command::calibrate;
  if (s == "estimate") return Command::estimate;
  if (s == "sweep") return Command::sweep;
  return std::nullopt;
}

std::string_view to_string(Command c) {
  switch (c) {
    case Command::any: return "any";
    case Command::simulate: return "simulate";
    case Command::gate: return "gate";
    case Command::calibrate: return "calibrate";
    case Command::estimate: return "estimate";
    case Command::sweep: return "sweep";
  }
  return "?";
}

Scenario parse_scenario(std::string_view text, Command command, std::optional<long long> seed) {
  Issues issues;
  Scenario sc;
  sc.sections_ = read_sections(text, issues);
  if (sc.sections_.count("molecule")) issues.add(0, "section [molecule] belongs in a molecule file, not a scenario");

  // Units mode.
  if (sc.has("system", "units")) {
    const ScenarioValue& u = sc.get("system", "units");
    if (u.text == "gc") sc.units_ = Scenario::Units::gc;
    else if (u.text == "physical") sc.units_ = Scenario::Units::physical;
    else issues.add(u.line, "units must be 'gc' or 'physical', got '" + u.text + "'");
  }

  // Unit consistency of every dimensioned key.
  for (const auto& [name, keys] : sc.sections_) {
    if (name == "molecule") continue;
    const auto& specs = section_schema(name);
    for (const auto& [base, v] : keys) {
      const auto spec = std::find_if(specs.begin(), specs.end(), [&](const KeySpec& s) { return s.base == base; });
      if (v.dim == D::none) continue;
      if (!spec->dynamic && v.relative) {
        issues.add(v.line, "unit mismatch: '" + v.key + "' is a device constant and needs a physical unit");
      } else if (spec->dynamic && sc.units_ == Scenario::Units::gc && !v.relative) {
        issues.add(v.line, "unit mismatch: units = gc expects '" + base +
                               (v.dim == D::time ? "_per_gc'" : "_gc'") + ", got '" + v.key + "'");
      } else if (name == "cpb" && base == "g_c") {
        if (sc.units_ == Scenario::Units::physical && v.relative)
          issues.add(v.line, "unit mismatch: g_c sets the frequency scale and needs a physical unit when units = physical");
        if (sc.units_ == Scenario::Units::gc && v.number != 1.0)
          issues.add(v.line, "g_c_gc must be 1 when units = gc");
      }
    }
  }

  if (sc.has("cpb", "gamma_phi") && sc.has("cpb", "T2"))
    issues.add(sc.get("cpb", "T2").line, "give either gamma_phi or T2 in [cpb], not both (lines " +
                                             std::to_string(sc.get("cpb", "gamma_phi").line) + " and " +
                                             std::to_string(sc.get("cpb", "T2").line) + ")");

  // Required sections and keys per command.
  std::vector<std::string> need;
  switch (command) {
    case Command::any: need = {"cpb"}; break;
    case Command::simulate: need = {"cpb", "simulation"}; break;
    case Command::gate:
    case Command::calibrate: need = {"cpb", "pulses"}; break;
    case Command::estimate: need = {"estimate"}; break;
    case Command::sweep: need = {"cpb", "pulses", "simulation"}; break;
  }
  for (const std::string& s : need)
    if (!sc.has_section(s)) issues.add(0, "missing required section [" + s + "]");

  auto require = [&](const std::string& s, const std::string& base, const std::string& why) {
    if (sc.has_section(s) && !sc.has(s, base)) issues.add(0, "missing required key '" + base + "' in [" + s + "]" + why);
  };
  if (command != Command::estimate && sc.units_ == Scenario::Units::physical) require("cpb", "g_c", "");
  if (command == Command::gate || command == Command::calibrate || command == Command::sweep) {
    require("pulses", "delta0", "");
    if (command != Command::calibrate && !sc.boolean_or("pulses", "calibrate", false)) {
      require("pulses", "delta1", " (or set calibrate = true)");
      require("pulses", "T", " (or set calibrate = true)");
    }
  }
  if (command == Command::simulate) {
    require("simulation", "initial", "");
    if (sc.text_or("simulation", "protocol", "evolve") != "swap") require("simulation", "duration", "");
  }
  if (command == Command::sweep) {
    require("simulation", "sweep_parameter", "");
    if (sc.has_section("simulation") && !sc.has("simulation", "sweep_values") && !sc.has("simulation", "sweep_log_range"))
      issues.add(0, "missing required key 'sweep_values' or 'sweep_log_range' in [simulation]");
  }
  if (command == Command::estimate && sc.has("estimate", "mc_samples") && !seed)
    require("estimate", "seed", " (Monte Carlo needs an explicit seed)");

  if (!issues.list.empty()) {
    std::stable_sort(issues.list.begin(), issues.list.end(),
                     [](const ScenarioIssue& a, const ScenarioIssue& b) { return a.line < b.line; });
    throw ScenarioParseError(std::move(issues.list));
  }
  if (seed && sc.has_section("estimate")) sc.set_integer("estimate", "seed", *seed);
  return sc;
}

bool Scenario::has(const std::string& section, const std::string& base) const {
  auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(base) > 0;
}

const ScenarioValue& Scenario::get(const std::string& section, const std::string& base) const {
  auto it = sections_.find(section);
  if (it == sections_.end() || !it->second.count(base))
    throw PreconditionError("scenario lacks '" + base + "' in [" + section + "]");
  return it->second.at(base);
}

double Scenario::number(const std::string& s, const std::string& b) const { return get(s, b).number; }
double Scenario::number_or(const std::string& s, const std::string& b, double f) const {
  return has(s, b) ? number(s, b) : f;
}
long long Scenario::integer(const std::string& s, const std::string& b) const { return get(s, b).integer; }
long long Scenario::integer_or(const std::string& s, const std::string& b, long long f) const {
  return has(s, b) ? integer(s, b) : f;
}
bool Scenario::boolean_or(const std::string& s, const std::string& b, bool f) const {
  return has(s, b) ? get(s, b).boolean : f;
}
std::string Scenario::text_or(const std::string& s, const std::string& b, const std::string& f) const {
  return has(s, b) ? get(s, b).text : f;
}
const std::vector<double>& Scenario::list(const std::string& s, const std::string& b) const { return get(s, b).list; }

double Scenario::g_c_model() const {
  if (units_ == Units::gc) return 1.0;
  return get("cpb", "g_c").number * 1e-6;  // rad/s -> rad/us
}

double Scenario::model_frequency(const std::string& s, const std::string& b) const {
  const ScenarioValue& v = get(s, b);
  if (v.dim != D::frequency) throw PreconditionError("'" + v.key + "' is not a frequency");
  if (v.relative) return v.number * g_c_model();
  return v.number * 1e-6;
}
double Scenario::model_frequency_or(const std::string& s, const std::string& b, double f) const {
  return has(s, b) ? model_frequency(s, b) : f;
}

double Scenario::model_time(const std::string& s, const std::string& b) const {
  const ScenarioValue& v = get(s, b);
  if (v.dim != D::time) throw PreconditionError("'" + v.key + "' is not a time");
  if (v.relative) return v.number / g_c_model();
  return v.number * 1e6;
}
double Scenario::model_time_or(const std::string& s, const std::string& b, double f) const {
  return has(s, b) ? model_time(s, b) : f;
}

double Scenario::si(const std::string& s, const std::string& b) const {
  const ScenarioValue& v = get(s, b);
  if (!v.relative) return v.number;
  if (units_ == Units::gc) throw PreconditionError("'" + v.key + "' is relative to g_c and has no SI value when units = gc");
  const double gc = get("cpb", "g_c").number;
  return v.dim == D::time ? v.number / gc : v.number * gc;
}
double Scenario::si_or(const std::string& s, const std::string& b, double f) const { return has(s, b) ? si(s, b) : f; }

void Scenario::set_integer(const std::string& section, const std::string& base, long long value) {
  ScenarioValue v;
  v.key = base;
  v.type = ValueType::integer;
  v.integer = value;
  v.number = double(value);
  sections_[section][base] = v;
}

MoleculeSpec parse_molecule(std::string_view text) {
  Issues issues;
  SectionMap secs = read_sections(text, issues);
  for (const auto& [name, keys] : secs)
    if (name != "molecule") issues.add(0, "molecule files hold only a [molecule] section, found [" + name + "]");
  const auto it = secs.find("molecule");
  if (it == secs.end()) issues.add(0, "missing required section [molecule]");
  MoleculeSpec m;
  if (it != secs.end()) {
    const auto& keys = it->second;
    for (const char* need : {"name", "dipole", "rotational", "mass", "reference"})
      if (!keys.count(need)) issues.add(0, std::string("missing required key '") + need + "' in [molecule]");
    auto num = [&](const char* key, double fallback) { return keys.count(key) ? keys.at(key).number : fallback; };
    auto txt = [&](const char* key) { return keys.count(key) ? keys.at(key).text : std::string(); };
    m.name = txt("name");
    m.reference = txt("reference");
    m.dipole = num("dipole", 0.0);
    m.rotational = num("rotational", 0.0);
    m.spin_rotation = num("spin_rotation", 0.0);
    m.hyperfine = num("hyperfine", 0.0);
    m.mass = num("mass", 0.0);
    m.nuclear_spin = num("nuclear_spin", 0.0);
    for (const auto& [base, v] : keys)
      if (v.relative) issues.add(v.line, "unit mismatch: '" + v.key + "' needs a physical unit");
  }
  if (!issues.list.empty()) throw ScenarioParseError(std::move(issues.list));
  return m;
}

}  // namespace hybridq
