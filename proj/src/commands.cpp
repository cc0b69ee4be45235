#include "hybridq/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hybridq/constants.hpp"
#include "hybridq/parallel.hpp"

namespace hybridq {

namespace k = constants;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Column units of model quantities.
struct ModelUnits {
  std::string freq, time;
};
ModelUnits model_units(const Scenario& sc) {
  if (sc.units() == Scenario::Units::gc) return {"g_c", "1/g_c"};
  return {"rad/us", "us"};
}

Index dim_or(const Scenario& sc, const char* key, Index fallback) {
  const long long v = sc.integer_or("system", key, fallback);
  if (v < 2) throw PreconditionError(std::string("[system] ") + key + " must be at least 2");
  return Index(v);
}

Schedule ensemble_detuning(const Scenario& sc, const std::string& sec, double duration) {
  const bool has_start = sc.has(sec, "detuning_start"), has_end = sc.has(sec, "detuning_end");
  if (has_start != has_end) throw PreconditionError("[" + sec + "] needs both detuning_start and detuning_end");
  if (!has_start) return Schedule::constant(sc.model_frequency_or(sec, "detuning", 0.0));
  if (sc.has(sec, "detuning")) throw PreconditionError("[" + sec + "] has both a constant detuning and a sweep");
  if (!std::isfinite(duration)) throw PreconditionError("an ensemble sweep needs [simulation] duration");
  const double a = sc.model_frequency(sec, "detuning_start"), b = sc.model_frequency(sec, "detuning_end");
  const std::string shape = sc.text_or(sec, "sweep_shape", "tanh");
  if (shape == "linear") return Schedule::linear(a, b, duration);
  if (shape == "tanh") return Schedule::tanh_ramp(a, b, duration, sc.number_or(sec, "steepness", 1.5));
  throw PreconditionError("[" + sec + "] sweep_shape must be 'linear' or 'tanh', got '" + shape + "'");
}

double gamma_phi_from(const Scenario& sc) {
  if (sc.has("cpb", "T2")) {
    const double t2 = sc.model_time("cpb", "T2");
    if (!(t2 > 0.0)) throw PreconditionError("T2 must be positive");
    return 1.0 / t2;
  }
  return sc.model_frequency_or("cpb", "gamma_phi", 0.0);
}

std::string basis_label(std::size_t k) {
  static const char* labels[4] = {"|00>", "|01>", "|10>", "|11>"};
  return labels[k];
}

ResultTable stats_table(const std::string& name, const std::vector<std::pair<std::string, ode::StepStats>>& runs) {
  ResultTable t(name, {{"run", ""}, {"accepted", "1"}, {"rejected", "1"}, {"rhs_evaluations", "1"}});
  for (const auto& [label, st] : runs)
    t.add_row({label, (long long)st.accepted, (long long)st.rejected, (long long)st.rhs_evaluations});
  return t;
}

// ---------------------------------------------------------------------------
// simulate

template <typename TL>
ResultTable timeline_table(const TL& tl, const ModelUnits& mu) {
  std::vector<Column> cols{{"time", mu.time}};
  for (const auto& [name, v] : tl.series) cols.push_back({name, "1"});
  ResultTable t("timeline", std::move(cols));
  for (std::size_t i = 0; i < tl.times.size(); ++i) {
    std::vector<Cell> row{tl.times[i]};
    for (const auto& [name, v] : tl.series) row.emplace_back(v[i]);
    t.add_row(std::move(row));
  }
  return t;
}

double max_drift(const std::vector<double>& v, double ref) {
  double d = 0.0;
  for (double x : v) d = std::max(d, std::abs(x - ref));
  return d;
}

void cmd_simulate(const Scenario& sc, CommandOutput& out) {
  const ModelUnits mu = model_units(sc);
  const SystemModel model = model_from(sc);
  const Ket psi = initial_state_from(sc, model.layout);
  EvolveOptions eo = evolve_options_from(sc);
  const double duration = sc.model_time("simulation", "duration");
  const std::string protocol = sc.text_or("simulation", "protocol", "evolve");

  if (protocol == "swap") {
    SweepSpec sw;
    const bool s1 = sc.has("ensemble.1", "detuning_start"), s2 = sc.has("ensemble.2", "detuning_start");
    if (!s1 && !s2) throw PreconditionError("swap needs a detuning sweep in [ensemble.1] or [ensemble.2]");
    sw.target = s1 && s2 ? 0 : (s1 ? 1 : 2);
    const std::string sec = s1 ? "ensemble.1" : "ensemble.2";
    sw.delta_start = sc.model_frequency(sec, "detuning_start");
    sw.delta_end = sc.model_frequency(sec, "detuning_end");
    sw.duration = duration;
    sw.shape = sc.text_or(sec, "sweep_shape", "tanh") == "linear" ? SweepShape::linear : SweepShape::tanh_ramp;
    sw.steepness = sc.number_or(sec, "steepness", 1.5);
    sw.coupling = sc.model_frequency_or(sec, "coupling", 0.0);
    sw.coupling_ramp = sc.model_time_or(sec, "coupling_ramp", 0.0);
    const double dc = sc.model_frequency_or("cpb", "delta_c", 0.0);
    sw.resonance = -dressed_cavity_shift(dc, model.g_c);
    SystemModel base = model;
    base.ensembles = {};
    base.delta_c = Schedule::constant(dc);
    const SwapResult r = swap_protocol(base, sw, DensityMatrix::pure(psi), eo);
    out.tables.push_back(timeline_table(r.timeline, mu));
    ResultTable s("summary", {{"fidelity", "1"},
                              {"transferred", "1"},
                              {"predicted_leakage", "1"},
                              {"crossing_rate", mu.freq + "^2"},
                              {"resonance", mu.freq},
                              {"trace_drift", "1"}});
    s.add_row({r.fidelity, r.transferred, r.predicted_leakage, sw.crossing_rate(), sw.resonance,
               max_drift(r.timeline.at("trace"), 1.0)});
    out.tables.push_back(std::move(s));
    out.tables.push_back(stats_table("steps", {{"swap", r.timeline.stats}}));
    out.metadata.warnings = r.warnings;
    return;
  }
  if (protocol != "evolve") throw PreconditionError("[simulation] protocol must be 'evolve' or 'swap', got '" + protocol + "'");

  const bool dissipative = model.kappa > 0.0 || model.gamma_phi > 0.0 || model.gamma_1 > 0.0;
  const bool density = sc.boolean_or("simulation", "density", dissipative);
  if (dissipative && !density) throw PreconditionError("a dissipative model needs density = true");
  ResultTable s("summary", {{"representation", ""}, {"duration", mu.time}, {"norm_drift", "1"},
                            {"excitation_drift", "1"}, {"min_eigenvalue", "1"}});
  if (density) {
    const DensityTimeline tl = evolve_density(model, DensityMatrix::pure(psi), duration, eo);
    out.tables.push_back(timeline_table(tl, mu));
    const auto& me = tl.at("min_eigenvalue");
    s.add_row({std::string("density"), duration, max_drift(tl.at("trace"), 1.0),
               max_drift(tl.at("excitation"), tl.at("excitation").front()), *std::min_element(me.begin(), me.end())});
    out.tables.push_back(std::move(s));
    out.tables.push_back(stats_table("steps", {{"evolve", tl.stats}}));
  } else {
    const KetTimeline tl = evolve_ket(model, psi, duration, eo);
    out.tables.push_back(timeline_table(tl, mu));
    s.add_row({std::string("ket"), duration, max_drift(tl.at("norm"), 1.0),
               max_drift(tl.at("excitation"), tl.at("excitation").front()), 0.0});
    out.tables.push_back(std::move(s));
    out.tables.push_back(stats_table("steps", {{"evolve", tl.stats}}));
  }
}

// ---------------------------------------------------------------------------
// calibrate / gate / sweep

ResultTable residual_table(const std::vector<ResidualSample>& map, const ModelUnits& mu) {
  ResultTable t("residual_map", {{"delta1", mu.freq}, {"T", mu.time}, {"residual1", "rad"}, {"residual2", "rad"}});
  for (const ResidualSample& r : map) t.add_row({r.delta1, r.duration, r.residual1, r.residual2});
  return t;
}

// Calibrates; on failure the residual map becomes a table and the error is
// parked in out.failure. Returns nullopt then.
std::optional<CalibrationResult> try_calibrate(const Scenario& sc, CommandOutput& out) {
  const QuadraticPulse p0 = pulse_from(sc);
  try {
    return calibrate_pulse(p0.delta0 / p0.g_c, p0.g_c, calibration_options_from(sc));
  } catch (const CalibrationError& e) {
    out.tables.push_back(residual_table(e.residual_map(), model_units(sc)));
    out.failure = std::current_exception();
    return std::nullopt;
  }
}

void cmd_calibrate(const Scenario& sc, CommandOutput& out) {
  const ModelUnits mu = model_units(sc);
  const auto cal = try_calibrate(sc, out);
  if (!cal) return;
  ResultTable t("calibration", {{"delta0", mu.freq}, {"delta1", mu.freq}, {"T", mu.time}, {"phi1", "rad"},
                                {"phi2", "rad"}, {"phi1_wrapped", "rad"}, {"phi2_wrapped", "rad"},
                                {"residual1", "rad"}, {"residual2", "rad"}, {"newton_iterations", "1"}});
  const CalibrationResult& c = *cal;
  t.add_row({c.pulse.delta0, c.pulse.delta1, c.pulse.T, c.phases.one.raw, c.phases.two.raw,
             c.phases.one.wrapped + 0.0, c.phases.two.wrapped + 0.0, c.residual1, c.residual2,
             (long long)c.newton_iterations});
  out.tables.push_back(std::move(t));
}

GateOptions gate_options_from(const Scenario& sc) {
  GateOptions go;
  go.evolve = evolve_options_from(sc);
  return go;
}

SystemModel gate_base(const Scenario& sc) {
  SystemModel base;
  base.layout = layout_from(sc);
  base.g_c = sc.g_c_model();
  base.kappa = sc.model_frequency_or("cavity", "kappa", 0.0);
  base.gamma_phi = gamma_phi_from(sc);
  base.gamma_1 = sc.model_frequency_or("cpb", "gamma_1", 0.0);
  return base;
}

GateSequence gate_sequence(const Scenario& sc, const QuadraticPulse& pulse) {
  GateSequence seq;
  seq.pulse = pulse;
  seq.sweep = default_gate_sweep(pulse, sweep_design_from(sc));
  seq.transfer_fraction = sc.number_or("pulses", "transfer_fraction", 1.0);
  return seq;
}

void cmd_gate(const Scenario& sc, CommandOutput& out) {
  const ModelUnits mu = model_units(sc);
  std::vector<std::pair<std::string, QuadraticPulse>> pulses;
  const bool calibrate = sc.boolean_or("pulses", "calibrate", false);
  if (sc.has("pulses", "delta1") && sc.has("pulses", "T")) pulses.emplace_back("raw", pulse_from(sc));
  std::optional<CalibrationResult> cal;
  if (calibrate) {
    cal = try_calibrate(sc, out);
    if (!cal) return;
    pulses.emplace_back("calibrated", cal->pulse);
  }

  const SystemModel base = gate_base(sc);
  const GateOptions go = gate_options_from(sc);
  std::vector<GateReport> reports(pulses.size());
  for (std::size_t i = 0; i < pulses.size(); ++i) reports[i] = two_qubit_gate(base, gate_sequence(sc, pulses[i].second), go);

  ResultTable summary("summary",
                      {{"pulse", ""},           {"delta0", mu.freq},       {"delta1", mu.freq},
                       {"T", mu.time},          {"phi1", "rad"},           {"phi2", "rad"},
                       {"phi1_wrapped", "rad"}, {"phi2_wrapped", "rad"},   {"F_G", "1"},
                       {"F_uniform", "1"},      {"leakage", "1"},          {"trace_deviation", "1"},
                       {"norm_drift", "1"},     {"excitation_drift", "1"}, {"trace_drift", "1"},
                       {"choi_min_eigenvalue", "1"}, {"top_cavity_population", "1"},
                       {"sweep_duration", mu.time},  {"gate_duration", mu.time}, {"runs", "1"}});
  ResultTable basis("basis", {{"pulse", ""}, {"input", ""}, {"fidelity", "1"}, {"p00", "1"}, {"p01", "1"},
                              {"p10", "1"}, {"p11", "1"}});
  std::vector<std::pair<std::string, ode::StepStats>> stats;
  for (std::size_t i = 0; i < pulses.size(); ++i) {
    const auto& [label, p] = pulses[i];
    const GateReport& r = reports[i];
    const GateSequence seq = gate_sequence(sc, p);
    summary.add_row({label, p.delta0, p.delta1, p.T, r.phases.one.raw, r.phases.two.raw,
                     r.phases.one.wrapped + 0.0, r.phases.two.wrapped + 0.0, r.average_fidelity,
                     r.uniform_fidelity, r.leakage, r.trace_deviation, r.norm_drift, r.excitation_drift,
                     r.trace_drift, r.dissipative ? r.min_eigenvalue : 0.0, r.top_cavity_population,
                     seq.step_duration(), r.duration, (long long)r.runs});
    for (std::size_t b = 0; b < 4; ++b) {
      const MatrixXc& o = r.outputs[b];
      basis.add_row({label, basis_label(b), r.basis_fidelity[b], o(0, 0).real(), o(1, 1).real(), o(2, 2).real(),
                     o(3, 3).real()});
    }
    stats.emplace_back(label, r.stats);
  }
  out.tables.push_back(std::move(summary));
  out.tables.push_back(std::move(basis));

  // Phase accumulation through the pulse that drives the gate.
  const QuadraticPulse& shown = pulses.back().second;
  const PhaseTrace tr = phase_trace(shown, std::size_t(sc.integer_or("simulation", "phase_samples", 201)));
  ResultTable ph("phases", {{"time", mu.time}, {"delta_c", mu.freq}, {"phi1", "rad"}, {"phi2", "rad"}});
  const Schedule sched = shown.schedule();
  for (std::size_t i = 0; i < tr.times.size(); ++i) ph.add_row({tr.times[i], sched(tr.times[i]), tr.phi1[i], tr.phi2[i]});
  out.tables.push_back(std::move(ph));
  out.tables.push_back(stats_table("steps", stats));
}

struct LinearFit {
  double slope, intercept, correlation;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i];
  const double mx = sx / n, my = sy / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxx > 0 ? sxy / sxx : 0.0;
  const double r = (sxx > 0 && syy > 0) ? sxy / std::sqrt(sxx * syy) : 0.0;
  return {slope, my - slope * mx, r};
}

std::vector<double> sweep_values(const Scenario& sc) {
  if (sc.has("simulation", "sweep_values")) {
    if (sc.has("simulation", "sweep_log_range"))
      throw PreconditionError("give either sweep_values or sweep_log_range, not both");
    return sc.list("simulation", "sweep_values");
  }
  const auto& r = sc.list("simulation", "sweep_log_range");
  if (r.size() != 3 || !(r[0] > 0.0) || !(r[1] > r[0]) || r[2] < 2.0 || r[2] != std::floor(r[2]))
    throw PreconditionError("sweep_log_range is 'start, stop, points' with 0 < start < stop and points >= 2");
  const std::size_t n = std::size_t(r[2]);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = std::exp(std::log(r[0]) + (std::log(r[1]) - std::log(r[0])) * double(i) / double(n - 1));
  return v;
}

void cmd_sweep(const Scenario& sc, CommandOutput& out) {
  const ModelUnits mu = model_units(sc);
  const std::string param = sc.text_or("simulation", "sweep_parameter", "");
  if (param != "gamma_phi" && param != "kappa")
    throw PreconditionError("sweep_parameter must be 'gamma_phi' or 'kappa', got '" + param + "'");
  const std::vector<double> values = sweep_values(sc);
  for (double v : values)
    if (!(v >= 0.0)) throw PreconditionError("sweep values must be non-negative");

  QuadraticPulse pulse = pulse_from(sc);
  if (sc.boolean_or("pulses", "calibrate", false)) {
    const auto cal = try_calibrate(sc, out);
    if (!cal) return;
    pulse = cal->pulse;
  }
  const GateSequence seq = gate_sequence(sc, pulse);
  const SystemModel base = gate_base(sc);
  const GateOptions go = gate_options_from(sc);
  const unsigned workers = unsigned(sc.integer_or("system", "workers", 0));

  std::vector<GateReport> reports(values.size());
  parallel_for(
      values.size(),
      [&](std::size_t i) {
        SystemModel m = base;
        (param == "gamma_phi" ? m.gamma_phi : m.kappa) = values[i] * base.g_c;
        reports[i] = two_qubit_gate(m, seq, go);
      },
      workers);

  ResultTable t("sweep", {{param + "_over_gc", "1"}, {param, mu.freq}, {"F_G", "1"}, {"infidelity", "1"},
                          {"F_uniform", "1"}, {"leakage", "1"}, {"trace_drift", "1"}});
  std::vector<double> infid;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const GateReport& r = reports[i];
    infid.push_back(1.0 - r.average_fidelity);
    t.add_row({values[i], values[i] * base.g_c, r.average_fidelity, 1.0 - r.average_fidelity, r.uniform_fidelity,
               r.leakage, r.trace_drift});
  }
  out.tables.push_back(std::move(t));
  const LinearFit fit = linear_fit(values, infid);
  ResultTable f("fit", {{"slope", "1"}, {"intercept", "1"}, {"correlation", "1"}, {"points", "1"}});
  f.add_row({fit.slope, fit.intercept, fit.correlation, (long long)values.size()});
  out.tables.push_back(std::move(f));
}

// ---------------------------------------------------------------------------
// estimate

void cmd_estimate(const Scenario& sc, CommandOutput& out) {
  // One single-row table per formula: inputs then results, each column
  // carrying its unit.
  ResultTable fl("flags", {{"formula", ""}, {"flag", ""}});
  for (const EstimateReport& r : estimate_reports(sc)) {
    std::vector<Column> cols;
    std::vector<Cell> row;
    for (const auto* group : {&r.inputs, &r.results})
      for (const Quantity& q : *group) {
        cols.push_back({q.name, q.unit});
        row.emplace_back(q.value);
      }
    ResultTable t(r.formula, std::move(cols));
    t.add_row(std::move(row));
    out.tables.push_back(std::move(t));
    for (const std::string& f : r.flags) {
      fl.add_row({r.formula, f});
      out.metadata.warnings.push_back(r.formula + ": " + f);
    }
  }
  out.tables.push_back(std::move(fl));
}

MoleculeSpec molecule_from(const Scenario& sc) {
  MoleculeSpec m;
  if (sc.has("estimate", "molecule_file")) {
    fs::path p = sc.get("estimate", "molecule_file").text;
    if (p.is_relative() && !sc.source_dir.empty()) p = fs::path(sc.source_dir) / p;
    m = parse_molecule(read_file(p.string()));
  }
  if (sc.has("estimate", "dipole")) m.dipole = sc.si("estimate", "dipole");
  if (sc.has("estimate", "rotational")) m.rotational = sc.si("estimate", "rotational");
  if (sc.has("estimate", "spin_rotation")) m.spin_rotation = sc.si("estimate", "spin_rotation");
  if (sc.has("estimate", "hyperfine")) m.hyperfine = sc.si("estimate", "hyperfine");
  if (sc.has("estimate", "mass")) m.mass = sc.si("estimate", "mass");
  if (sc.has("estimate", "nuclear_spin")) m.nuclear_spin = sc.number("estimate", "nuclear_spin");
  return m;
}

double hz(double omega) { return omega / (2.0 * k::pi); }

}  // namespace

// ---------------------------------------------------------------------------

Scenario load_scenario(const std::string& path, Command command, std::optional<long long> seed) {
  const std::string text = read_file(path);
  Scenario sc = parse_scenario(text, command, seed);
  sc.source_dir = fs::path(path).parent_path().string();
  return sc;
}

SpaceLayout layout_from(const Scenario& sc) {
  const Index ens = dim_or(sc, "ensemble_dim", 3);
  return SpaceLayout::hybrid(dim_or(sc, "cavity_dim", 4), dim_or(sc, "ensemble1_dim", ens),
                             dim_or(sc, "ensemble2_dim", ens));
}

SystemModel model_from(const Scenario& sc) {
  SystemModel m;
  m.layout = layout_from(sc);
  m.g_c = sc.g_c_model();
  m.kappa = sc.model_frequency_or("cavity", "kappa", 0.0);
  m.gamma_phi = gamma_phi_from(sc);
  m.gamma_1 = sc.model_frequency_or("cpb", "gamma_1", 0.0);
  const double duration = sc.model_time_or("simulation", "duration", std::numeric_limits<double>::infinity());
  if (sc.has("pulses", "delta0") && sc.has("pulses", "delta1") && sc.has("pulses", "T")) {
    if (sc.has("cpb", "delta_c")) throw PreconditionError("give either [cpb] delta_c or a [pulses] pulse, not both");
    const QuadraticPulse p = pulse_from(sc);
    p.validate();
    m.delta_c = p.schedule();
  } else {
    m.delta_c = Schedule::constant(sc.model_frequency_or("cpb", "delta_c", 0.0));
  }
  for (int i = 0; i < 2; ++i) {
    const std::string sec = "ensemble." + std::to_string(i + 1);
    EnsembleDrive& d = m.ensembles[std::size_t(i)];
    d.detuning = ensemble_detuning(sc, sec, duration);
    const double g = sc.model_frequency_or(sec, "coupling", 0.0);
    const double ramp = sc.model_time_or(sec, "coupling_ramp", 0.0);
    if (ramp > 0.0) {
      SweepSpec env;
      env.coupling = g;
      env.coupling_ramp = ramp;
      env.duration = duration;
      env.steepness = sc.number_or(sec, "steepness", 1.5);
      if (!std::isfinite(duration) || 2.0 * ramp > duration)
        throw PreconditionError("[" + sec + "] coupling ramps must fit inside [simulation] duration");
      d.coupling = env.coupling_envelope();
    } else {
      d.coupling = Schedule::constant(g);
    }
  }
  m.validate();
  return m;
}

EvolveOptions evolve_options_from(const Scenario& sc) {
  EvolveOptions o;
  const std::string method = sc.text_or("simulation", "method", "rk45");
  if (method == "rk45") o.method = Method::rk45_adaptive;
  else if (method == "rk4") o.method = Method::rk4_fixed;
  else throw PreconditionError("[simulation] method must be 'rk45' or 'rk4', got '" + method + "'");
  o.rel_tol = sc.number_or("simulation", "rel_tol", o.rel_tol);
  o.abs_tol = sc.number_or("simulation", "abs_tol", o.abs_tol);
  o.max_step = sc.model_time_or("simulation", "max_step", o.max_step);
  o.fixed_step = sc.model_time_or("simulation", "fixed_step", o.fixed_step);
  if (sc.has("simulation", "duration")) {
    const double d = sc.model_time("simulation", "duration");
    const long long n = sc.integer_or("simulation", "samples", 201);
    if (n < 2) throw PreconditionError("[simulation] samples must be at least 2");
    for (long long i = 0; i < n; ++i) o.sample_times.push_back(d * double(i) / double(n - 1));
    o.sample_times.back() = d;
  }
  o.validate();
  return o;
}

Ket initial_state_from(const Scenario& sc, const SpaceLayout& layout) {
  const std::vector<double>& occ = sc.list("simulation", "initial");
  if (occ.size() != 4) throw PreconditionError("[simulation] initial lists the occupations of cavity, ensemble1, ensemble2, cpb");
  std::vector<Index> digits;
  const Factor order[4] = {Factor::cavity, Factor::ensemble1, Factor::ensemble2, Factor::cpb};
  for (std::size_t i = 0; i < 4; ++i) {
    if (occ[i] != std::floor(occ[i]) || occ[i] < 0.0 || occ[i] >= double(layout.dim(order[i])))
      throw PreconditionError("initial occupation " + format_number(occ[i]) + " of " + std::string(to_string(order[i])) +
                              " is outside its truncation");
    digits.push_back(Index(occ[i]));
  }
  VectorXc psi = VectorXc::Zero(layout.total_dim());
  const double w = sc.number_or("simulation", "initial_vacuum_weight", 0.0);
  if (w < 0.0 || w > 1.0) throw PreconditionError("initial_vacuum_weight must lie in [0, 1]");
  psi(layout.composite(digits)) += std::sqrt(1.0 - w);
  psi(0) += std::sqrt(w);
  if (psi.norm() == 0.0) throw PreconditionError("initial state vanishes");
  psi.normalize();
  return Ket(layout, psi);
}

QuadraticPulse pulse_from(const Scenario& sc) {
  QuadraticPulse p;
  p.g_c = sc.g_c_model();
  p.delta0 = sc.model_frequency("pulses", "delta0");
  p.delta1 = sc.model_frequency_or("pulses", "delta1", 0.0);
  p.T = sc.model_time_or("pulses", "T", 0.0);
  return p;
}

CalibrationOptions calibration_options_from(const Scenario& sc) {
  CalibrationOptions o;
  o.phi1_target = sc.number_or("pulses", "phi1_target", o.phi1_target);
  o.branch = long(sc.integer_or("pulses", "branch", o.branch));
  if (sc.has("pulses", "delta1_max")) o.delta1_max = sc.model_frequency("pulses", "delta1_max") / sc.g_c_model();
  return o;
}

SweepDesign sweep_design_from(const Scenario& sc) {
  SweepDesign d;
  const double gc = sc.g_c_model();
  if (sc.has("pulses", "sweep_coupling")) d.coupling_per_gc = sc.model_frequency("pulses", "sweep_coupling") / gc;
  d.span_per_coupling = sc.number_or("pulses", "sweep_span", d.span_per_coupling);
  d.leakage = sc.number_or("pulses", "sweep_leakage", d.leakage);
  d.steepness = sc.number_or("pulses", "sweep_steepness", d.steepness);
  if (sc.has("pulses", "sweep_ramp")) d.ramp_per_gc = sc.model_time("pulses", "sweep_ramp") * gc;
  return d;
}

std::vector<EstimateReport> estimate_reports(const Scenario& sc) {
  const std::string E = "estimate";
  const MoleculeSpec mol = molecule_from(sc);
  const UnitSystem u = UnitSystem::si();
  std::vector<EstimateReport> out;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) throw PreconditionError(what);
  };

  // Cavity coupling.
  double g = 0.0;
  CavitySpec cav;
  if (sc.has("cavity", "omega") || sc.has("cavity", "gap") || sc.has("cavity", "length")) {
    need(sc.has("cavity", "omega") && sc.has("cavity", "gap") && sc.has("cavity", "length"),
         "the field estimate needs [cavity] omega, gap and length");
    need(mol.dipole > 0.0, "the vacuum Rabi estimate needs a dipole moment");
    cav.omega = sc.si("cavity", "omega");
    cav.gap = sc.si("cavity", "gap");
    cav.length = sc.si("cavity", "length");
    const double ec = field_per_photon(cav, u);
    g = vacuum_rabi(mol.dipole, cav, u);
    out.push_back({"vacuum_rabi",
                   {{"dipole", mol.dipole / k::debye, "D"},
                    {"omega_c", hz(cav.omega), "2pi*Hz"},
                    {"gap", cav.gap, "m"},
                    {"length", cav.length, "m"}},
                   {{"E_c", ec, "V/m"}, {"g", hz(g), "2pi*Hz"}},
                   {}});
  }

  // Molecule number.
  double count = 0.0;
  if (sc.has(E, "count")) {
    count = sc.number(E, "count");
  } else if (sc.has(E, "density") && cav.gap > 0.0) {
    const double lambda = sc.has(E, "wavelength") ? sc.si(E, "wavelength") : 2.0 * k::pi * k::c / cav.omega;
    count = molecule_count(sc.si(E, "density"), cav.gap, lambda);
    out.push_back({"molecule_count",
                   {{"density", sc.si(E, "density") / k::per_cm3, "cm^-3"}, {"gap", cav.gap, "m"}, {"wavelength", lambda, "m"}},
                   {{"N", count, "1"}},
                   {}});
  }

  // Raman-assisted coupling.
  double gm = 0.0;
  if (g > 0.0 && (count > 0.0 || sc.has(E, "count_range"))) {
    const double ratio = sc.number_or(E, "raman_ratio", 1.0);
    const double delta = sc.si_or(E, "raman_delta", 1.0);
    const double om1 = sc.si_or(E, "raman_omega1", 0.0), om2 = sc.si_or(E, "raman_omega2", 0.0);
    EstimateReport r{"raman_couplings", {{"g", hz(g), "2pi*Hz"}, {"Omega_over_Delta", ratio, "1"}}, {}, {}};
    const RamanCouplings rc = raman_couplings(g, ratio * delta, om1, om2, delta, count);
    r.results.push_back({"g_eff", hz(rc.g_eff), "2pi*Hz"});
    if (sc.has(E, "raman_delta")) r.results.push_back({"Omega_eff", hz(rc.omega_eff), "2pi*Hz"});
    if (count > 0.0) {
      r.inputs.push_back({"N", count, "1"});
      r.results.push_back({"g_m", hz(rc.g_m), "2pi*Hz"});
      gm = rc.g_m;
    }
    if (sc.has(E, "count_range")) {
      const auto& range = sc.list(E, "count_range");
      need(range.size() == 2 && range[0] > 0.0 && range[1] >= range[0], "count_range is 'N_min, N_max'");
      r.inputs.push_back({"N_min", range[0], "1"});
      r.inputs.push_back({"N_max", range[1], "1"});
      r.results.push_back({"g_m_at_N_min", hz(std::sqrt(range[0]) * rc.g_eff), "2pi*Hz"});
      r.results.push_back({"g_m_at_N_max", hz(std::sqrt(range[1]) * rc.g_eff), "2pi*Hz"});
    }
    if (!rc.valid) r.flags.push_back("Raman limit: |Delta| does not exceed every drive");
    out.push_back(std::move(r));
  }

  // Rotational structure.
  if (mol.rotational > 0.0) {
    const int nmax = int(sc.integer_or(E, "n_max", 1));
    EstimateReport r{"rotational_spectrum",
                     {{"B", hz(mol.rotational), "2pi*Hz"}, {"gamma_sr", hz(mol.spin_rotation), "2pi*Hz"},
                      {"b", hz(mol.hyperfine), "2pi*Hz"}, {"I", mol.nuclear_spin, "1"}},
                     {},
                     {}};
    for (const RotationalLevel& lv : rotational_spectrum(mol, nmax)) {
      std::ostringstream name;
      name << "E_N" << lv.N << "_J" << format_number(lv.J);
      if (lv.F >= 0.0) name << "_F" << format_number(lv.F);
      r.results.push_back({name.str(), hz(lv.energy), "2pi*Hz"});
    }
    out.push_back(std::move(r));
  }

  // Collisions.
  double range = 0.0;
  if (mol.dipole > 0.0 && mol.rotational > 0.0 && mol.mass > 0.0) {
    const VanDerWaals vdw = c6_and_range(mol.dipole, mol.rotational, mol.mass, u);
    range = vdw.range;
    out.push_back({"c6_and_range",
                   {{"dipole", mol.dipole / k::debye, "D"}, {"B", hz(mol.rotational), "2pi*Hz"}, {"mass", mol.mass / k::amu, "amu"}},
                   {{"C6", vdw.c6, "J*m^6"}, {"R_star", vdw.range / k::bohr, "a_B"},
                    {"T_star", swave_threshold(vdw.range, mol.mass, u), "K"}},
                   {}});
  }
  const bool thermal = sc.has(E, "density") && sc.has(E, "temperature") && mol.mass > 0.0;
  if (thermal) {
    const double n = sc.si(E, "density"), T = sc.si(E, "temperature");
    double a = range;
    std::vector<std::string> flags;
    if (sc.has(E, "scattering_length")) a = sc.si(E, "scattering_length");
    else if (a > 0.0) flags.push_back("scattering length taken as R_star");
    if (a > 0.0) {
      const Rate rate = collision_rate_swave(a, n, T, mol.mass, u);
      if (!rate.in_regime) flags.push_back("T above the s-wave threshold of the scattering length");
      out.push_back({"collision_rate_swave",
                     {{"scattering_length", a / k::bohr, "a_B"}, {"density", n / k::per_cm3, "cm^-3"},
                      {"temperature", T, "K"}, {"mass", mol.mass / k::amu, "amu"}},
                     {{"v_rel", mean_relative_speed(T, mol.mass, u), "m/s"}, {"gamma_col", hz(rate.value), "2pi*Hz"}},
                     flags});
    }
    if (sc.has(E, "a00") && sc.has(E, "a01")) {
      const double a00 = sc.si(E, "a00"), a01 = sc.si(E, "a01");
      const Rate rate = dephasing_rate_swave(a00, a01, n, T, mol.mass, u);
      EstimateReport r{"dephasing_rate_swave",
                       {{"a00", a00 / k::bohr, "a_B"}, {"a01", a01 / k::bohr, "a_B"}},
                       {{"gamma10", hz(rate.value), "2pi*Hz"}},
                       {}};
      if (!rate.in_regime) r.flags.push_back("T above the s-wave threshold of a00 - a01");
      out.push_back(std::move(r));

      if (sc.has(E, "mc_samples")) {
        const long long samples = sc.integer(E, "mc_samples");
        const long long seed = sc.integer(E, "seed");
        need(samples > 0, "mc_samples must be positive");
        need(seed >= 0, "seed must be non-negative");
        // s-wave amplitudes f = -a, no inelastic channel.
        ScatteringAmplitudes amps;
        amps.elastic00 = [a00](const Kinematics&) { return std::complex<double>(-a00, 0.0); };
        amps.elastic01 = [a01](const Kinematics&) { return std::complex<double>(-a01, 0.0); };
        amps.inelastic00 = [](const Kinematics&) { return std::complex<double>(); };
        amps.inelastic01 = amps.inelastic00;
        const MonteCarloEstimate mc = gamma10_montecarlo(amps, n, T, mol.mass, std::size_t(samples), std::uint64_t(seed));
        const double z = mc.standard_error > 0.0 ? (mc.mean - rate.value) / mc.standard_error : 0.0;
        out.push_back({"gamma10_montecarlo",
                       {{"samples", double(samples), "1"}, {"seed", double(seed), "1"}},
                       {{"gamma10", hz(mc.mean), "2pi*Hz"},
                        {"standard_error", hz(mc.standard_error), "2pi*Hz"},
                        {"closed_form", hz(rate.value), "2pi*Hz"},
                        {"z_score", z, "1"}},
                       {}});
      }
    } else if (sc.has(E, "mc_samples")) {
      throw PreconditionError("the Monte Carlo estimate needs a00 and a01");
    }
  }
  if (sc.has(E, "hot_temperature")) {
    need(sc.has(E, "density") && range > 0.0, "the unitarity estimate needs density and a molecule with dipole, B and mass");
    const double n = sc.si(E, "density"), T = sc.si(E, "hot_temperature");
    const Rate rate = collision_rate_unitarity(n, T, mol.mass, range, u);
    EstimateReport r{"collision_rate_unitarity",
                     {{"density", n / k::per_cm3, "cm^-3"}, {"temperature", T, "K"}, {"R_star", range / k::bohr, "a_B"}},
                     {{"gamma_col", hz(rate.value), "2pi*Hz"}, {"partial_waves", double(rate.partial_waves), "1"}},
                     {}};
    if (!rate.in_regime) r.flags.push_back("T below the p-wave barrier: only the s-wave term contributes");
    out.push_back(std::move(r));
  }

  // Gate error from the trap.
  if (sc.has(E, "trap_omega")) {
    need((sc.has(E, "trap_temperature") || sc.has(E, "temperature")) && mol.mass > 0.0 && cav.gap > 0.0,
         "the gate error budget needs a temperature, a molecule mass and the cavity gap");
    need(sc.has("cavity", "kappa"), "the gate error budget needs [cavity] kappa");
    EnsembleSpec ens;
    ens.temperature = sc.has(E, "trap_temperature") ? sc.si(E, "trap_temperature") : sc.si(E, "temperature");
    ens.trap_omega = sc.si(E, "trap_omega");
    ens.mismatch = sc.number_or(E, "trap_mismatch", 0.0);
    ens.alpha = sc.number_or(E, "alpha", 1.0);
    const double G = sc.has(E, "collective_coupling") ? sc.si(E, "collective_coupling") : gm;
    need(G > 0.0, "the gate error budget needs collective_coupling or a computed g_m");
    const double kappa = sc.si("cavity", "kappa");
    const ErrorBudget b = gate_error_budget(ens, G, kappa, cav.gap, mol.mass, u);
    out.push_back({"gate_error_budget",
                   {{"collective_coupling", hz(G), "2pi*Hz"}, {"kappa", hz(kappa), "2pi*Hz"},
                    {"temperature", ens.temperature, "K"}, {"trap_omega", hz(ens.trap_omega), "2pi*Hz"},
                    {"trap_mismatch", ens.mismatch, "1"}, {"alpha", ens.alpha, "1"}},
                   {{"epsilon_thermal", b.thermal, "1"}, {"epsilon_mismatch", b.mismatch, "1"},
                    {"epsilon", b.total, "1"}, {"Delta_star", hz(b.optimal_detuning), "2pi*Hz"}},
                   {}});
  }
  if (out.empty()) throw PreconditionError("[estimate] names no quantity that can be evaluated");
  return out;
}

CommandOutput run_command(Command command, const Scenario& sc, const std::string& scenario_text) {
  CommandOutput out;
  out.metadata.command = std::string(to_string(command));
  out.metadata.version = HYBRIDQ_VERSION;
  out.metadata.scenario_hash = fnv1a_hex(scenario_text);
  if (sc.has("estimate", "seed")) out.metadata.seed = sc.integer("estimate", "seed");
  switch (command) {
    case Command::simulate: cmd_simulate(sc, out); break;
    case Command::gate: cmd_gate(sc, out); break;
    case Command::calibrate: cmd_calibrate(sc, out); break;
    case Command::estimate: cmd_estimate(sc, out); break;
    case Command::sweep: cmd_sweep(sc, out); break;
    case Command::any: throw PreconditionError("no command given");
  }
  return out;
}

std::vector<std::string> write_outputs(const CommandOutput& out, const std::string& dir, OutputFormat format) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw PreconditionError("cannot create output directory '" + dir + "': " + ec.message());
  std::vector<std::string> written;
  auto write = [&](const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!(f << text)) throw PreconditionError("cannot write '" + p.string() + "'");
    written.push_back(p.string());
  };
  if (format != OutputFormat::json)
    for (const ResultTable& t : out.tables) write(fs::path(dir) / (out.metadata.command + "_" + t.name() + ".csv"), t.to_csv());
  if (format != OutputFormat::csv) write(fs::path(dir) / (out.metadata.command + ".json"), results_to_json(out.metadata, out.tables));
  return written;
}

}  // namespace hybridq
