// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hybridq/commands.hpp"
#include "hybridq/constants.hpp"
#include "hybridq/estimate.hpp"
#include "hybridq/parallel.hpp"
#include "hybridq/protocols.hpp"

using namespace hybridq;
namespace fs = std::filesystem;
namespace k = hybridq::constants;

namespace {

constexpr double pi = k::pi;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

// Conservation figures collected by the other checks for criterion 5.
struct Drift {
  double norm = 0.0, excitation = 0.0, trace = 0.0;
  int unitary_runs = 0, lindblad_runs = 0;
} drift;

void report(int id, const std::string& title, const std::function<Outcome()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("criterion %d: %s  %s | %s | %.2f s\n", id, o.pass ? "PASS" : "FAIL", title.c_str(), o.detail.c_str(),
              secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string source_path(const std::string& rel) { return std::string(HYBRIDQ_SOURCE_DIR) + "/" + rel; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Fit {
  double slope, intercept, correlation;
};
Fit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  const double cxx = sxx - sx * sx / n, cyy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  const double slope = cxy / cxx;
  return {slope, (sy - slope * sx) / n, cxy / std::sqrt(cxx * cyy)};
}

SystemModel unit_coupling_base() {
  SystemModel m;
  m.g_c = 1.0;
  return m;
}

// ---------------------------------------------------------------------------

Outcome phase_conditions() {
  const auto t0 = std::chrono::steady_clock::now();
  const PulsePhases p = pulse_phases({30.0, 0.44, 44.79, 1.0});
  const double secs = seconds_since(t0);
  // regression constants of the adaptive quadrature
  const double phi1 = -10.898906019981325, phi2 = -18.71684149032119;
  const double e1 = std::abs(p.one.wrapped - pi / 2), e2 = std::abs(p.two.wrapped);
  const bool pinned = std::abs(p.one.raw - phi1) < 1e-9 && std::abs(p.two.raw - phi2) < 1e-9;
  return {e1 < 0.25 && e2 < 0.2 && pinned && secs < 1.0,
          fmt("phi1 = %.12f (mod 2pi %.6f, off pi/2 by %.4f < 0.25), phi2 = %.12f (mod 2pi %.6f < 0.2), "
              "pinned %s, %.3f s < 1 s",
              p.one.raw, p.one.wrapped, e1, p.two.raw, p.two.wrapped, pinned ? "yes" : "no", secs)};
}

GateReport calibrated_gate;

Outcome gate_map() {
  const auto t0 = std::chrono::steady_clock::now();
  const CalibrationResult cal = calibrate_pulse(30.0, 1.0);
  const GateSequence seq{default_gate_sweep(cal.pulse), cal.pulse};
  calibrated_gate = two_qubit_gate(unit_coupling_base(), seq);
  const double secs = seconds_since(t0);
  const GateReport& r = calibrated_gate;
  drift.norm = std::max(drift.norm, r.norm_drift);
  drift.excitation = std::max(drift.excitation, r.excitation_drift);
  drift.unitary_runs += int(r.runs);
  double worst = 1.0;
  for (double f : r.basis_fidelity) worst = std::min(worst, f);
  return {worst >= 0.995 && r.average_fidelity >= 0.99 && secs < 60.0,
          fmt("calibrated delta1 = %.6f, T = %.6f; basis fidelities %.7f %.7f %.7f %.7f (min %.7f >= 0.995), "
              "F_G = %.7f >= 0.99, %.1f s < 60 s",
              cal.pulse.delta1, cal.pulse.T, r.basis_fidelity[0], r.basis_fidelity[1], r.basis_fidelity[2],
              r.basis_fidelity[3], worst, r.average_fidelity, secs)};
}

Outcome decoherence_scaling() {
  const CalibrationResult cal = calibrate_pulse(30.0, 1.0);
  const GateSequence seq{default_gate_sweep(cal.pulse), cal.pulse};
  GateOptions go;
  go.evolve.rel_tol = 1e-8;
  go.evolve.abs_tol = 1e-10;
  std::vector<double> rates(5);
  for (std::size_t i = 0; i < rates.size(); ++i) rates[i] = std::pow(10.0, -4.0 + 0.5 * double(i));
  std::vector<double> infid(rates.size());
  std::vector<GateReport> reps(rates.size());
  parallel_for(rates.size(), [&](std::size_t i) {
    SystemModel m = unit_coupling_base();
    m.gamma_phi = rates[i];
    reps[i] = two_qubit_gate(m, seq, go);
    infid[i] = 1.0 - reps[i].average_fidelity;
  });
  for (const GateReport& r : reps) {
    drift.trace = std::max(drift.trace, r.trace_drift);
    drift.lindblad_runs += int(r.runs);
  }
  const Fit f = linear_fit(rates, infid);
  std::string pts;
  for (std::size_t i = 0; i < rates.size(); ++i) pts += fmt("%s%.0e:%.4e", i ? " " : "", rates[i], infid[i]);
  return {f.correlation > 0.99, fmt("1-F_G vs 1/(g_c T2) [%s]; slope %.4f, intercept %.3e, correlation %.6f > 0.99",
                                    pts.c_str(), f.slope, f.intercept, f.correlation)};
}

Outcome leakage_suppression() {
  const CalibrationResult cal = calibrate_pulse(30.0, 1.0);
  const double phi2_off = std::abs(cal.phases.two.wrapped);
  const double leak = calibrated_gate.leakage;
  return {phi2_off < 1e-3 && leak < 1e-3,
          fmt("phi2 mod 2pi = %.2e (within 1e-3 of 0); |20>+|02> population from |11> = %.3e < 1e-3", phi2_off,
              leak)};
}

// Linear sweep through resonance at 2 pi g^2 / rate = x, coupling switched
// on and off by tanh ramps over the outer 40% of a +-120 g window.
double lz_transfer(double x, double& norm_drift, double& exc_drift) {
  const double g = 0.05, W = 6.0;
  const double rate = 2 * pi * g * g / x;
  SweepSpec s;
  s.shape = SweepShape::linear;
  s.delta_start = W;
  s.delta_end = -W;
  s.duration = 2 * W / rate;
  s.coupling = g;
  s.coupling_ramp = 0.4 * s.duration;
  s.steepness = 1.5;
  SystemModel base;
  base.layout = SpaceLayout::hybrid(2, 2);
  const SystemModel m = sweep_model(base, s);
  EvolveOptions o;
  o.sample_times.resize(101);
  for (std::size_t i = 0; i < o.sample_times.size(); ++i) o.sample_times[i] = s.duration * double(i) / 100.0;
  o.sample_times.back() = s.duration;
  const auto tl = evolve_ket(m, Ket::basis(m.layout, m.layout.composite(std::vector<Index>{1, 0, 0, 0})),
                             s.duration, o);
  norm_drift = exc_drift = 0.0;
  for (double n : tl.at("norm")) norm_drift = std::max(norm_drift, std::abs(n - 1.0));
  for (double e : tl.at("excitation")) exc_drift = std::max(exc_drift, std::abs(e - 1.0));
  return tl.at("n_ensemble1").back();
}

Outcome landau_zener() {
  const int n = 10;
  std::vector<double> x(n), p(n), nd(n), ed(n);
  for (int i = 0; i < n; ++i) x[i] = 0.05 * std::pow(100.0, double(i) / (n - 1));
  parallel_for(n, [&](std::size_t i) { p[i] = lz_transfer(x[i], nd[i], ed[i]); });
  double worst = 0.0;
  std::string pts;
  for (int i = 0; i < n; ++i) {
    const double err = std::abs(p[i] - (1 - std::exp(-x[i])));
    worst = std::max(worst, err);
    pts += fmt("%s%.3g:%.2e", i ? " " : "", x[i], err);
    drift.norm = std::max(drift.norm, nd[i]);
    drift.excitation = std::max(drift.excitation, ed[i]);
    ++drift.unitary_runs;
  }
  return {worst < 1e-3, fmt("2pi g^2/rate from 0.05 to 5 (P_LZ %.3f to %.4f); |P - (1-exp(-2pi g^2/rate))| [%s]; "
                            "max %.2e < 1e-3",
                            std::exp(-x[0]), std::exp(-x[n - 1]), pts.c_str(), worst)};
}

Outcome conservation() {
  // Lindblad runs of the swap protocol add to the sweep's gate runs.
  SystemModel base = unit_coupling_base();
  base.layout = SpaceLayout::hybrid(3, 2);
  base.delta_c = Schedule::constant(-30.0);
  base.kappa = 1e-4;
  base.gamma_phi = 1e-3;
  SweepSpec s;
  s.resonance = -dressed_cavity_shift(-30.0, 1.0);
  s.delta_start = s.resonance + 4.0;
  s.delta_end = s.resonance - 4.0;
  s.duration = 600.0;
  s.coupling = 0.2;
  s.coupling_ramp = 30.0;
  VectorXc v = VectorXc::Zero(base.layout.total_dim());
  v(0) = 0.6;
  v(base.layout.composite(std::vector<Index>{1, 0, 0, 0})) = 0.8;
  EvolveOptions o;
  o.sample_times.resize(201);
  for (std::size_t i = 0; i < o.sample_times.size(); ++i) o.sample_times[i] = 3.0 * double(i);
  const SwapResult r = swap_protocol(base, s, DensityMatrix::pure(Ket(base.layout, v)), o);
  for (double t : r.timeline.at("trace")) drift.trace = std::max(drift.trace, std::abs(t - 1.0));
  ++drift.lindblad_runs;
  return {drift.norm < 1e-8 && drift.excitation < 1e-7 && drift.trace < 1e-8,
          fmt("%d unitary runs: max norm drift %.2e < 1e-8, max excitation drift %.2e < 1e-7; "
              "%d Lindblad runs: max trace drift %.2e < 1e-8",
              drift.unitary_runs, drift.norm, drift.excitation, drift.lindblad_runs, drift.trace)};
}

MoleculeSpec fixture(const std::string& name) { return parse_molecule(slurp(source_path("data/molecules/" + name))); }

Outcome estimators() {
  const auto t0 = std::chrono::steady_clock::now();
  const CavitySpec cav{2 * pi * 20e9, 10e-6, 1.5e-2, 2 * pi * 1e4};
  const double g = vacuum_rabi(5 * k::debye, cav);
  const double gm_lo = raman_couplings(g, 1, 1, 1, 1, 1e4).g_m, gm_hi = raman_couplings(g, 1, 1, 1, 1, 1e6).g_m;
  const MoleculeSpec cacl = fixture("cacl.mol"), caf = fixture("caf.mol");
  const double R = c6_and_range(cacl.dipole, cacl.rotational, cacl.mass).range / k::bohr;
  const double col = collision_rate_swave(780 * k::bohr, 1e18, 1e-6, cacl.mass).value / (2 * pi);
  const double uni = collision_rate_unitarity(1e18, 1e-3, cacl.mass, R * k::bohr).value / (2 * pi);
  EnsembleSpec e;
  e.temperature = 1e-3;
  e.trap_omega = 2 * pi * 5e4;
  e.mismatch = 0.1;
  e.alpha = 1.0;
  const double eps = gate_error_budget(e, 2 * pi * 1e7, 2 * pi * 1e4, 10e-6, caf.mass).total;
  const double secs = seconds_since(t0);

  struct Sub {
    const char* what;
    bool ok;
  };
  const double gmlo = gm_lo / (2 * pi * 1e6), gmhi = gm_hi / (2 * pi * 1e6);
  const Sub subs[] = {{"g", g / (2 * pi) >= 5e3 && g / (2 * pi) <= 15e3},
                      {"g_m", gmlo >= 1 && gmlo <= 10 && gmhi >= 1 && gmhi <= 10},
                      {"R_*", std::abs(R - 780) / 780 < 0.2},
                      {"gamma_col", std::abs(col - 150) / 150 < 0.5},
                      {"unitarity", uni > 350 && uni < 1400},
                      {"epsilon", eps < 0.02},
                      {"runtime", secs < 1.0}};
  bool ok = true;
  std::string failed;
  for (const Sub& s : subs)
    if (!s.ok) {
      ok = false;
      failed += std::string(" ") + s.what;
    }
  std::string detail = fmt(
      "g/2pi = %.1f Hz in [5, 15] kHz; g_m/2pi = %.3f MHz (N=1e4) and %.3f MHz (N=1e6) at g_eff = g/2 for [1, 10] MHz; "
      "R_*(CaCl) = %.1f a_B within 20%% of 780; gamma_col/2pi = %.1f Hz within 50%% of 150; "
      "unitarity/2pi = %.1f Hz within x2 of 700; epsilon = %.5f < 0.02; %.4f s < 1 s",
      g / (2 * pi), gmlo, gmhi, R, col, uni, eps, secs);
  if (!ok) detail += "; failed:" + failed;
  if (gmlo < 1)
    detail += fmt(
        "; g_m = sqrt(N) g Omega / 2 Delta is at most sqrt(N) g / 2 = %.3f MHz at N = 1e4 while Delta >= Omega holds,"
        " so 1 MHz there needs g_eff = g (Omega = 2 Delta, outside the Raman regime); the quoted 1 to 10 MHz equals"
        " sqrt(N) g = %.3f to %.3f MHz",
        gmlo, 100 * g / (2 * pi * 1e6), 1000 * g / (2 * pi * 1e6));
  return {ok, detail};
}

Outcome monte_carlo() {
  const double da = 780 * k::bohr, n = 1e18, T = 1e-6, m = 75 * k::amu;
  auto constant = [](double f) { return [f](const Kinematics&) { return std::complex<double>(f); }; };
  const ScatteringAmplitudes amps{constant(-da), constant(0.0), constant(0.0), constant(0.0)};
  const double exact = 8 * pi * da * da * n * mean_relative_speed(T, m);
  const auto mc = gamma10_montecarlo(amps, n, T, m, 100000, 12345);
  const double z = (mc.mean - exact) / mc.standard_error;

  std::vector<double> lx, ly;
  for (std::size_t s : {10000ul, 100000ul, 1000000ul, 10000000ul}) {
    const auto r = gamma10_montecarlo(amps, n, T, m, s, 777);
    lx.push_back(std::log10(double(s)));
    ly.push_back(std::log10(r.standard_error));
  }
  const Fit f = linear_fit(lx, ly);
  return {std::abs(z) < 3 && std::abs(f.slope + 0.5) < 0.1,
          fmt("1e5 samples: %.3f +- %.3f vs 8 pi da^2 n v = %.3f s^-1 (%.2f standard errors < 3); "
              "log-log slope of the standard error over 1e4..1e7 samples %.4f (-0.5 +- 0.1)",
              mc.mean, mc.standard_error, exact, std::abs(z), f.slope)};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HYBRIDQ_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "hybridq_acceptance_determinism";
  fs::remove_all(root);
  struct Case {
    const char* command;
    const char* scenario;
  };
  const Case cases[] = {{"estimate", "estimate_caf.scn"}, {"gate", "gate.scn"}, {"simulate", "swap.scn"},
                        {"calibrate", "calibrate.scn"}};
  int files = 0;
  std::string bad;
  for (const Case& c : cases) {
    for (const char* run : {"a", "b"}) {
      const fs::path dir = root / c.command / run;
      fs::create_directories(dir);
      const int rc = run_cli(std::string(c.command) + " " + source_path(std::string("scenarios/") + c.scenario) +
                             " --seed 2024 --format both --out " + dir.string());
      if (rc != 0) bad += fmt(" %s exit %d;", c.command, rc);
    }
    for (const auto& f : fs::directory_iterator(root / c.command / "a")) {
      const fs::path other = root / c.command / "b" / f.path().filename();
      ++files;
      if (!fs::exists(other) || slurp(f.path()) != slurp(other)) bad += " " + f.path().filename().string();
    }
  }
  fs::remove_all(root);
  return {bad.empty() && files > 0,
          bad.empty() ? fmt("%d CSV/JSON files from estimate, gate, simulate and calibrate byte-identical over two runs "
                            "with --seed 2024",
                            files)
                      : "differences:" + bad};
}

}  // namespace

int main() {
  report(1, "phase conditions of the printed pulse", phase_conditions);
  report(2, "gate map of the calibrated pulse", gate_map);
  report(3, "infidelity linear in 1/(g_c T2)", decoherence_scaling);
  report(4, "leakage into |20>, |02>", leakage_suppression);
  report(6, "Landau-Zener transfer", landau_zener);
  report(5, "conservation", conservation);
  report(7, "closed-form estimators", estimators);
  report(8, "Monte Carlo dephasing rate", monte_carlo);
  report(9, "CLI determinism", determinism);
  std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
