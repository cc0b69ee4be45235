#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hybridq/error.hpp"
#include "hybridq/fidelity.hpp"
#include "hybridq/integrate.hpp"
#include "hybridq/model.hpp"
#include "hybridq/schedule.hpp"

namespace hybridq {

// ---------------------------------------------------------------------------
// Dynamical phases of the dressed cavity-CPB ladder.

// -int_{t0}^{t1} (d(t) + sqrt(d(t)^2 + 4 n g_c^2)) / 2 dt for the detuning
// schedule d, adaptive Gauss-Kronrod to abs tol 1e-9. Without bounds the
// whole schedule domain is used.
double phase_functional(const Schedule& delta_c, double n, double g_c);
double phase_functional(const Schedule& delta_c, double n, double g_c, double t0, double t1);

// d phi_n / d delta1 for a quadratic pulse (the integrand of 1/2 (1 + d/sqrt(...))).
double phase_functional_offset_derivative(const Schedule& delta_c, double n, double g_c);

// delta_c(t) = -delta0 (2t/T - 1)^2 - delta1
struct QuadraticPulse {
  double delta0 = 0.0;
  double delta1 = 0.0;
  double T = 0.0;
  double g_c = 0.0;

  void validate() const;
  Schedule schedule() const { return Schedule::quadratic_pulse(delta0, delta1, T); }
  // Value at both ends, where the CPB is parked.
  double edge_detuning() const { return -(delta0 + delta1); }
};

// Phase wrapped to (-pi, pi] plus its branch: raw = wrapped + 2 pi branch.
struct WrappedPhase {
  double raw = 0.0;
  double wrapped = 0.0;
  long branch = 0;
};
WrappedPhase wrap_phase(double raw);

struct PulsePhases {
  WrappedPhase one;  // single photon
  WrappedPhase two;  // two photons
};
PulsePhases pulse_phases(const QuadraticPulse& pulse);

// phi_1(t), phi_2(t) accumulated from the start of the pulse.
struct PhaseTrace {
  std::vector<double> times, phi1, phi2;
};
PhaseTrace phase_trace(const QuadraticPulse& pulse, std::size_t points);

struct CalibrationOptions {
  double phi1_target = 1.5707963267948966;  // taken mod 2 pi
  long branch = -3;                         // phi_2 = 2 pi branch
  double delta1_max = 5.0;                  // search box (0, delta1_max] in units of g_c
  std::size_t scan_points = 600;
  double tolerance = 1e-10;                 // radians, both residuals
};

struct CalibrationResult {
  QuadraticPulse pulse;
  PulsePhases phases;
  double residual1 = 0.0;  // phi_1 - target (mod 2 pi)
  double residual2 = 0.0;  // phi_2 - 2 pi branch
  int newton_iterations = 0;
};

// Solves phi_1 = target (mod 2 pi) and phi_2 = 2 pi branch for (delta1, T)
// at fixed delta0 = ratio g_c. For fixed delta1 both phases are linear in T,
// so the search brackets the smallest delta1 on the phi_2 = 2 pi branch
// curve, then polishes (delta1, T) with 2-D Newton.
// Throws CalibrationError with the scanned residuals when nothing brackets.
CalibrationResult calibrate_pulse(double delta0_over_gc, double g_c, const CalibrationOptions& options = {});

// ---------------------------------------------------------------------------
// Adiabatic sweep of the Raman detuning across the cavity resonance.

enum class SweepShape { linear, tanh_ramp };

struct SweepSpec {
  SweepShape shape = SweepShape::tanh_ramp;
  double delta_start = 0.0;
  double delta_end = 0.0;
  double duration = 0.0;
  // 1 or 2 drives a single ensemble; 0 drives both identically.
  int target = 1;
  double coupling = 0.0;       // g_m while the sweep runs
  double coupling_ramp = 0.0;  // on/off ramp time of g_m; 0 keeps it constant
  double steepness = 1.5;      // tanh shapes
  double resonance = 0.0;      // detuning at which the crossing happens

  void validate() const;
  Schedule detuning() const;
  Schedule coupling_envelope() const;
  // |d delta_m / dt| where delta_m crosses the resonance.
  double crossing_rate() const;
  // exp(-2 pi G^2 / rate), G = coupling (x sqrt 2 when both ensembles move).
  double predicted_leakage() const;
};

struct SwapResult {
  DensityMatrix output;
  DensityTimeline timeline;
  // Fidelity of output against the adiabatic-following map applied to the input.
  double fidelity = 0.0;
  // <n_ensemble> at the end over <n_cavity> at the start (mode swap weight).
  double transferred = 0.0;
  double predicted_leakage = 0.0;
  std::vector<std::string> warnings;
};

// Ideal adiabatic-following propagator of a sweep: eigenvectors of H(t)
// tracked by overlap block by block in excitation number, each carrying
// exp(-i int E_k dt). Returned on the full layout.
MatrixXc adiabatic_map(const SystemModel& model, double duration, std::size_t grid = 4000);

// Attaches the sweep to `base` (CPB schedule, rates and layout are kept).
SystemModel sweep_model(const SystemModel& base, const SweepSpec& sweep);

SwapResult swap_protocol(const SystemModel& base, const SweepSpec& sweep, const DensityMatrix& input,
                         const EvolveOptions& options = {});

// ---------------------------------------------------------------------------
// Three-step entangling gate of the two ensemble qubits.

struct GateSequence {
  SweepSpec sweep;  // steps 1 and 3, target 0
  QuadraticPulse pulse;
  // Fraction of the symmetric-mode amplitude squared moved into the cavity
  // in step 1. Below 1 the sweep stops part-way, the couplings stay on
  // through step 2 and step 3 runs step 1 backwards.
  double transfer_fraction = 1.0;
  // Per-ensemble multiplier on the coupling; the gate needs both equal.
  std::array<double, 2> coupling_scale{1.0, 1.0};

  // Length of step 1 (and of step 3).
  double step_duration() const;
  double duration() const { return 2.0 * step_duration() + pulse.T; }
  SystemModel build(const SystemModel& base) const;
};

struct SweepDesign {
  double coupling_per_gc = 0.2;
  double span_per_coupling = 20.0;  // |delta_start - centre| / g_m
  double leakage = 1e-4;            // Landau-Zener bound
  double steepness = 1.5;
  double ramp_per_gc = 30.0;        // g_m on/off ramp, units of 1/g_c
};

// Symmetric tanh sweep centred on the dressed-cavity resonance, long enough
// for the leakage bound and rounded so the uncoupled antisymmetric mode
// collects a multiple of 2 pi over steps 1 and 3.
SweepSpec default_gate_sweep(const QuadraticPulse& pulse, const SweepDesign& design = {});

// One-photon energy of the cavity dressed by a far-detuned CPB.
double dressed_cavity_shift(double delta_c, double g_c);

// |00>, |01>, |10>, |11> of (ensemble1, ensemble2) as composite indices.
std::array<Index, 4> qubit_basis(const SpaceLayout& layout);
// Target map in that basis.
MatrixXc target_gate();

struct GateReport {
  PulsePhases phases;
  ChannelEstimate channel;
  std::array<MatrixXc, 4> outputs;  // qubit-space images of the basis inputs
  std::array<double, 4> basis_fidelity{};
  double average_fidelity = 0.0;  // Haar
  double uniform_fidelity = 0.0;  // mean over the four basis inputs
  double trace_deviation = 0.0;
  double leakage = 0.0;          // |20> + |02> population from |11>
  double top_cavity_population = 0.0;
  double norm_drift = 0.0;        // unitary runs
  double excitation_drift = 0.0;  // unitary runs
  double trace_drift = 0.0;       // Lindblad runs
  double min_eigenvalue = 0.0;    // of the Choi matrix of the qubit map, Lindblad runs
  bool dissipative = false;
  std::size_t runs = 0;
  double duration = 0.0;
  ode::StepStats stats;
};

struct GateOptions {
  EvolveOptions evolve{};
  // Per-run sample grid for the truncation and drift diagnostics.
  std::size_t diagnostic_samples = 64;
  double truncation_limit = 1e-4;
};

// Unitary runs (4 kets) when the model has no dissipation, otherwise 10
// Lindblad runs of the matrix units |i><j|, i <= j.
GateReport two_qubit_gate(const SystemModel& base, const GateSequence& sequence, const GateOptions& options = {});

}  // namespace hybridq
