#include <doctest.h>

#include <cmath>

#include "hybridq/integrate.hpp"
#include "hybridq/protocols.hpp"
#include "support.hpp"

using namespace hybridq;
using hybridq::testing::basis_index;
using hybridq::testing::pi;

namespace {

const QuadraticPulse printed{30.0, 0.44, 44.79, 1.0};

// Wrapped difference of two angles.
double angle_diff(double a, double b) { return wrap_phase(a - b).wrapped; }

}  // namespace

TEST_CASE("phase functional closed forms") {
  // g_c = 0 with the CPB below the cavity: the square root cancels the detuning
  CHECK(std::abs(phase_functional(Schedule::quadratic_pulse(30, 0.44, 44.79), 1, 0.0)) < 1e-12);

  for (double n : {0.0, 1.0, 2.0, 3.0})
    for (double d : {-3.0, -0.2, 0.0, 1.5}) {
      const double T = 7.3, g = 0.9;
      const double exact = -(d + std::sqrt(d * d + 4 * n * g * g)) * T / 2;
      CHECK(std::abs(phase_functional(Schedule::constant(d, T), n, g) - exact) < 1e-9);
    }

  // additive over a split of the interval
  const Schedule s = printed.schedule();
  const double whole = phase_functional(s, 2, 1.0);
  CHECK(std::abs(phase_functional(s, 2, 1.0, 0.0, 13.1) + phase_functional(s, 2, 1.0, 13.1, 44.79) - whole) < 1e-9);

  // offset derivative against a central difference
  const double h = 1e-5;
  const double fd = (phase_functional(Schedule::quadratic_pulse(30, 0.44 + h, 44.79), 1, 1.0) -
                     phase_functional(Schedule::quadratic_pulse(30, 0.44 - h, 44.79), 1, 1.0)) /
                    (2 * h);
  CHECK(std::abs(phase_functional_offset_derivative(s, 1, 1.0) - fd) < 1e-6);

  CHECK_THROWS_AS(phase_functional(Schedule::constant(1.0), 1, 1.0), PreconditionError);
}

TEST_CASE("printed pulse phases") {
  const PulsePhases p = pulse_phases(printed);
  CHECK(std::abs(p.one.raw - -10.898906019981325) < 1e-9);
  CHECK(std::abs(p.two.raw - -18.71684149032119) < 1e-9);
  CHECK(std::abs(p.one.wrapped - pi / 2) < 0.25);
  CHECK(std::abs(p.two.wrapped) < 0.2);
  CHECK(p.two.branch == -3);

  const PhaseTrace tr = phase_trace(printed, 101);
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.phi1.front() == 0.0);
  CHECK(std::abs(tr.phi1.back() - p.one.raw) < 1e-8);
  CHECK(std::abs(tr.phi2.back() - p.two.raw) < 1e-8);
}

TEST_CASE("phase wrapping") {
  CHECK(wrap_phase(pi).wrapped == doctest::Approx(pi));
  CHECK(wrap_phase(-pi).wrapped == doctest::Approx(pi));
  CHECK(wrap_phase(-pi).branch == -1);
  const WrappedPhase w = wrap_phase(-6 * pi + 0.1);
  CHECK(w.branch == -3);
  CHECK(w.wrapped == doctest::Approx(0.1));
  for (double x : {-40.0, -3.2, 0.0, 2.0, 17.0}) {
    const WrappedPhase v = wrap_phase(x);
    CHECK(v.wrapped > -pi);
    CHECK(v.wrapped <= pi);
    CHECK(std::abs(v.wrapped + 2 * pi * double(v.branch) - x) < 1e-12);
  }
}

TEST_CASE("phase magnitudes grow with the pulse length") {
  for (double d1 : {0.2, 0.44, 1.0}) {
    double prev1 = 0.0, prev2 = 0.0;
    for (double T = 10.0; T <= 80.0; T += 5.0) {
      const Schedule s = Schedule::quadratic_pulse(30, d1, T);
      const double p1 = std::abs(phase_functional(s, 1, 1.0)), p2 = std::abs(phase_functional(s, 2, 1.0));
      CHECK(p1 > prev1);
      CHECK(p2 > prev2);
      prev1 = p1;
      prev2 = p2;
    }
  }
}

TEST_CASE("pulse calibration") {
  const CalibrationResult r = calibrate_pulse(30.0, 1.0);
  CHECK(std::abs(r.pulse.delta1 - 0.42031727455691004) < 1e-8);
  CHECK(std::abs(r.pulse.T - 44.87736071510888) < 1e-7);
  CHECK(std::abs(r.pulse.delta1 - 0.44) / 0.44 < 0.2);
  CHECK(std::abs(r.pulse.T - 44.79) / 44.79 < 0.2);

  // round trip through an independent evaluation
  const Schedule s = r.pulse.schedule();
  CHECK(std::abs(angle_diff(phase_functional(s, 1, 1.0), pi / 2)) < 1e-6);
  CHECK(std::abs(phase_functional(s, 2, 1.0) + 6 * pi) < 1e-6);

  // g_c sets the scale only
  const CalibrationResult r2 = calibrate_pulse(30.0, 2.5);
  CHECK(std::abs(r2.pulse.delta1 / 2.5 - r.pulse.delta1) < 1e-8);
  CHECK(std::abs(r2.pulse.T * 2.5 - r.pulse.T) < 1e-7);

  CalibrationOptions tight;
  tight.delta1_max = 0.01;
  try {
    calibrate_pulse(30.0, 1.0, tight);
    FAIL("expected a calibration failure");
  } catch (const CalibrationError& e) {
    CHECK(e.exit_code() == 5);
    CHECK(!e.residual_map().empty());
  }
  CHECK_THROWS_AS(calibrate_pulse(0.5, 1.0), PreconditionError);
}

TEST_CASE("sweep specification") {
  SweepSpec s;
  s.shape = SweepShape::linear;
  s.delta_start = 2.0;
  s.delta_end = -2.0;
  s.duration = 100.0;
  s.coupling = 0.05;
  CHECK(s.crossing_rate() == doctest::Approx(0.04));
  CHECK(s.predicted_leakage() == doctest::Approx(std::exp(-2 * pi * 0.0025 / 0.04)));

  // tanh: numerical slope at the crossing
  SweepSpec t = s;
  t.shape = SweepShape::tanh_ramp;
  t.resonance = 0.3;
  const Schedule d = t.detuning();
  double tc = 0.0;
  for (double lo = 0.0, hi = 100.0; hi - lo > 1e-12;) {
    tc = 0.5 * (lo + hi);
    (d(tc) > 0.3 ? lo : hi) = tc;
  }
  const double slope = (d(tc + 1e-4) - d(tc - 1e-4)) / 2e-4;
  CHECK(std::abs(std::abs(slope) - t.crossing_rate()) < 1e-6);

  SweepSpec bad = s;
  bad.delta_end = 1.0;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
}

namespace {

// Linear sweep with tanh coupling ramps over 40% of each end, detuning
// window +-120 g: bare and adiabatic populations agree at both ends.
double lz_transfer(double x) {
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
  const auto tl = evolve_ket(m, Ket::basis(m.layout, basis_index(m.layout, 1, 0, 0, 0)), s.duration);
  return tl.at("n_ensemble1").back();
}

}  // namespace

TEST_CASE("Landau-Zener transfer at three rates") {
  for (double x : {0.1, 1.0, 4.0}) CHECK(std::abs(lz_transfer(x) - (1 - std::exp(-x))) < 1e-3);
}

TEST_CASE("swap protocol") {
  SystemModel base;
  base.layout = SpaceLayout::hybrid(3, 2);
  base.g_c = 1.0;
  base.delta_c = Schedule::constant(-30.0);
  SweepSpec s;
  s.delta_start = 4.0;
  s.delta_end = -4.0;
  s.resonance = -dressed_cavity_shift(-30.0, 1.0);
  s.delta_start += s.resonance;
  s.delta_end += s.resonance;
  s.duration = 600.0;
  s.coupling = 0.2;
  s.coupling_ramp = 30.0;
  s.target = 1;

  const DensityMatrix vac = DensityMatrix::pure(Ket::basis(base.layout, 0));
  const SwapResult rv = swap_protocol(base, s, vac);
  CHECK(rv.fidelity > 1 - 1e-9);
  CHECK(rv.warnings.empty());

  VectorXc v = VectorXc::Zero(base.layout.total_dim());
  v(basis_index(base.layout, 0, 0, 0, 0)) = 0.6;
  v(basis_index(base.layout, 1, 0, 0, 0)) = cplx(0.0, 0.8);
  const SwapResult rq = swap_protocol(base, s, DensityMatrix::pure(Ket(base.layout, v)));
  CHECK(rq.fidelity > 0.99);
  CHECK(rq.transferred > 0.99);
  CHECK(rq.predicted_leakage < 1e-3);

  SweepSpec fast = s;
  fast.duration = 70.0;
  fast.coupling_ramp = 5.0;
  CHECK(!swap_protocol(base, fast, vac).warnings.empty());

  SystemModel close = base;
  close.delta_c = Schedule::constant(-2.0);
  CHECK_THROWS_AS(swap_protocol(close, s, vac), PreconditionError);
}

TEST_CASE("target gate and basis") {
  const MatrixXc u = target_gate();
  CHECK((u.adjoint() * u - MatrixXc::Identity(4, 4)).norm() < 1e-15);
  const SpaceLayout L = SpaceLayout::hybrid(4, 3);
  const auto qb = qubit_basis(L);
  CHECK(qb[1] == basis_index(L, 0, 0, 1, 0));
  CHECK(qb[2] == basis_index(L, 0, 1, 0, 0));
  // |10> -> e^{i pi/4} (|10> + i |01>) / sqrt2
  const cplx w = std::polar(1 / std::sqrt(2.0), pi / 4);
  CHECK(std::abs(u(2, 2) - w) < 1e-15);
  CHECK(std::abs(u(1, 2) - w * cplx(0, 1)) < 1e-15);
}

TEST_CASE("dressed cavity shift is the JC eigenvalue connected to the bare photon") {
  for (double d : {-30.0, -5.0, 4.0}) {
    const double g = 1.0;
    // block [[0, g], [g, -d]] on (|g,1>, |e,0>)
    const double a = 0.5 * (-d + std::sqrt(d * d + 4 * g * g)), b = 0.5 * (-d - std::sqrt(d * d + 4 * g * g));
    const double near = std::abs(a) < std::abs(b) ? a : b;
    CHECK(std::abs(dressed_cavity_shift(d, g) - near) < 1e-12);
  }
}

TEST_CASE("two-qubit gate, unitary limit") {
  SystemModel base;
  base.g_c = 1.0;
  const CalibrationResult cal = calibrate_pulse(30.0, 1.0);
  GateSequence seq{default_gate_sweep(cal.pulse), cal.pulse};
  const GateReport r = two_qubit_gate(base, seq);

  CHECK(r.average_fidelity >= 0.99);
  for (double f : r.basis_fidelity) CHECK(f >= 0.995);
  CHECK(r.outputs[0](0, 0).real() > 1 - 1e-6);
  CHECK(r.leakage < 1e-3);
  CHECK(r.trace_deviation < 1e-3);
  CHECK(r.norm_drift < 1e-8);
  CHECK(r.excitation_drift < 1e-7);
  CHECK(r.top_cavity_population < 1e-4);

  // the antisymmetric single excitation comes back unchanged
  MatrixXc anti = MatrixXc::Zero(4, 4);
  anti(1, 1) = anti(2, 2) = 0.5;
  anti(1, 2) = anti(2, 1) = -0.5;
  CHECK((r.channel.apply(anti) - anti).norm() < 1e-2);
}

TEST_CASE("gate preconditions") {
  SystemModel base;
  base.g_c = 1.0;
  GateSequence seq{default_gate_sweep(printed), printed};
  seq.coupling_scale = {1.0, 0.9};
  CHECK_THROWS_WITH_AS(two_qubit_gate(base, seq), doctest::Contains("asymmetric"), PreconditionError);

  SystemModel small = base;
  small.layout = SpaceLayout::hybrid(2, 2);
  GateSequence ok{default_gate_sweep(printed), printed};
  CHECK_THROWS_AS(two_qubit_gate(small, ok), PreconditionError);
}
