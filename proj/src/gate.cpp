#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hybridq/parallel.hpp"
#include "hybridq/protocols.hpp"

namespace hybridq {

namespace {
constexpr double pi = std::numbers::pi;

// Offset of the partial-transfer stop from the sweep centre: the lower
// symmetric-mode eigenstate of [[0, G], [G, x]] has cavity weight f there.
double partial_offset(double f, double G) {
  const double c = 2.0 * f - 1.0;
  return 2.0 * G * c / std::sqrt(1.0 - c * c);
}

double half_span(const SweepSpec& s) { return 0.5 * std::abs(s.delta_start - s.delta_end); }
}  // namespace

double dressed_cavity_shift(double delta_c, double g_c) {
  const double x = -delta_c;  // CPB excitation energy
  const double r = std::sqrt(x * x + 4.0 * g_c * g_c);
  if (x == 0.0) return -std::abs(g_c);
  // Branch adiabatically connected to the bare cavity, written without cancellation.
  return -2.0 * g_c * g_c * (x > 0.0 ? 1.0 : -1.0) / (std::abs(x) + r);
}

std::array<Index, 4> qubit_basis(const SpaceLayout& layout) {
  std::array<Index, 4> out{};
  for (Index k = 0; k < 4; ++k) {
    std::vector<Index> digits(layout.size(), 0);
    digits[layout.position(Factor::ensemble1)] = k / 2;
    digits[layout.position(Factor::ensemble2)] = k % 2;
    out[std::size_t(k)] = layout.composite(digits);
  }
  return out;
}

MatrixXc target_gate() {
  const cplx w = std::polar(1.0 / std::sqrt(2.0), pi / 4.0), i(0.0, 1.0);
  MatrixXc u = MatrixXc::Zero(4, 4);
  u(0, 0) = 1.0;
  u(1, 1) = w;  // |01> -> w (|01> + i |10>)
  u(2, 1) = w * i;
  u(1, 2) = w * i;  // |10> -> w (|10> + i |01>)
  u(2, 2) = w;
  u(3, 3) = 1.0;
  return u;
}

SweepSpec default_gate_sweep(const QuadraticPulse& pulse, const SweepDesign& design) {
  pulse.validate();
  if (!(design.coupling_per_gc > 0.0) || !(design.span_per_coupling > 0.0) || !(design.leakage > 0.0 && design.leakage < 1.0) ||
      !(design.steepness > 0.0) || design.ramp_per_gc < 0.0)
    throw PreconditionError("invalid sweep design");
  const double g = pulse.g_c;
  const double gm = design.coupling_per_gc * g;
  const double D = design.span_per_coupling * gm;
  const double centre = -dressed_cavity_shift(pulse.edge_detuning(), g);
  const double s = design.steepness;
  const double ramp = design.ramp_per_gc / g;

  // Landau-Zener: the symmetric mode couples with sqrt(2) g_m, and the tanh
  // ramp crosses the centre at rate 2 s D / (tanh(s) duration).
  double Ts = 2.0 * s * D * std::log(1.0 / design.leakage) / (std::tanh(s) * 2.0 * pi * 2.0 * gm * gm);
  Ts = std::max(Ts, 4.0 * ramp);
  // The antisymmetric mode collects centre * duration per sweep.
  if (2.0 * std::abs(centre) * Ts > 1e-3) Ts = std::ceil(std::abs(centre) * Ts / pi) * pi / std::abs(centre);

  SweepSpec sw;
  sw.shape = SweepShape::tanh_ramp;
  sw.delta_start = centre + D;
  sw.delta_end = centre - D;
  sw.duration = Ts;
  sw.target = 0;
  sw.coupling = gm;
  sw.coupling_ramp = ramp;
  sw.steepness = s;
  sw.resonance = centre;
  return sw;
}

double GateSequence::step_duration() const {
  if (transfer_fraction >= 1.0) return sweep.duration;
  const double D = half_span(sweep);
  const double x = partial_offset(transfer_fraction, std::sqrt(2.0) * sweep.coupling);
  return sweep.duration * (D + x) / (2.0 * D);
}

SystemModel GateSequence::build(const SystemModel& base) const {
  sweep.validate();
  pulse.validate();
  if (sweep.target != 0) throw PreconditionError("gate sweep must drive both ensembles (target 0)");
  if (coupling_scale[0] != coupling_scale[1])
    throw PreconditionError("asymmetric couplings: the gate needs g_m(1) = g_m(2) and delta_m(1) = delta_m(2)");
  if (!(transfer_fraction > 0.0 && transfer_fraction <= 1.0))
    throw PreconditionError("transfer_fraction must lie in (0, 1]");
  if (sweep.delta_start < sweep.delta_end)
    throw PreconditionError("gate sweep must run downward in detuning (ensemble mode below the cavity at the start)");

  SystemModel m = base;
  const double park = pulse.edge_detuning();
  const double T = pulse.T;
  const double Ts = step_duration();
  m.delta_c = Schedule::piecewise(
      {Schedule::constant(park, Ts), pulse.schedule(), Schedule::constant(park, Ts)});

  for (std::size_t i = 0; i < 2; ++i) {
    SweepSpec sw = sweep;
    sw.coupling *= coupling_scale[i];
    EnsembleDrive& e = m.ensembles[i];
    if (transfer_fraction >= 1.0) {
      const Schedule det = sw.detuning(), env = sw.coupling_envelope();
      e.detuning = Schedule::piecewise({det, Schedule::constant(0.0, T), det});
      e.coupling = Schedule::piecewise({env, Schedule::constant(0.0, T), env});
    } else {
      const double D = half_span(sweep);
      const double x = partial_offset(transfer_fraction, std::sqrt(2.0) * sweep.coupling);
      if (!(x > -D && x < D))
        throw PreconditionError("transfer_fraction stops the sweep outside its detuning span");
      const double stop = sweep.resonance - x;
      const double ramp = std::min(sw.coupling_ramp, 0.5 * Ts);
      const Schedule there = Schedule::tanh_ramp(sweep.delta_start, stop, Ts, sweep.steepness);
      const Schedule back = Schedule::tanh_ramp(stop, sweep.delta_start, Ts, sweep.steepness);
      e.detuning = Schedule::piecewise({there, Schedule::constant(stop, T), back});
      std::vector<Schedule> env;
      if (ramp > 0.0) env.push_back(Schedule::tanh_ramp(0.0, sw.coupling, ramp, sweep.steepness));
      env.push_back(Schedule::constant(sw.coupling, 2.0 * Ts + T - 2.0 * ramp));
      if (ramp > 0.0) env.push_back(Schedule::tanh_ramp(sw.coupling, 0.0, ramp, sweep.steepness));
      e.coupling = Schedule::piecewise(std::move(env));
    }
  }
  return m;
}

namespace {

void check_symmetric(const SystemModel& m, double duration) {
  for (int k = 0; k <= 256; ++k) {
    const double t = duration * k / 256.0;
    const double g1 = m.ensembles[0].coupling(t), g2 = m.ensembles[1].coupling(t);
    const double d1 = m.ensembles[0].detuning(t), d2 = m.ensembles[1].detuning(t);
    if (std::abs(g1 - g2) > 1e-12 * std::max(1.0, std::abs(g1)) ||
        std::abs(d1 - d2) > 1e-12 * std::max(1.0, std::abs(d1)))
      throw PreconditionError("asymmetric couplings: the gate needs g_m(1) = g_m(2) and delta_m(1) = delta_m(2)");
  }
}

// Ensemble pair state (ensemble1 (x) ensemble2) restricted to the qubit levels.
MatrixXc qubit_block(const SpaceLayout& L, const MatrixXc& ens) {
  const Index d2 = L.dim(Factor::ensemble2);
  const Index idx[4] = {0, 1, d2, d2 + 1};
  MatrixXc q(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) q(i, j) = ens(idx[i], idx[j]);
  return q;
}

MatrixXc ensemble_state(const SpaceLayout& L, const MatrixXc& full) {
  static constexpr std::array<Factor, 2> keep{Factor::ensemble1, Factor::ensemble2};
  return partial_trace_keep(L, full, keep);
}

double doubly_excited(const SpaceLayout& L, const MatrixXc& ens) {
  const Index d1 = L.dim(Factor::ensemble1), d2 = L.dim(Factor::ensemble2);
  double p = 0.0;
  if (d1 > 2) p += ens(2 * d2, 2 * d2).real();
  if (d2 > 2) p += ens(2, 2).real();
  return p;
}

void merge(ode::StepStats& into, const ode::StepStats& s) {
  into.accepted += s.accepted;
  into.rejected += s.rejected;
  into.rhs_evaluations += s.rhs_evaluations;
  into.smallest_step = std::min(into.smallest_step, s.smallest_step);
  into.largest_step = std::max(into.largest_step, s.largest_step);
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

}  // namespace

GateReport two_qubit_gate(const SystemModel& base, const GateSequence& seq, const GateOptions& opt) {
  const SystemModel model = seq.build(base);
  model.validate();
  const SpaceLayout& L = model.layout;
  if (L.dim(Factor::cavity) < 3) throw PreconditionError("gate needs cavity dimension >= 3 (|2> is populated)");
  if (L.dim(Factor::ensemble1) < 2 || L.dim(Factor::ensemble2) < 2) throw PreconditionError("ensembles need two levels");
  const double duration = seq.duration();
  check_symmetric(model, duration);

  EvolveOptions eo = opt.evolve;
  eo.sample_times.clear();
  const std::size_t ns = std::max<std::size_t>(opt.diagnostic_samples, 2);
  for (std::size_t k = 0; k < ns; ++k) eo.sample_times.push_back(duration * double(k) / double(ns - 1));
  {
    MatrixXc top = MatrixXc::Zero(L.dim(Factor::cavity), L.dim(Factor::cavity));
    top(top.rows() - 1, top.cols() - 1) = 1.0;
    eo.observables.push_back({"p_cavity_top", embed(top, Factor::cavity, L)});
  }

  GateReport rep;
  rep.phases = pulse_phases(seq.pulse);
  rep.duration = duration;
  rep.dissipative = model.kappa > 0.0 || model.gamma_phi > 0.0 || model.gamma_1 > 0.0;
  const std::array<Index, 4> qb = qubit_basis(L);
  const MatrixXc U = target_gate();
  double top = 0.0;

  if (!rep.dissipative) {
    std::vector<KetTimeline> runs(4, KetTimeline{{}, {}, Ket::basis(L, 0), {}});
    parallel_for(4, [&](std::size_t k) { runs[k] = evolve_ket(model, Ket::basis(L, qb[k]), duration, eo); });
    std::vector<MatrixXc> units;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        const VectorXc& a = runs[i].final_state.amplitudes;
        const VectorXc& b = runs[j].final_state.amplitudes;
        units.push_back(qubit_block(L, ensemble_state(L, a * b.adjoint())));
      }
    rep.channel = ChannelEstimate::from_matrix_unit_images(units);
    for (std::size_t k = 0; k < 4; ++k) {
      const KetTimeline& r = runs[k];
      for (double v : r.at("norm")) rep.norm_drift = std::max(rep.norm_drift, std::abs(v - 1.0));
      const auto& ex = r.at("excitation");
      for (double v : ex) rep.excitation_drift = std::max(rep.excitation_drift, std::abs(v - ex.front()));
      top = std::max(top, max_of(r.at("p_cavity_top")));
      merge(rep.stats, r.stats);
    }
    const VectorXc& last = runs[3].final_state.amplitudes;
    rep.leakage = doubly_excited(L, ensemble_state(L, last * last.adjoint()));
    rep.runs = 4;
  } else {
    // Images of |i><j| for i <= j; the rest follow from E(X^dag) = E(X)^dag.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i; j < 4; ++j) pairs.emplace_back(i, j);
    std::vector<OperatorTimeline> runs(pairs.size(), OperatorTimeline{{}, {}, Operator::zero(L), {}});
    parallel_for(pairs.size(), [&](std::size_t k) {
      MatrixXc x = MatrixXc::Zero(L.total_dim(), L.total_dim());
      x(qb[pairs[k].first], qb[pairs[k].second]) = 1.0;
      runs[k] = evolve_operator(model, Operator(L, x), duration, eo);
    });
    std::vector<MatrixXc> units(16);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto [i, j] = pairs[k];
      const OperatorTimeline& r = runs[k];
      units[4 * i + j] = qubit_block(L, ensemble_state(L, r.final_state.matrix()));
      if (i != j) {
        units[4 * j + i] = units[4 * i + j].adjoint();
      } else {
        for (double v : r.at("trace")) rep.trace_drift = std::max(rep.trace_drift, std::abs(v - 1.0));
        top = std::max(top, max_of(r.at("p_cavity_top")));
        if (i == 3) rep.leakage = doubly_excited(L, ensemble_state(L, r.final_state.matrix()));
      }
      merge(rep.stats, r.stats);
    }
    rep.channel = ChannelEstimate::from_matrix_unit_images(units);
    // Positivity of the reconstructed qubit-space map (its Choi matrix).
    MatrixXc choi = MatrixXc::Zero(16, 16);
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 4; ++j) choi.block(4 * i, 4 * j, 4, 4) = units[std::size_t(4 * i + j)];
    rep.min_eigenvalue = min_eigenvalue(choi);
    rep.runs = pairs.size();
  }

  rep.top_cavity_population = top;
  if (top > opt.truncation_limit) {
    std::ostringstream os;
    os << "cavity truncation too small: top level reached population " << top << " > " << opt.truncation_limit;
    throw PreconditionError(os.str());
  }

  for (std::size_t k = 0; k < 4; ++k) {
    MatrixXc in = MatrixXc::Zero(4, 4);
    in(Index(k), Index(k)) = 1.0;
    rep.outputs[k] = rep.channel.apply(in);
    rep.basis_fidelity[k] = state_fidelity(rep.outputs[k], U.col(Index(k)));
  }
  rep.average_fidelity = average_gate_fidelity(rep.channel, U);
  rep.uniform_fidelity = 0.25 * (rep.basis_fidelity[0] + rep.basis_fidelity[1] + rep.basis_fidelity[2] + rep.basis_fidelity[3]);
  rep.trace_deviation = rep.channel.trace_deviation();
  return rep;
}

}  // namespace hybridq
