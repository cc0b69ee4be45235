#include "hybridq/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hybridq/quadrature.hpp"

namespace hybridq {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double quad_tol = 1e-9;

// (d + sqrt(d^2 + 4 n g^2)) / 2 without cancellation for d << 0.
double ladder_shift(double d, double n, double g) {
  const double q = 4.0 * n * g * g;
  const double r = std::sqrt(d * d + q);
  return d >= 0.0 ? 0.5 * (d + r) : 0.5 * q / (r - d);
}

void check_n(double n) {
  if (!(n >= 0.0)) throw PreconditionError("photon number must be non-negative");
}
}  // namespace

double phase_functional(const Schedule& delta_c, double n, double g_c, double t0, double t1) {
  check_n(n);
  if (t1 < t0) return -phase_functional(delta_c, n, g_c, t1, t0);
  // Split at the schedule's kinks so each panel is smooth.
  std::vector<double> cuts{t0};
  for (double b : delta_c.breakpoints())
    if (b > t0 && b < t1) cuts.push_back(b);
  cuts.push_back(t1);
  double sum = 0.0;
  const double tol = quad_tol / double(cuts.size() - 1);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    sum += integrate_gk15([&](double t) { return ladder_shift(delta_c(t), n, g_c); }, cuts[k], cuts[k + 1], tol)
               .value;
  return -sum;
}

double phase_functional(const Schedule& delta_c, double n, double g_c) {
  if (!delta_c.bounded()) throw PreconditionError("phase_functional needs a bounded schedule");
  return phase_functional(delta_c, n, g_c, 0.0, delta_c.duration());
}

double phase_functional_offset_derivative(const Schedule& delta_c, double n, double g_c) {
  check_n(n);
  const double q = 4.0 * n * g_c * g_c;
  auto f = [&](double t) {
    const double d = delta_c(t);
    const double r = std::sqrt(d * d + q);
    // (1 + d/r)/2, stable for d << 0
    return r == 0.0 ? 0.5 : (d >= 0.0 ? 0.5 * (1.0 + d / r) : 0.5 * q / (r * (r - d)));
  };
  return integrate_gk15(f, 0.0, delta_c.duration(), quad_tol).value;
}

void QuadraticPulse::validate() const {
  if (!(delta0 > 0.0) || !(delta1 > 0.0) || !(T > 0.0) || !(g_c > 0.0))
    throw PreconditionError("quadratic pulse needs delta0, delta1, T, g_c > 0");
}

WrappedPhase wrap_phase(double raw) {
  // (-pi, pi]
  const double k = std::ceil((raw - pi) / (2.0 * pi));
  double w = raw - 2.0 * pi * k;
  if (w <= -pi) {
    w += 2.0 * pi;
    return {raw, w, long(k) - 1};
  }
  return {raw, w, long(k)};
}

PulsePhases pulse_phases(const QuadraticPulse& pulse) {
  pulse.validate();
  const Schedule s = pulse.schedule();
  return {wrap_phase(phase_functional(s, 1.0, pulse.g_c)), wrap_phase(phase_functional(s, 2.0, pulse.g_c))};
}

PhaseTrace phase_trace(const QuadraticPulse& pulse, std::size_t points) {
  pulse.validate();
  if (points < 2) throw PreconditionError("phase trace needs at least two points");
  const Schedule s = pulse.schedule();
  PhaseTrace out;
  double p1 = 0.0, p2 = 0.0, prev = 0.0;
  for (std::size_t k = 0; k < points; ++k) {
    const double t = pulse.T * double(k) / double(points - 1);
    if (k > 0) {
      p1 += phase_functional(s, 1.0, pulse.g_c, prev, t);
      p2 += phase_functional(s, 2.0, pulse.g_c, prev, t);
    }
    out.times.push_back(t);
    out.phi1.push_back(p1);
    out.phi2.push_back(p2);
    prev = t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Calibration

namespace {

struct UnitRate {
  double psi1, psi2;  // phases per unit duration at this delta1
};

UnitRate unit_rate(double delta0, double delta1, double g_c) {
  const Schedule s = Schedule::quadratic_pulse(delta0, delta1, 1.0);
  return {phase_functional(s, 1.0, g_c), phase_functional(s, 2.0, g_c)};
}

}  // namespace

CalibrationResult calibrate_pulse(double ratio, double g_c, const CalibrationOptions& opt) {
  if (!(ratio > 1.0)) throw PreconditionError("calibrate_pulse needs delta0/g_c > 1");
  if (!(g_c > 0.0)) throw PreconditionError("calibrate_pulse needs g_c > 0");
  if (opt.branch >= 0) throw PreconditionError("phi_2 branch must be negative (phases are negative)");
  if (opt.scan_points < 4 || !(opt.delta1_max > 0.0)) throw PreconditionError("bad calibration search box");

  const double delta0 = ratio * g_c;
  const double phi2_target = 2.0 * pi * double(opt.branch);

  // On the curve phi_2 = target, T(delta1) = target / psi2(delta1) and
  // phi_1 = T psi1. Track phi_1 - target1 in units of whole turns.
  std::vector<ResidualSample> scan;
  auto on_curve = [&](double delta1) {
    const UnitRate u = unit_rate(delta0, delta1, g_c);
    const double T = phi2_target / u.psi2;
    return std::pair{T, T * u.psi1 - opt.phi1_target};
  };

  const double step = opt.delta1_max * g_c / double(opt.scan_points);
  double lo = 0.0, hi = 0.0, turn = 0.0;
  bool found = false;
  double prev_d = 0.0, prev_r = 0.0;
  for (std::size_t k = 1; k <= opt.scan_points && !found; ++k) {
    const double d1 = step * double(k);
    const auto [T, r] = on_curve(d1);
    scan.push_back({d1, T, wrap_phase(r).wrapped, 0.0});
    if (k > 1) {
      // A multiple of 2 pi lies between prev_r and r.
      const double a = std::floor(prev_r / (2.0 * pi)), b = std::floor(r / (2.0 * pi));
      if (a != b) {
        turn = std::max(a, b);
        lo = prev_d;
        hi = d1;
        found = true;
      }
    }
    prev_d = d1;
    prev_r = r;
  }
  if (!found) {
    std::ostringstream os;
    os << "no (delta1, T) in (0, " << opt.delta1_max << " g_c] meets phi_1 = " << opt.phi1_target
       << " (mod 2 pi) on the phi_2 = 2 pi (" << opt.branch << ") branch";
    throw CalibrationError(os.str(), std::move(scan));
  }

  // Bisection on the bracket.
  const double level = 2.0 * pi * turn;
  double flo = on_curve(lo).second - level;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = on_curve(mid).second - level;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }

  // 2-D Newton polish on (delta1, T) with the analytic Jacobian
  // d phi / dT = phi / T, d phi / d delta1 from quadrature.
  const double target1 = opt.phi1_target + level;
  double d1 = 0.5 * (lo + hi);
  double T = on_curve(d1).first;
  int iters = 0;
  double r1 = 0.0, r2 = 0.0;
  for (; iters < 20; ++iters) {
    const Schedule s = Schedule::quadratic_pulse(delta0, d1, T);
    const double p1 = phase_functional(s, 1.0, g_c), p2 = phase_functional(s, 2.0, g_c);
    r1 = p1 - target1;
    r2 = p2 - phi2_target;
    if (std::abs(r1) < opt.tolerance && std::abs(r2) < opt.tolerance) break;
    Eigen::Matrix2d J;
    J << phase_functional_offset_derivative(s, 1.0, g_c), p1 / T, phase_functional_offset_derivative(s, 2.0, g_c),
        p2 / T;
    const Eigen::Vector2d dx = J.partialPivLu().solve(Eigen::Vector2d(r1, r2));
    d1 -= dx(0);
    T -= dx(1);
    if (!(d1 > 0.0) || !(T > 0.0)) throw CalibrationError("Newton polish left the search box", std::move(scan));
  }
  if (std::abs(r1) > 1e-6 || std::abs(r2) > 1e-6) {
    std::ostringstream os;
    os << "calibration residuals too large: " << r1 << ", " << r2 << " rad";
    throw CalibrationError(os.str(), std::move(scan));
  }

  CalibrationResult res;
  res.pulse = {delta0, d1, T, g_c};
  res.phases = pulse_phases(res.pulse);
  res.residual1 = r1;
  res.residual2 = r2;
  res.newton_iterations = iters;
  return res;
}

// ---------------------------------------------------------------------------
// Sweeps

void SweepSpec::validate() const {
  if (!(duration > 0.0) || !std::isfinite(duration)) throw PreconditionError("sweep duration must be positive");
  if (target < 0 || target > 2) throw PreconditionError("sweep target must be 0 (both), 1 or 2");
  if (!((delta_start - resonance) * (delta_end - resonance) < 0.0))
    throw PreconditionError("sweep start and end must straddle the resonance");
  if (coupling < 0.0) throw PreconditionError("sweep coupling must be non-negative");
  if (coupling_ramp < 0.0 || 2.0 * coupling_ramp > duration)
    throw PreconditionError("coupling ramps must fit inside the sweep");
  if (shape == SweepShape::tanh_ramp && !(steepness > 0.0)) throw PreconditionError("tanh steepness must be positive");
}

Schedule SweepSpec::detuning() const {
  if (shape == SweepShape::linear) return Schedule::linear(delta_start, delta_end, duration);
  return Schedule::tanh_ramp(delta_start, delta_end, duration, steepness);
}

Schedule SweepSpec::coupling_envelope() const {
  if (coupling_ramp <= 0.0) return Schedule::constant(coupling, duration);
  std::vector<Schedule> parts;
  parts.push_back(Schedule::tanh_ramp(0.0, coupling, coupling_ramp, steepness));
  if (duration - 2.0 * coupling_ramp > 0.0)
    parts.push_back(Schedule::constant(coupling, duration - 2.0 * coupling_ramp));
  parts.push_back(Schedule::tanh_ramp(coupling, 0.0, coupling_ramp, steepness));
  return Schedule::piecewise(std::move(parts));
}

double SweepSpec::crossing_rate() const {
  validate();
  const double span = delta_end - delta_start;
  if (shape == SweepShape::linear) return std::abs(span) / duration;
  // delta = start + span (1 + tanh(s x)/tanh(s)) / 2, x = 2t/duration - 1
  const double y = 2.0 * (resonance - delta_start) / span - 1.0;  // tanh(s x) / tanh(s)
  const double th = std::tanh(steepness);
  const double tx = y * th;
  return std::abs(span) * steepness * (1.0 - tx * tx) / (th * duration);
}

double SweepSpec::predicted_leakage() const {
  const double rate = crossing_rate();
  // Coupling at the crossing time.
  double t_cross;
  if (shape == SweepShape::linear) {
    t_cross = duration * (resonance - delta_start) / (delta_end - delta_start);
  } else {
    const double y = 2.0 * (resonance - delta_start) / (delta_end - delta_start) - 1.0;
    t_cross = 0.5 * duration * (1.0 + std::atanh(y * std::tanh(steepness)) / steepness);
  }
  double g = coupling_envelope()(t_cross);
  if (target == 0) g *= std::sqrt(2.0);
  return std::exp(-2.0 * pi * g * g / rate);
}

SystemModel sweep_model(const SystemModel& base, const SweepSpec& sweep) {
  sweep.validate();
  SystemModel m = base;
  const Schedule det = sweep.detuning(), env = sweep.coupling_envelope();
  for (int i = 0; i < 2; ++i) {
    EnsembleDrive& e = m.ensembles[std::size_t(i)];
    if (sweep.target == 0 || sweep.target == i + 1) {
      e.coupling = env;
      e.detuning = det;
    } else {
      e.coupling = Schedule::constant(0.0, sweep.duration);
      e.detuning = Schedule::constant(0.0, sweep.duration);
    }
  }
  if (!m.delta_c.bounded()) m.delta_c = Schedule::constant(m.delta_c.front(), sweep.duration);
  return m;
}

namespace {

struct Frame {
  MatrixXc vectors;
  Eigen::VectorXd values;
};

// Reorders and rephases the eigenpairs in `es` so that column k continues
// column k of `prev` (largest overlap, real positive).
Frame follow(const MatrixXc& prev, const Eigen::SelfAdjointEigenSolver<MatrixXc>& es, double t) {
  const Index m = prev.cols();
  const MatrixXc ov = prev.adjoint() * es.eigenvectors();
  Frame f{MatrixXc(m, m), Eigen::VectorXd(m)};
  std::vector<bool> used(std::size_t(m), false);
  for (Index a = 0; a < m; ++a) {
    Index best = 0;
    double bv = -1.0;
    for (Index b = 0; b < m; ++b)
      if (!used[std::size_t(b)] && std::abs(ov(a, b)) > bv) {
        bv = std::abs(ov(a, b));
        best = b;
      }
    if (bv < 0.5) {
      std::ostringstream os;
      os << "adiabatic tracking lost an eigenvector at t=" << t << " (overlap " << bv << "); refine the grid";
      throw NumericalError(os.str());
    }
    used[std::size_t(best)] = true;
    const cplx o = ov(a, best);
    f.vectors.col(a) = es.eigenvectors().col(best) * (std::conj(o) / std::abs(o));
    f.values(a) = es.eigenvalues()(best);
  }
  return f;
}

}  // namespace

MatrixXc adiabatic_map(const SystemModel& model, double duration, std::size_t grid) {
  if (grid < 16) throw PreconditionError("adiabatic map needs a grid of at least 16 points");
  const SpaceLayout& L = model.layout;
  const HamiltonianParts ham(model);
  const std::vector<double> kinks = ham.breakpoints();

  // Panels between kinks, each with an even number of intervals (Simpson).
  std::vector<std::vector<double>> panels;
  {
    std::vector<double> cuts{0.0};
    for (double b : kinks)
      if (b > 0.0 && b < duration) cuts.push_back(b);
    cuts.push_back(duration);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double a = cuts[k], b = cuts[k + 1];
      auto n = std::size_t(std::ceil(double(grid) * (b - a) / duration));
      n = std::max<std::size_t>(n + (n % 2), 2);
      std::vector<double> nodes;
      for (std::size_t j = 0; j < n; ++j) nodes.push_back(a + (b - a) * double(j) / double(n));
      nodes.push_back(b);
      panels.push_back(std::move(nodes));
    }
  }

  Index nmax = 0;
  for (Index i = 0; i < L.total_dim(); ++i) nmax = std::max(nmax, L.excitations(i));

  MatrixXc out = MatrixXc::Zero(L.total_dim(), L.total_dim());
  MatrixXc hv;
  for (Index n = 0; n <= nmax; ++n) {
    std::vector<Index> idx;
    for (Index i = 0; i < L.total_dim(); ++i)
      if (L.excitations(i) == n) idx.push_back(i);
    const Subspace block(L, std::move(idx));
    const HamiltonianParts h = ham.reduced(block);
    const Index m = block.dim();

    auto solve = [&](double t) {
      h.evaluate(t, hv);
      return Eigen::SelfAdjointEigenSolver<MatrixXc>(hv);
    };
    Eigen::SelfAdjointEigenSolver<MatrixXc> es0 = solve(0.0);
    const MatrixXc first = es0.eigenvectors();
    Frame cur{first, es0.eigenvalues()};
    Eigen::VectorXd phase = Eigen::VectorXd::Zero(m);

    for (const std::vector<double>& nodes : panels) {
      // Right-hand limit at the panel start, then left-hand limit at its end.
      cur = follow(cur.vectors, solve(nodes.front()), nodes.front());
      const double step = nodes[1] - nodes[0];
      Eigen::VectorXd acc = cur.values;
      for (std::size_t j = 1; j < nodes.size(); ++j) {
        const double t = j + 1 == nodes.size() ? std::nextafter(nodes[j], nodes[0]) : nodes[j];
        cur = follow(cur.vectors, solve(t), t);
        const double w = (j + 1 == nodes.size()) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        acc += w * cur.values;
      }
      phase += acc * step / 3.0;
    }

    // U = sum_k |v_k(T)> <v_k(0)| exp(-i theta_k)
    MatrixXc ub = MatrixXc::Zero(m, m);
    for (Index a = 0; a < m; ++a)
      ub += std::exp(cplx(0.0, -phase(a))) * cur.vectors.col(a) * first.col(a).adjoint();
    out += block.lift(ub);
  }
  return out;
}

SwapResult swap_protocol(const SystemModel& base, const SweepSpec& sweep, const DensityMatrix& input,
                         const EvolveOptions& options) {
  sweep.validate();
  SystemModel model = sweep_model(base, sweep);
  model.validate();
  if (model.g_c > 0.0) {
    // CPB must stay far from the cavity for the whole sweep.
    for (int k = 0; k <= 64; ++k) {
      const double t = sweep.duration * k / 64.0;
      if (std::abs(model.delta_c(t)) < 10.0 * model.g_c)
        throw PreconditionError("swap needs the CPB far detuned (|delta_c| >= 10 g_c) during the sweep");
    }
  }
  const MatrixXc pe = embed(two_level_ops().excited, Factor::cpb, model.layout).matrix();
  if ((pe * input.matrix).trace().real() > 1e-12) throw PreconditionError("swap needs the CPB idle in |g>");

  SwapResult res{input, {{}, {}, input, {}}, 0.0, 0.0, sweep.predicted_leakage(), {}};
  if (res.predicted_leakage > 1e-3) {
    std::ostringstream os;
    os << "non-adiabatic sweep: predicted Landau-Zener leakage " << res.predicted_leakage << " > 1e-3";
    res.warnings.push_back(os.str());
  }

  res.timeline = evolve_density(model, input, sweep.duration, options);
  res.output = res.timeline.final_state;

  const MatrixXc u = adiabatic_map(model, sweep.duration);
  res.fidelity = uhlmann_fidelity(u * input.matrix * u.adjoint(), res.output.matrix);

  const ModelObservables mo = model_observables(model.layout);
  const double n0 = (mo.n_cavity.matrix() * input.matrix).trace().real();
  double n1 = 0.0;
  if (sweep.target != 2) n1 += (mo.n_ensemble1.matrix() * res.output.matrix).trace().real();
  if (sweep.target != 1) n1 += (mo.n_ensemble2.matrix() * res.output.matrix).trace().real();
  res.transferred = n0 > 0.0 ? n1 / n0 : 1.0;
  return res;
}

}  // namespace hybridq
