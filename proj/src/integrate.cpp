#include "hybridq/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hybridq {

void EvolveOptions::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw PreconditionError("tolerances must be positive");
  if (!(max_step > 0.0)) throw PreconditionError("max_step must be positive");
  if (method == Method::rk4_fixed && !(fixed_step > 0.0))
    throw PreconditionError("rk4_fixed needs a positive fixed_step");
  if (!std::is_sorted(sample_times.begin(), sample_times.end()))
    throw PreconditionError("sample_times must be sorted");
}

namespace {

struct Setup {
  Subspace sub;
  HamiltonianParts ham;
  std::vector<std::pair<std::string, MatrixXc>> observables;
  std::vector<double> samples;
  std::vector<double> stops;
};

Subspace full_space(const SpaceLayout& layout) {
  std::vector<Index> all(std::size_t(layout.total_dim()));
  std::iota(all.begin(), all.end(), Index(0));
  return Subspace(layout, std::move(all));
}

Setup prepare(const SystemModel& model, Index max_excitation, double duration, const EvolveOptions& opt) {
  opt.validate();
  if (!(duration > 0.0) || !std::isfinite(duration)) throw PreconditionError("duration must be positive and finite");
  const double model_span = model.duration();
  if (duration > model_span * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "out of range: duration " << duration << " exceeds the schedules' common domain " << model_span;
    throw PreconditionError(os.str());
  }
  Subspace sub = opt.use_invariant_subspace ? excitation_subspace(model.layout, max_excitation)
                                            : full_space(model.layout);
  HamiltonianParts ham = HamiltonianParts(model).reduced(sub);

  std::vector<std::pair<std::string, MatrixXc>> obs;
  const ModelObservables mo = model_observables(model.layout);
  obs.emplace_back("excitation", sub.reduce(mo.excitation.matrix()));
  obs.emplace_back("n_cavity", sub.reduce(mo.n_cavity.matrix()));
  obs.emplace_back("n_ensemble1", sub.reduce(mo.n_ensemble1.matrix()));
  obs.emplace_back("n_ensemble2", sub.reduce(mo.n_ensemble2.matrix()));
  obs.emplace_back("p_excited", sub.reduce(mo.p_excited.matrix()));
  for (const NamedObservable& o : opt.observables) {
    if (!(o.op.layout() == model.layout))
      throw PreconditionError("observable '" + o.name + "' is defined on a different layout");
    obs.emplace_back(o.name, sub.reduce(o.op.matrix()));
  }

  std::vector<double> samples = opt.sample_times;
  if (samples.empty()) samples = {0.0, duration};
  if (samples.front() < 0.0 || samples.back() > duration * (1.0 + 1e-12))
    throw PreconditionError("sample_times must lie inside [0, duration]");

  std::vector<double> stops;
  for (double s : samples)
    if (s > 0.0) stops.push_back(std::min(s, duration));
  for (double b : ham.breakpoints())
    if (b > 0.0 && b < duration) stops.push_back(b);
  stops.push_back(duration);
  std::sort(stops.begin(), stops.end());
  // Stops closer than rounding noise collapse into one.
  const double merge = 1e-12 * duration;
  stops.erase(std::unique(stops.begin(), stops.end(), [merge](double a, double b) { return b - a <= merge; }),
              stops.end());
  stops.back() = duration;

  return {std::move(sub), std::move(ham), std::move(obs), std::move(samples), std::move(stops)};
}

ode::Control control_of(const EvolveOptions& o) {
  ode::Control c;
  c.rel_tol = o.rel_tol;
  c.abs_tol = o.abs_tol;
  c.max_step = o.max_step;
  c.fixed_step = o.fixed_step;
  c.max_steps = o.max_steps;
  return c;
}

template <typename State, typename Rhs, typename Post, typename OnStop>
ode::StepStats drive(const EvolveOptions& opt, Rhs&& rhs, State& y, std::span<const double> stops, Post&& post,
                     OnStop&& on_stop) {
  const ode::Control c = control_of(opt);
  if (opt.method == Method::rk4_fixed) return ode::rk4(rhs, y, 0.0, stops, c, post, on_stop);
  return ode::dormand_prince(rhs, y, 0.0, stops, c, post, on_stop);
}

// Calls record(t, y) for every requested sample, including t = 0.
template <typename State, typename Record>
auto sampler(const std::vector<double>& samples, double duration, Record& record) {
  return [&samples, duration, &record, next = std::size_t(0)](double t, const State& y) mutable {
    while (next < samples.size() && std::min(samples[next], duration) <= t) {
      record(samples[next], y);
      ++next;
    }
  };
}

void check_finite(double v, double t) {
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "non-finite state at t=" << t;
    throw NumericalError(os.str());
  }
}

}  // namespace

KetTimeline evolve_ket(const SystemModel& model, const Ket& psi0, double duration, const EvolveOptions& opt) {
  if (!(psi0.layout == model.layout)) throw PreconditionError("initial ket layout differs from the model layout");
  if (!psi0.is_normalized()) throw PreconditionError("initial ket is not normalized (norm " + std::to_string(psi0.norm()) + ")");
  const Index nmax = max_excitation_in_support(model.layout, psi0.amplitudes);
  Setup s = prepare(model, nmax, duration, opt);

  KetTimeline out{{}, {}, psi0, {}};
  out.series.emplace_back("norm", std::vector<double>{});
  for (const auto& o : s.observables) out.series.emplace_back(o.first, std::vector<double>{});

  auto record = [&](double t, const VectorXc& y) {
    out.times.push_back(t);
    const double nrm = y.norm();
    check_finite(nrm, t);
    out.series[0].second.push_back(nrm);
    for (std::size_t k = 0; k < s.observables.size(); ++k)
      out.series[k + 1].second.push_back(y.dot(s.observables[k].second * y).real());
  };

  VectorXc y = s.sub.reduce_vector(psi0.amplitudes);
  HamiltonianParts::Sparse h;
  auto rhs = [&](double t, const VectorXc& v, VectorXc& dv) {
    s.ham.evaluate(t, h);
    dv.noalias() = h * v;
    dv *= cplx(0.0, -1.0);
  };
  auto on_stop = sampler<VectorXc>(s.samples, duration, record);
  if (!s.samples.empty() && s.samples.front() <= 0.0) on_stop(0.0, y);
  out.stats = drive(opt, rhs, y, s.stops, [](VectorXc&) {}, on_stop);
  out.final_state = Ket(model.layout, s.sub.lift_vector(y));
  return out;
}

namespace {

// Lindblad evolution of any operator (the generator is linear). Hermitian
// inputs get the min_eigenvalue series and are re-symmetrized after each
// step.
template <typename Out>
void lindblad_run(const SystemModel& model, const MatrixXc& x0, double duration, const EvolveOptions& opt,
                  bool hermitian, Out& out) {
  const Index nmax = max_excitation_in_support(model.layout, x0);
  Setup s = prepare(model, nmax, duration, opt);

  using Sparse = HamiltonianParts::Sparse;
  std::vector<Sparse> jumps, jumps_adj;
  MatrixXc decay = MatrixXc::Zero(s.sub.dim(), s.sub.dim());
  for (const Operator& L : collapse_ops(model)) {
    const MatrixXc l = s.sub.reduce(L.matrix());
    decay += l.adjoint() * l;
    jumps.push_back(l.sparseView());
    jumps_adj.push_back(l.adjoint().sparseView());
  }
  const Sparse half_decay = (0.5 * decay).sparseView();

  out.series.emplace_back("trace", std::vector<double>{});
  for (const auto& o : s.observables) out.series.emplace_back(o.first, std::vector<double>{});
  if (hermitian) out.series.emplace_back("min_eigenvalue", std::vector<double>{});

  auto record = [&](double t, const MatrixXc& r) {
    out.times.push_back(t);
    const double tr = r.trace().real();
    check_finite(tr, t);
    check_finite(r.trace().imag(), t);
    out.series[0].second.push_back(tr);
    for (std::size_t k = 0; k < s.observables.size(); ++k)
      out.series[k + 1].second.push_back((s.observables[k].second.cwiseProduct(r.transpose())).sum().real());
    if (hermitian) out.series.back().second.push_back(min_eigenvalue(r));
  };

  MatrixXc y = s.sub.reduce(x0);
  Sparse h;
  MatrixXc b, bd, lr;
  // Non-Hermitian inputs need L(X) = -i[H, X] - 1/2{D, X} + sum L X L^dag
  // in full; for Hermitian X the second half is the adjoint of the first.
  auto rhs = [&](double t, const MatrixXc& r, MatrixXc& dr) {
    s.ham.evaluate(t, h);
    b.noalias() = h * r;
    b *= cplx(0.0, -1.0);
    b.noalias() -= half_decay * r;
    if (hermitian) {
      dr = b + b.adjoint();
    } else {
      bd.noalias() = r * h;
      bd *= cplx(0.0, 1.0);
      bd.noalias() -= r * half_decay;
      dr = b + bd;
    }
    for (std::size_t k = 0; k < jumps.size(); ++k) {
      lr.noalias() = jumps[k] * r;
      dr.noalias() += lr * jumps_adj[k];
    }
  };
  auto on_stop = sampler<MatrixXc>(s.samples, duration, record);
  if (!s.samples.empty() && s.samples.front() <= 0.0) on_stop(0.0, y);
  if (hermitian) {
    auto post = [](MatrixXc& r) { r = (0.5 * (r + r.adjoint())).eval(); };
    out.stats = drive(opt, rhs, y, s.stops, post, on_stop);
  } else {
    out.stats = drive(opt, rhs, y, s.stops, [](MatrixXc&) {}, on_stop);
  }
  out.final_state = {model.layout, s.sub.lift(y)};
}

}  // namespace

DensityTimeline evolve_density(const SystemModel& model, const DensityMatrix& rho0, double duration,
                               const EvolveOptions& opt) {
  if (!(rho0.layout == model.layout)) throw PreconditionError("initial density matrix layout differs from the model layout");
  validate_density(rho0);
  DensityTimeline out{{}, {}, rho0, {}};
  lindblad_run(model, rho0.matrix, duration, opt, true, out);
  return out;
}

OperatorTimeline evolve_operator(const SystemModel& model, const Operator& x0, double duration,
                                 const EvolveOptions& opt) {
  if (!(x0.layout() == model.layout)) throw PreconditionError("initial operator layout differs from the model layout");
  if (!x0.matrix().allFinite()) throw PreconditionError("initial operator has non-finite entries");
  OperatorTimeline out{{}, {}, x0, {}};
  lindblad_run(model, x0.matrix(), duration, opt, false, out);
  return out;
}

double trace_distance(const MatrixXc& a, const MatrixXc& b) {
  const MatrixXc d = 0.5 * ((a - b) + (a - b).adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(d, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace hybridq
