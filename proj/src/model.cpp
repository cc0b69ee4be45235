#include "hybridq/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hybridq {

namespace {

const Schedule& ensemble_coupling(const SystemModel& m, int i) { return m.ensembles[std::size_t(i)].coupling; }

MatrixXc number(Index dim) {
  const MatrixXc a = boson_annihilator(dim);
  return a.adjoint() * a;
}

}  // namespace

double SystemModel::duration() const {
  double d = std::numeric_limits<double>::infinity();
  for (const Schedule* s : {&delta_c, &ensembles[0].coupling, &ensembles[0].detuning, &ensembles[1].coupling,
                            &ensembles[1].detuning})
    if (s->bounded()) d = std::min(d, s->duration());
  return d;
}

void SystemModel::validate() const {
  for (Factor f : {Factor::cavity, Factor::ensemble1, Factor::ensemble2, Factor::cpb})
    if (!layout.contains(f))
      throw PreconditionError("model layout lacks factor '" + std::string(to_string(f)) + "'");
  if (kappa < 0.0 || gamma_phi < 0.0 || gamma_1 < 0.0)
    throw PreconditionError("invalid parameter: dissipation rates must be non-negative");
  if (!std::isfinite(g_c)) throw PreconditionError("invalid parameter: g_c must be finite");
}

HamiltonianParts::HamiltonianParts(const SystemModel& model) {
  model.validate();
  const SpaceLayout& L = model.layout;
  const MatrixXc c = embed(boson_annihilator(L.dim(Factor::cavity)), Factor::cavity, L).matrix();
  const auto tl = two_level_ops();
  const MatrixXc sge = embed(tl.lowering, Factor::cpb, L).matrix();
  const MatrixXc see = embed(tl.excited, Factor::cpb, L).matrix();

  // |e><g| c + |g><e| c^dag
  fixed_ = model.g_c * (sge.adjoint() * c + sge * c.adjoint());
  terms_.push_back({model.delta_c, -1.0, see});

  const std::array<Factor, 2> ens = {Factor::ensemble1, Factor::ensemble2};
  for (int i = 0; i < 2; ++i) {
    const Index d = L.dim(ens[std::size_t(i)]);
    const MatrixXc m = embed(boson_annihilator(d), ens[std::size_t(i)], L).matrix();
    terms_.push_back({model.ensembles[std::size_t(i)].detuning, -1.0, embed(number(d), ens[std::size_t(i)], L).matrix()});
    terms_.push_back({ensemble_coupling(model, i), 1.0, m.adjoint() * c + c.adjoint() * m});
  }
  duration_ = model.duration();
  build_pattern();
}

void HamiltonianParts::build_pattern() {
  MatrixXc mask = fixed_.cwiseAbs().cast<cplx>();
  for (const Term& t : terms_) mask += t.op.cwiseAbs().cast<cplx>();
  std::vector<Eigen::Triplet<cplx>> entries;
  for (Index i = 0; i < mask.rows(); ++i)
    for (Index j = 0; j < mask.cols(); ++j)
      if (mask(i, j) != cplx(0.0)) entries.emplace_back(i, j, cplx(1.0));
  pattern_ = Sparse(mask.rows(), mask.cols());
  pattern_.setFromTriplets(entries.begin(), entries.end());
  pattern_.makeCompressed();
  auto gather = [&](const MatrixXc& m) {
    std::vector<cplx> v;
    v.reserve(std::size_t(pattern_.nonZeros()));
    for (Index r = 0; r < pattern_.outerSize(); ++r)
      for (Sparse::InnerIterator it(pattern_, r); it; ++it) v.push_back(m(it.row(), it.col()));
    return v;
  };
  fixed_values_ = gather(fixed_);
  for (Term& t : terms_) t.values = gather(t.op);
}

HamiltonianParts HamiltonianParts::reduced(const Subspace& sub) const {
  HamiltonianParts out;
  out.fixed_ = sub.reduce(fixed_);
  for (const Term& t : terms_) out.terms_.push_back({t.schedule, t.scale, sub.reduce(t.op)});
  out.duration_ = duration_;
  out.build_pattern();
  return out;
}

std::vector<double> HamiltonianParts::breakpoints() const {
  std::vector<double> out;
  for (const Term& t : terms_) {
    auto b = t.schedule.breakpoints();
    out.insert(out.end(), b.begin(), b.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double HamiltonianParts::clamp_time(double t) const {
  const double slack = 1e-9 * std::max(1.0, std::isfinite(duration_) ? duration_ : 1.0);
  if (t < -slack || t > duration_ + slack)
    throw PreconditionError("out of range: t=" + std::to_string(t) + " outside model domain [0, " +
                            std::to_string(duration_) + "]");
  return std::clamp(t, 0.0, duration_);
}

void HamiltonianParts::evaluate(double t, MatrixXc& out) const {
  t = clamp_time(t);
  out = fixed_;
  for (const Term& term : terms_) {
    const double v = term.scale * term.schedule(t);
    if (v != 0.0) out += v * term.op;
  }
}

void HamiltonianParts::evaluate(double t, Sparse& out) const {
  t = clamp_time(t);
  if (out.nonZeros() != pattern_.nonZeros() || out.rows() != pattern_.rows()) out = pattern_;
  cplx* values = out.valuePtr();
  const std::size_t n = fixed_values_.size();
  std::copy(fixed_values_.begin(), fixed_values_.end(), values);
  for (const Term& term : terms_) {
    const double v = term.scale * term.schedule(t);
    if (v == 0.0) continue;
    for (std::size_t k = 0; k < n; ++k) values[k] += v * term.values[k];
  }
}

Operator hamiltonian_at(const SystemModel& model, double t) {
  return Operator(model.layout, HamiltonianParts(model)(t));
}

std::vector<Operator> collapse_ops(const SystemModel& model) {
  model.validate();
  const SpaceLayout& L = model.layout;
  std::vector<Operator> out;
  if (model.kappa > 0.0)
    out.push_back(std::sqrt(model.kappa) * embed(boson_annihilator(L.dim(Factor::cavity)), Factor::cavity, L));
  const auto tl = two_level_ops();
  if (model.gamma_phi > 0.0) {
    MatrixXc sz = MatrixXc::Zero(2, 2);
    sz(0, 0) = -1.0;
    sz(1, 1) = 1.0;
    out.push_back(std::sqrt(model.gamma_phi / 2.0) * embed(sz, Factor::cpb, L));
  }
  if (model.gamma_1 > 0.0) out.push_back(std::sqrt(model.gamma_1) * embed(tl.lowering, Factor::cpb, L));
  return out;
}

ModelObservables model_observables(const SpaceLayout& L) {
  return {embed(number(L.dim(Factor::cavity)), Factor::cavity, L),
          embed(number(L.dim(Factor::ensemble1)), Factor::ensemble1, L),
          embed(number(L.dim(Factor::ensemble2)), Factor::ensemble2, L),
          embed(two_level_ops().excited, Factor::cpb, L), total_excitation(L)};
}

}  // namespace hybridq
