#include "hybridq/qspace.hpp"

#include <algorithm>
#include <array>

namespace hybridq {

namespace {
constexpr std::array<std::string_view, 4> kFactorNames = {"cavity", "ensemble1", "ensemble2", "cpb"};
}

std::string_view to_string(Factor f) { return kFactorNames[static_cast<std::size_t>(f)]; }

std::optional<Factor> factor_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kFactorNames.size(); ++i)
    if (kFactorNames[i] == name) return static_cast<Factor>(i);
  return std::nullopt;
}

SpaceLayout::SpaceLayout(std::vector<Slot> slots) : slots_(std::move(slots)) {
  if (slots_.empty()) throw PreconditionError("layout needs at least one factor");
  int previous = -1;
  for (const Slot& s : slots_) {
    if (s.dim < 2)
      throw PreconditionError("invalid dimension " + std::to_string(s.dim) + " for factor '" +
                              std::string(to_string(s.label)) + "' (need >= 2)");
    if (s.label == Factor::cpb && s.dim != 2)
      throw PreconditionError("cpb factor must have dimension 2");
    const int order = static_cast<int>(s.label);
    if (order <= previous)
      throw PreconditionError("factors must be unique and in the order cavity, ensemble1, ensemble2, cpb");
    previous = order;
    total_dim_ *= s.dim;
  }
}

SpaceLayout SpaceLayout::hybrid(Index cavity_dim, Index ensemble_dim) {
  return hybrid(cavity_dim, ensemble_dim, ensemble_dim);
}

SpaceLayout SpaceLayout::hybrid(Index cavity_dim, Index ensemble1_dim, Index ensemble2_dim) {
  return SpaceLayout({{Factor::cavity, cavity_dim},
                      {Factor::ensemble1, ensemble1_dim},
                      {Factor::ensemble2, ensemble2_dim},
                      {Factor::cpb, 2}});
}

bool SpaceLayout::contains(Factor f) const {
  return std::any_of(slots_.begin(), slots_.end(), [f](const Slot& s) { return s.label == f; });
}

std::size_t SpaceLayout::position(Factor f) const {
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (slots_[i].label == f) return i;
  throw PreconditionError("unknown factor label '" + std::string(to_string(f)) + "'");
}

std::vector<Index> SpaceLayout::digits(Index composite) const {
  std::vector<Index> d(slots_.size());
  for (std::size_t k = slots_.size(); k-- > 0;) {
    d[k] = composite % slots_[k].dim;
    composite /= slots_[k].dim;
  }
  return d;
}

Index SpaceLayout::composite(std::span<const Index> digits) const {
  if (digits.size() != slots_.size()) throw PreconditionError("digit count does not match layout");
  Index idx = 0;
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    if (digits[k] < 0 || digits[k] >= slots_[k].dim)
      throw PreconditionError("occupation out of range for factor '" +
                              std::string(to_string(slots_[k].label)) + "'");
    idx = idx * slots_[k].dim + digits[k];
  }
  return idx;
}

Index SpaceLayout::excitations(Index composite) const {
  Index total = 0;
  for (std::size_t k = slots_.size(); k-- > 0;) {
    total += composite % slots_[k].dim;
    composite /= slots_[k].dim;
  }
  return total;
}

Subspace::Subspace(SpaceLayout layout, std::vector<Index> basis)
    : layout_(std::move(layout)), basis_(std::move(basis)) {
  for (Index b : basis_)
    if (b < 0 || b >= layout_.total_dim()) throw PreconditionError("subspace basis index out of range");
  if (!std::is_sorted(basis_.begin(), basis_.end()) ||
      std::adjacent_find(basis_.begin(), basis_.end()) != basis_.end())
    throw PreconditionError("subspace basis must be strictly increasing");
}

Subspace excitation_subspace(const SpaceLayout& layout, Index max_excitations) {
  std::vector<Index> basis;
  for (Index i = 0; i < layout.total_dim(); ++i)
    if (layout.excitations(i) <= max_excitations) basis.push_back(i);
  return Subspace(layout, std::move(basis));
}

Index max_excitation_in_support(const SpaceLayout& layout, const VectorXc& psi, double tol) {
  Index best = 0;
  for (Index i = 0; i < psi.size(); ++i)
    if (std::abs(psi(i)) > tol) best = std::max(best, layout.excitations(i));
  return best;
}

Index max_excitation_in_support(const SpaceLayout& layout, const MatrixXc& rho, double tol) {
  Index best = 0;
  for (Index j = 0; j < rho.cols(); ++j)
    for (Index i = 0; i < rho.rows(); ++i)
      if (std::abs(rho(i, j)) > tol)
        best = std::max({best, layout.excitations(i), layout.excitations(j)});
  return best;
}

void validate_density(const DensityMatrix& rho, double trace_tol, double eig_tol) {
  if (!is_hermitian(rho.matrix, 1e-10)) throw PreconditionError("density matrix is not Hermitian");
  const cplx tr = rho.matrix.trace();
  if (std::abs(tr - 1.0) > trace_tol)
    throw PreconditionError("density matrix trace " + std::to_string(tr.real()) + " differs from 1");
  const MatrixXc h = 0.5 * (rho.matrix + rho.matrix.adjoint());
  if (min_eigenvalue(h) < -eig_tol) throw PreconditionError("density matrix has a negative eigenvalue");
}

MatrixXc partial_trace_keep(const SpaceLayout& layout, const MatrixXc& rho, std::span<const Factor> keep) {
  std::vector<bool> kept(layout.size(), false);
  Index kept_dim = 1;
  for (Factor f : keep) {
    const std::size_t p = layout.position(f);
    if (!kept[p]) {
      kept[p] = true;
      kept_dim *= layout.slots()[p].dim;
    }
  }
  auto split = [&](Index composite) {
    const auto d = layout.digits(composite);
    Index k = 0, rest = 0;
    for (std::size_t s = 0; s < d.size(); ++s) {
      if (kept[s]) k = k * layout.slots()[s].dim + d[s];
      else rest = rest * layout.slots()[s].dim + d[s];
    }
    return std::pair{k, rest};
  };
  const Index n = layout.total_dim();
  std::vector<std::pair<Index, Index>> parts(n);
  for (Index i = 0; i < n; ++i) parts[i] = split(i);
  MatrixXc out = MatrixXc::Zero(kept_dim, kept_dim);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (parts[i].second == parts[j].second) out(parts[i].first, parts[j].first) += rho(i, j);
  return out;
}

}  // namespace hybridq
