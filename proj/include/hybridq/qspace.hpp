#pragma once

// Operator algebra on the composite space cavity (x) ensemble1 (x) ensemble2 (x) cpb.
//
// Basis conventions, used everywhere in the library:
//  * factors appear in the fixed order (cavity, ensemble1, ensemble2, cpb);
//    a layout may omit factors but never reorders them;
//  * bosonic factors use the Fock basis |0>, |1>, ..., |dim-1>;
//  * the cpb factor uses (|g>, |e>), so index 1 is the excited state;
//  * the composite index is row-major in factor order (the last factor varies
//    fastest), i.e. the ordering of a Kronecker product A (x) B (x) ...

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hybridq/error.hpp"

namespace hybridq {

using cplx = std::complex<double>;
using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXc = Matrix<cplx>;
using VectorXc = Vector<cplx>;

enum class Factor { cavity = 0, ensemble1 = 1, ensemble2 = 2, cpb = 3 };

std::string_view to_string(Factor f);
std::optional<Factor> factor_from_string(std::string_view name);

class SpaceLayout {
 public:
  struct Slot {
    Factor label;
    Index dim;
    bool operator==(const Slot&) const = default;
  };

  // Throws PreconditionError on dim < 2, a cpb dim other than 2, repeated
  // labels or labels out of canonical order.
  explicit SpaceLayout(std::vector<Slot> slots);

  // The four-factor layout of the hybrid device.
  static SpaceLayout hybrid(Index cavity_dim, Index ensemble_dim);
  static SpaceLayout hybrid(Index cavity_dim, Index ensemble1_dim,
                            Index ensemble2_dim);

  const std::vector<Slot>& slots() const { return slots_; }
  Index total_dim() const { return total_dim_; }
  std::size_t size() const { return slots_.size(); }

  bool contains(Factor f) const;
  std::size_t position(Factor f) const;
  Index dim(Factor f) const { return slots_[position(f)].dim; }

  // Per-factor occupation indices of a composite basis index.
  std::vector<Index> digits(Index composite) const;
  Index composite(std::span<const Index> digits) const;

  // Sum of occupations (cpb |e> counts one), i.e. the eigenvalue of the
  // total excitation operator on that basis state.
  Index excitations(Index composite) const;

  bool operator==(const SpaceLayout&) const = default;

 private:
  std::vector<Slot> slots_;
  Index total_dim_ = 1;
};

// Dense operator tagged with the layout it acts on.
template <typename Scalar = cplx>
class BasicOperator {
 public:
  using MatrixType = Matrix<Scalar>;

  BasicOperator(SpaceLayout layout, MatrixType matrix)
      : layout_(std::move(layout)), matrix_(std::move(matrix)) {
    if (matrix_.rows() != layout_.total_dim() ||
        matrix_.cols() != layout_.total_dim()) {
      throw PreconditionError("operator shape does not match layout dimension " +
                              std::to_string(layout_.total_dim()));
    }
  }

  static BasicOperator identity(const SpaceLayout& layout) {
    return {layout, MatrixType::Identity(layout.total_dim(), layout.total_dim())};
  }
  static BasicOperator zero(const SpaceLayout& layout) {
    return {layout, MatrixType::Zero(layout.total_dim(), layout.total_dim())};
  }

  const SpaceLayout& layout() const { return layout_; }
  const MatrixType& matrix() const { return matrix_; }
  Index dim() const { return matrix_.rows(); }

  BasicOperator adjoint() const { return {layout_, matrix_.adjoint()}; }

  BasicOperator& operator+=(const BasicOperator& o) {
    check_same(o);
    matrix_ += o.matrix_;
    return *this;
  }
  BasicOperator& operator-=(const BasicOperator& o) {
    check_same(o);
    matrix_ -= o.matrix_;
    return *this;
  }
  BasicOperator& operator*=(Scalar s) {
    matrix_ *= s;
    return *this;
  }

  friend BasicOperator operator+(BasicOperator a, const BasicOperator& b) { return a += b; }
  friend BasicOperator operator-(BasicOperator a, const BasicOperator& b) { return a -= b; }
  friend BasicOperator operator*(BasicOperator a, Scalar s) { return a *= s; }
  friend BasicOperator operator*(Scalar s, BasicOperator a) { return a *= s; }
  friend BasicOperator operator*(const BasicOperator& a, const BasicOperator& b) {
    a.check_same(b);
    return {a.layout_, a.matrix_ * b.matrix_};
  }

 private:
  void check_same(const BasicOperator& o) const {
    if (!(layout_ == o.layout_)) throw PreconditionError("operator layouts differ");
  }

  SpaceLayout layout_;
  MatrixType matrix_;
};

template <typename Scalar = cplx>
struct BasicKet {
  SpaceLayout layout;
  Vector<Scalar> amplitudes;

  BasicKet(SpaceLayout l, Vector<Scalar> a) : layout(std::move(l)), amplitudes(std::move(a)) {
    if (amplitudes.size() != layout.total_dim())
      throw PreconditionError("ket size does not match layout dimension");
  }

  static BasicKet basis(const SpaceLayout& layout, Index composite) {
    Vector<Scalar> v = Vector<Scalar>::Zero(layout.total_dim());
    v(composite) = Scalar(1);
    return {layout, std::move(v)};
  }

  double norm() const { return amplitudes.norm(); }
  bool is_normalized(double tol = 1e-10) const { return std::abs(norm() - 1.0) <= tol; }
};

template <typename Scalar = cplx>
struct BasicDensityMatrix {
  SpaceLayout layout;
  Matrix<Scalar> matrix;

  BasicDensityMatrix(SpaceLayout l, Matrix<Scalar> m) : layout(std::move(l)), matrix(std::move(m)) {
    if (matrix.rows() != layout.total_dim() || matrix.cols() != layout.total_dim())
      throw PreconditionError("density matrix shape does not match layout dimension");
  }

  static BasicDensityMatrix pure(const BasicKet<Scalar>& psi) {
    return {psi.layout, psi.amplitudes * psi.amplitudes.adjoint()};
  }

  Scalar trace() const { return matrix.trace(); }
};

using Operator = BasicOperator<cplx>;
using Ket = BasicKet<cplx>;
using DensityMatrix = BasicDensityMatrix<cplx>;

// ---------------------------------------------------------------------------
// Expression helpers, usable on any Eigen matrix expression.

template <typename A, typename B>
auto commutator(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return (a * b - b * a).eval();
}

template <typename Derived>
double hermiticity_defect(const Eigen::MatrixBase<Derived>& m) {
  return (m - m.adjoint()).norm();
}

// ||M - M^dagger|| <= rel_tol * max(||M||, 1)
template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double rel_tol = 1e-12) {
  return hermiticity_defect(m) <= rel_tol * std::max(1.0, double(m.norm()));
}

template <typename Derived>
double min_eigenvalue(const Eigen::MatrixBase<Derived>& hermitian) {
  using Plain = typename Derived::PlainObject;
  Eigen::SelfAdjointEigenSolver<Plain> es(hermitian.derived(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Kronecker product in the library's factor order (rhs varies fastest).
template <typename A, typename B>
Matrix<typename A::Scalar> kron(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  Matrix<typename A::Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// ---------------------------------------------------------------------------
// Local (single-factor) operators.

// Truncated lowering operator: <k-1|a|k> = sqrt(k).
template <typename Scalar = cplx>
Matrix<Scalar> boson_annihilator(Index dim) {
  if (dim < 2) throw PreconditionError("invalid dimension " + std::to_string(dim) + " (need >= 2)");
  Matrix<Scalar> a = Matrix<Scalar>::Zero(dim, dim);
  for (Index k = 1; k < dim; ++k) a(k - 1, k) = Scalar(std::sqrt(double(k)));
  return a;
}

template <typename Scalar = cplx>
struct TwoLevelOps {
  Matrix<Scalar> lowering;  // |g><e|
  Matrix<Scalar> excited;   // |e><e|
};

template <typename Scalar = cplx>
TwoLevelOps<Scalar> two_level_ops() {
  TwoLevelOps<Scalar> ops{Matrix<Scalar>::Zero(2, 2), Matrix<Scalar>::Zero(2, 2)};
  ops.lowering(0, 1) = Scalar(1);
  ops.excited(1, 1) = Scalar(1);
  return ops;
}

// I (x) ... (x) local (x) ... (x) I in layout order.
template <typename Scalar>
BasicOperator<Scalar> embed(const Matrix<Scalar>& local, Factor label, const SpaceLayout& layout) {
  if (!layout.contains(label))
    throw PreconditionError("layout has no factor '" + std::string(to_string(label)) + "'");
  const std::size_t pos = layout.position(label);
  const Index d = layout.slots()[pos].dim;
  if (local.rows() != d || local.cols() != d)
    throw PreconditionError("local operator dimension " + std::to_string(local.rows()) +
                            " does not match factor '" + std::string(to_string(label)) +
                            "' of dimension " + std::to_string(d));
  Index left = 1, right = 1;
  for (std::size_t k = 0; k < pos; ++k) left *= layout.slots()[k].dim;
  for (std::size_t k = pos + 1; k < layout.size(); ++k) right *= layout.slots()[k].dim;
  Matrix<Scalar> m = Matrix<Scalar>::Zero(layout.total_dim(), layout.total_dim());
  // Only the diagonal blocks of the identity factors are populated.
  for (Index l = 0; l < left; ++l)
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) {
        if (local(i, j) == Scalar(0)) continue;
        for (Index r = 0; r < right; ++r)
          m((l * d + i) * right + r, (l * d + j) * right + r) = local(i, j);
      }
  return {layout, std::move(m)};
}

// Sum_i m_i^dagger m_i + c^dagger c + |e><e|; needs all four factors.
template <typename Scalar = cplx>
BasicOperator<Scalar> total_excitation(const SpaceLayout& layout) {
  for (Factor f : {Factor::cavity, Factor::ensemble1, Factor::ensemble2, Factor::cpb})
    if (!layout.contains(f))
      throw PreconditionError("total_excitation: missing factor '" + std::string(to_string(f)) + "'");
  Matrix<Scalar> diag = Matrix<Scalar>::Zero(layout.total_dim(), layout.total_dim());
  for (Index i = 0; i < layout.total_dim(); ++i) diag(i, i) = Scalar(double(layout.excitations(i)));
  return {layout, std::move(diag)};
}

// ---------------------------------------------------------------------------
// Coordinate subspace spanned by a subset of composite basis states.

class Subspace {
 public:
  Subspace(SpaceLayout layout, std::vector<Index> basis);

  const SpaceLayout& layout() const { return layout_; }
  const std::vector<Index>& basis() const { return basis_; }
  Index dim() const { return Index(basis_.size()); }

  template <typename Derived>
  Matrix<typename Derived::Scalar> reduce(const Eigen::MatrixBase<Derived>& m) const {
    const Index n = dim();
    Matrix<typename Derived::Scalar> out(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) out(i, j) = m(basis_[i], basis_[j]);
    return out;
  }

  template <typename Derived>
  Vector<typename Derived::Scalar> reduce_vector(const Eigen::MatrixBase<Derived>& v) const {
    Vector<typename Derived::Scalar> out(dim());
    for (Index i = 0; i < dim(); ++i) out(i) = v(basis_[i]);
    return out;
  }

  template <typename Derived>
  Vector<typename Derived::Scalar> lift_vector(const Eigen::MatrixBase<Derived>& v) const {
    Vector<typename Derived::Scalar> out = Vector<typename Derived::Scalar>::Zero(layout_.total_dim());
    for (Index i = 0; i < dim(); ++i) out(basis_[i]) = v(i);
    return out;
  }

  template <typename Derived>
  Matrix<typename Derived::Scalar> lift(const Eigen::MatrixBase<Derived>& m) const {
    const Index n = layout_.total_dim();
    Matrix<typename Derived::Scalar> out = Matrix<typename Derived::Scalar>::Zero(n, n);
    for (Index j = 0; j < dim(); ++j)
      for (Index i = 0; i < dim(); ++i) out(basis_[i], basis_[j]) = m(i, j);
    return out;
  }

 private:
  SpaceLayout layout_;
  std::vector<Index> basis_;
};

// All basis states with at most `max_excitations` quanta.
Subspace excitation_subspace(const SpaceLayout& layout, Index max_excitations);

// Largest excitation number among basis states carrying weight above `tol`.
Index max_excitation_in_support(const SpaceLayout& layout, const VectorXc& psi, double tol = 0.0);
Index max_excitation_in_support(const SpaceLayout& layout, const MatrixXc& rho, double tol = 0.0);

// Diagnostics for the DensityMatrix invariants: Hermitian, unit trace,
// non-negative spectrum. Throws PreconditionError naming the violated one.
void validate_density(const DensityMatrix& rho, double trace_tol = 1e-10, double eig_tol = 1e-9);

// Reduced state of the listed factors (in layout order).
MatrixXc partial_trace_keep(const SpaceLayout& layout, const MatrixXc& rho,
                            std::span<const Factor> keep);

}  // namespace hybridq
