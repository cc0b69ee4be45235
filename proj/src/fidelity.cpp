#include "hybridq/fidelity.hpp"

#include <algorithm>
#include <cmath>

namespace hybridq {

double state_fidelity(const MatrixXc& rho, const VectorXc& psi) {
  if (rho.rows() != psi.size() || rho.cols() != psi.size())
    throw PreconditionError("state_fidelity: dimensions differ");
  const double f = psi.dot(rho * psi).real();
  return std::clamp(f, 0.0, 1.0);
}

double state_fidelity(const DensityMatrix& rho, const Ket& psi) {
  if (!(rho.layout == psi.layout)) throw PreconditionError("state_fidelity: layouts differ");
  return state_fidelity(rho.matrix, psi.amplitudes);
}

namespace {
MatrixXc psd_sqrt(const MatrixXc& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}
}  // namespace

double uhlmann_fidelity(const MatrixXc& a, const MatrixXc& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw PreconditionError("uhlmann_fidelity: dimensions differ");
  const MatrixXc s = psd_sqrt(a);
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(s * b * s, Eigen::EigenvaluesOnly);
  const double t = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(t * t, 0.0, 1.0);
}

double memory_fidelity(double gamma10, double tau) {
  if (gamma10 < 0.0 || tau < 0.0) throw PreconditionError("memory_fidelity: negative rate or time");
  return 0.5 * (1.0 + std::exp(-0.5 * gamma10 * tau));
}

const std::array<MatrixXc, ChannelEstimate::basis_size>& ChannelEstimate::paulis() {
  static const std::array<MatrixXc, basis_size> table = [] {
    const cplx i(0.0, 1.0);
    std::array<Eigen::Matrix2cd, 4> s;
    s[0] << 1, 0, 0, 1;
    s[1] << 0, 1, 1, 0;
    s[2] << 0, -i, i, 0;
    s[3] << 1, 0, 0, -1;
    std::array<MatrixXc, basis_size> out;
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) out[4 * a + b] = kron(s[a], s[b]);
    return out;
  }();
  return table;
}

namespace {
std::array<Eigen::Vector2cd, 6> single_qubit_states() {
  const double r = 1.0 / std::sqrt(2.0);
  const cplx i(0.0, 1.0);
  return {Eigen::Vector2cd(1, 0), Eigen::Vector2cd(0, 1), Eigen::Vector2cd(r, r),
          Eigen::Vector2cd(r, -r), Eigen::Vector2cd(r, r * i), Eigen::Vector2cd(r, -r * i)};
}

// Coefficients of (I, X, Y, Z) over the six states above.
constexpr double pauli_weights[4][6] = {
    {1, 1, 0, 0, 0, 0},
    {0, 0, 1, -1, 0, 0},
    {0, 0, 0, 0, 1, -1},
    {1, -1, 0, 0, 0, 0},
};
}  // namespace

std::vector<MatrixXc> ChannelEstimate::product_inputs() {
  const auto s = single_qubit_states();
  std::vector<MatrixXc> out;
  out.reserve(36);
  for (const auto& a : s)
    for (const auto& b : s) {
      const Eigen::Vector4cd v = kron(a, b);
      out.push_back(v * v.adjoint());
    }
  return out;
}

ChannelEstimate ChannelEstimate::from_product_outputs(const std::vector<MatrixXc>& outputs) {
  if (outputs.size() != 36) throw PreconditionError("channel needs images of all 36 product inputs");
  for (const MatrixXc& m : outputs)
    if (m.rows() != d || m.cols() != d) throw PreconditionError("channel images must be 4x4");
  ChannelEstimate ch;
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) {
      MatrixXc img = MatrixXc::Zero(d, d);
      for (std::size_t k = 0; k < 6; ++k)
        for (std::size_t l = 0; l < 6; ++l) {
          const double w = pauli_weights[a][k] * pauli_weights[b][l];
          if (w != 0.0) img += w * outputs[6 * k + l];
        }
      ch.images_[4 * a + b] = std::move(img);
    }
  ch.complete_ = true;
  return ch;
}

ChannelEstimate ChannelEstimate::from_matrix_unit_images(const std::vector<MatrixXc>& images) {
  if (images.size() != 16) throw PreconditionError("channel needs images of all 16 matrix units");
  ChannelEstimate ch;
  for (std::size_t k = 0; k < basis_size; ++k) {
    const MatrixXc& p = paulis()[k];
    MatrixXc img = MatrixXc::Zero(d, d);
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j)
        if (p(i, j) != cplx(0.0)) img += p(i, j) * images[std::size_t(4 * i + j)];
    ch.images_[k] = std::move(img);
  }
  ch.complete_ = true;
  return ch;
}

ChannelEstimate ChannelEstimate::from_unitary(const MatrixXc& u) {
  if (u.rows() != d || u.cols() != d) throw PreconditionError("unitary must be 4x4");
  ChannelEstimate ch;
  for (std::size_t k = 0; k < basis_size; ++k) ch.images_[k] = u * paulis()[k] * u.adjoint();
  ch.complete_ = true;
  return ch;
}

MatrixXc ChannelEstimate::apply(const MatrixXc& rho) const {
  if (!complete_) throw PreconditionError("channel not reconstructed on the full operator basis");
  // rho = sum_k Tr(P_k rho) P_k / d
  MatrixXc out = MatrixXc::Zero(d, d);
  for (std::size_t k = 0; k < basis_size; ++k) out += ((paulis()[k] * rho).trace() / double(d)) * images_[k];
  return out;
}

double ChannelEstimate::trace_deviation() const {
  if (!complete_) throw PreconditionError("channel not reconstructed on the full operator basis");
  double worst = 0.0;
  for (std::size_t k = 0; k < basis_size; ++k)
    worst = std::max(worst, std::abs(images_[k].trace() - paulis()[k].trace()) / double(d));
  return worst;
}

double average_gate_fidelity(const ChannelEstimate& channel, const MatrixXc& target) {
  if (!channel.complete()) throw PreconditionError("channel not reconstructed on the full operator basis");
  if (target.rows() != ChannelEstimate::d || target.cols() != ChannelEstimate::d)
    throw PreconditionError("target must be 4x4");
  const double d = double(ChannelEstimate::d);
  double acc = 0.0;
  for (std::size_t k = 0; k < ChannelEstimate::basis_size; ++k)
    acc += (target * ChannelEstimate::paulis()[k].adjoint() * target.adjoint() * channel.images()[k]).trace().real();
  return std::clamp((acc + d * d) / (d * d * (d + 1.0)), 0.0, 1.0);
}

double average_gate_fidelity(const MatrixXc& realized, const MatrixXc& target) {
  if (realized.rows() != target.rows() || realized.cols() != target.cols())
    throw PreconditionError("average_gate_fidelity: dimensions differ");
  const double d = double(target.rows());
  const double t = std::norm((realized.adjoint() * target).trace());
  return std::clamp((t / d + 1.0) / (d + 1.0), 0.0, 1.0);
}

}  // namespace hybridq
