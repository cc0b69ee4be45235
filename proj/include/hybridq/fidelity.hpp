#pragma once

#include <array>
#include <vector>

#include "hybridq/qspace.hpp"

namespace hybridq {

// <psi| rho |psi>
double state_fidelity(const DensityMatrix& rho, const Ket& psi);
double state_fidelity(const MatrixXc& rho, const VectorXc& psi);

// (Tr sqrt(sqrt(a) b sqrt(a)))^2 for density matrices.
double uhlmann_fidelity(const MatrixXc& a, const MatrixXc& b);

// Worst-case output fidelity of a stored qubit dephasing at gamma10 for a
// time tau: (1 + exp(-gamma10 tau / 2)) / 2.
double memory_fidelity(double gamma10, double tau);

// Linear map on two-qubit operators, held as the images of the 16 Paulis
// sigma_a (x) sigma_b, index 4a + b with sigma = (I, X, Y, Z).
class ChannelEstimate {
 public:
  static constexpr Index d = 4;
  static constexpr std::size_t basis_size = 16;

  ChannelEstimate() = default;

  static const std::array<MatrixXc, basis_size>& paulis();

  // The 36 product inputs |a><a| (x) |b><b|, index 6a + b, with single-qubit
  // states (|0>, |1>, |+>, |->, |+i>, |-i>).
  static std::vector<MatrixXc> product_inputs();

  // Each Pauli is a combination of four product states:
  //   I = |0><0| + |1><1|,  Z = |0><0| - |1><1|,
  //   X = |+><+| - |-><-|,  Y = |+i><+i| - |-i><-i|,
  // so sigma_a (x) sigma_b = sum c_k c_l rho_k (x) rho_l.
  static ChannelEstimate from_product_outputs(const std::vector<MatrixXc>& outputs);

  // Images E(|i><j|) of the 16 matrix units, index 4i + j.
  static ChannelEstimate from_matrix_unit_images(const std::vector<MatrixXc>& images);

  static ChannelEstimate from_unitary(const MatrixXc& u);

  bool complete() const { return complete_; }
  const std::array<MatrixXc, basis_size>& images() const { return images_; }

  MatrixXc apply(const MatrixXc& rho) const;

  // max_k |Tr E(P_k) - Tr P_k| / d; zero for trace-preserving maps.
  double trace_deviation() const;

 private:
  std::array<MatrixXc, basis_size> images_;
  bool complete_ = false;
};

// (sum_k Tr[U P_k^dag U^dag E(P_k)] + d^2) / (d^2 (d + 1)).
double average_gate_fidelity(const ChannelEstimate& channel, const MatrixXc& target);

// Closed form for unitary-vs-unitary: (|Tr V^dag U|^2 / d + 1) / (d + 1).
double average_gate_fidelity(const MatrixXc& realized, const MatrixXc& target);

}  // namespace hybridq
