#pragma once

#include <array>
#include <vector>

#include <Eigen/SparseCore>

#include "hybridq/qspace.hpp"
#include "hybridq/schedule.hpp"

namespace hybridq {

// Raman drive of one molecular ensemble: collective coupling g_m(t) to the
// cavity and Raman detuning delta_m(t).
struct EnsembleDrive {
  Schedule coupling = Schedule::constant(0.0);
  Schedule detuning = Schedule::constant(0.0);
};

// All frequencies and rates are angular (rad per time unit). The model is
// unit-agnostic: rad/us with times in us, or g_c = 1 with times in 1/g_c.
struct SystemModel {
  SpaceLayout layout = SpaceLayout::hybrid(4, 3);
  double g_c = 0.0;
  Schedule delta_c = Schedule::constant(0.0);
  std::array<EnsembleDrive, 2> ensembles{};
  double kappa = 0.0;      // cavity energy decay rate
  double gamma_phi = 0.0;  // cpb pure dephasing rate, 1/T2
  double gamma_1 = 0.0;    // optional cpb relaxation channel, off by default

  // Common time axis: the shortest bounded schedule, or +inf when all
  // schedules are constant.
  double duration() const;

  // Throws PreconditionError on negative rates or a layout lacking a factor.
  void validate() const;
};

// H(t) = static + sum_k scale_k * schedule_k(t) * op_k, with the operators
// precomputed (optionally reduced to an invariant subspace).
class HamiltonianParts {
 public:
  explicit HamiltonianParts(const SystemModel& model);

  HamiltonianParts reduced(const Subspace& sub) const;

  Index dim() const { return fixed_.rows(); }
  double duration() const { return duration_; }
  std::vector<double> breakpoints() const;

  void evaluate(double t, MatrixXc& out) const;
  // Same values on the fixed union sparsity pattern of all parts; `out` is
  // shaped on first use and only its values are rewritten afterwards.
  using Sparse = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
  void evaluate(double t, Sparse& out) const;
  MatrixXc operator()(double t) const {
    MatrixXc h;
    evaluate(t, h);
    return h;
  }

 private:
  struct Term {
    Schedule schedule;
    double scale;
    MatrixXc op;
    std::vector<cplx> values = {};  // op on the pattern
  };
  HamiltonianParts() = default;
  void build_pattern();
  double clamp_time(double t) const;

  MatrixXc fixed_;
  std::vector<Term> terms_;
  double duration_ = 0.0;
  Sparse pattern_;
  std::vector<cplx> fixed_values_;
};

// H_C + H_M + H_CM in the interaction picture w.r.t. the bare cavity:
//   -delta_c |e><e| + g_c (|e><g| c + h.c.)
//   - sum_i delta_m^(i) m_i^dag m_i + sum_i g_m^(i) (m_i^dag c + h.c.)
Operator hamiltonian_at(const SystemModel& model, double t);

// {sqrt(kappa) c, sqrt(gamma_phi / 2) sigma_z, sqrt(gamma_1) |g><e|}, each
// omitted when its rate is zero.
std::vector<Operator> collapse_ops(const SystemModel& model);

// Named local operators embedded in the model layout, for observables.
struct ModelObservables {
  Operator n_cavity;
  Operator n_ensemble1;
  Operator n_ensemble2;
  Operator p_excited;
  Operator excitation;
};
ModelObservables model_observables(const SpaceLayout& layout);

}  // namespace hybridq
