#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hybridq/model.hpp"
#include "hybridq/ode.hpp"
#include "hybridq/qspace.hpp"

namespace hybridq {

enum class Method { rk45_adaptive, rk4_fixed };

struct NamedObservable {
  std::string name;
  Operator op;
};

struct EvolveOptions {
  Method method = Method::rk45_adaptive;
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double max_step = std::numeric_limits<double>::infinity();
  double fixed_step = 0.0;  // rk4_fixed only
  std::size_t max_steps = 50'000'000;
  // Sorted, inside [0, duration]. Empty means {0, duration}.
  std::vector<double> sample_times;
  // Extra expectation values on top of the built-in series.
  std::vector<NamedObservable> observables;
  // Evolve in the span of Fock states with at most as many quanta as the
  // initial state carries. Exact for this model (H conserves the total
  // excitation and no collapse operator raises it).
  bool use_invariant_subspace = true;

  void validate() const;
};

// Series are kept in insertion order so tabular output is deterministic.
template <typename State>
struct Timeline {
  std::vector<double> times;
  std::vector<std::pair<std::string, std::vector<double>>> series;
  State final_state;
  ode::StepStats stats;

  const std::vector<double>& at(const std::string& name) const {
    for (const auto& [n, v] : series)
      if (n == name) return v;
    throw PreconditionError("timeline has no series '" + name + "'");
  }
  bool has(const std::string& name) const {
    for (const auto& s : series)
      if (s.first == name) return true;
    return false;
  }
};

using KetTimeline = Timeline<Ket>;
using DensityTimeline = Timeline<DensityMatrix>;
using OperatorTimeline = Timeline<Operator>;

// i dpsi/dt = H(t) psi on [0, duration]. Built-in series: norm, excitation,
// n_cavity, n_ensemble1, n_ensemble2, p_excited.
KetTimeline evolve_ket(const SystemModel& model, const Ket& psi0, double duration,
                       const EvolveOptions& options = {});

// Lindblad master equation with collapse_ops(model). Built-in series: trace,
// excitation, n_cavity, n_ensemble1, n_ensemble2, p_excited, min_eigenvalue.
// rho is re-symmetrized after every accepted step.
DensityTimeline evolve_density(const SystemModel& model, const DensityMatrix& rho0, double duration,
                               const EvolveOptions& options = {});

// The same generator applied to an arbitrary operator, e.g. |i><j| when
// reconstructing a channel. Series: trace (real part) and the observables
// as Re Tr(O X).
OperatorTimeline evolve_operator(const SystemModel& model, const Operator& x0, double duration,
                                 const EvolveOptions& options = {});

// Trace distance 0.5 ||a - b||_1 between Hermitian matrices.
double trace_distance(const MatrixXc& a, const MatrixXc& b);

}  // namespace hybridq
