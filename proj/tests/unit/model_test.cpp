#include <doctest.h>

#include <random>

#include "hybridq/integrate.hpp"
#include "hybridq/model.hpp"
#include "support.hpp"

using namespace hybridq;
using hybridq::testing::basis_index;

TEST_CASE("schedule kinds") {
  const Schedule q = Schedule::quadratic_pulse(30.0, 0.44, 44.79);
  for (double t : {0.0, 1.0, 10.5, 22.395, 30.0}) {
    const double x = 2.0 * t / 44.79 - 1.0;
    CHECK(std::abs(q(t) - (-30.0 * x * x - 0.44)) <= 4e-16 * std::abs(q(t)));
  }
  // symmetric about T/2
  for (double t : {0.0, 0.5, 7.25, 13.0, 20.0}) CHECK(q(t) == q(44.79 - t));

  const Schedule l = Schedule::linear(2.0, -2.0, 10.0);
  CHECK(l(0.0) == 2.0);
  CHECK(l(10.0) == -2.0);
  CHECK(l(2.5) == doctest::Approx(1.0).epsilon(1e-15));

  const Schedule th = Schedule::tanh_ramp(1.0, 3.0, 4.0, 2.0);
  CHECK(th(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(th(2.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(th(4.0) == doctest::Approx(3.0).epsilon(1e-15));

  const Schedule p = Schedule::piecewise({Schedule::constant(1.0, 2.0), Schedule::linear(1.0, 0.0, 3.0)});
  CHECK(p.duration() == 5.0);
  CHECK(p(1.0) == 1.0);
  CHECK(p(3.5) == doctest::Approx(0.5));
  CHECK(p.breakpoints() == std::vector<double>{2.0});

  CHECK_THROWS_AS(l(10.1), PreconditionError);
  CHECK_THROWS_AS(l(-0.1), PreconditionError);
}

namespace {

SystemModel driven_model() {
  SystemModel m;
  m.layout = SpaceLayout::hybrid(4, 3);
  m.g_c = 1.0;
  m.delta_c = Schedule::quadratic_pulse(30, 0.44, 50.0);
  m.ensembles[0] = {Schedule::tanh_ramp(0.0, 0.2, 50.0), Schedule::linear(4.0, -4.0, 50.0)};
  m.ensembles[1] = {Schedule::linear(0.1, 0.3, 50.0), Schedule::constant(0.7)};
  return m;
}

}  // namespace

TEST_CASE("hamiltonian terms and signs") {
  SystemModel m;
  m.layout = SpaceLayout::hybrid(3, 2);
  m.delta_c = Schedule::constant(-0.8);
  const MatrixXc h = hamiltonian_at(m, 0.0).matrix();
  const MatrixXc pe = embed(two_level_ops().excited, Factor::cpb, m.layout).matrix();
  CHECK((h - 0.8 * pe).norm() < 1e-15);

  // equal couplings reach only the symmetric mode: H = g sqrt2 (m_s^dag c + h.c.)
  m.delta_c = Schedule::constant(0.0);
  m.ensembles[0].coupling = Schedule::constant(0.3);
  m.ensembles[1].coupling = Schedule::constant(0.3);
  const MatrixXc h2 = hamiltonian_at(m, 0.0).matrix();
  const MatrixXc c = embed(boson_annihilator(3), Factor::cavity, m.layout).matrix();
  const MatrixXc ms = (embed(boson_annihilator(2), Factor::ensemble1, m.layout).matrix() +
                       embed(boson_annihilator(2), Factor::ensemble2, m.layout).matrix()) /
                      std::sqrt(2.0);
  const MatrixXc expected = 0.3 * std::sqrt(2.0) * (ms.adjoint() * c + c.adjoint() * ms);
  CHECK((h2 - expected).norm() < 1e-14);

  // Jaynes-Cummings element <e,0|H|g,1> = g_c
  m.ensembles = {};
  m.g_c = 0.7;
  const MatrixXc h3 = hamiltonian_at(m, 0.0).matrix();
  CHECK(h3(basis_index(m.layout, 0, 0, 0, 1), basis_index(m.layout, 1, 0, 0, 0)) == cplx(0.7));
}

TEST_CASE("hamiltonian is Hermitian and excitation preserving") {
  const SystemModel m = driven_model();
  const MatrixXc N = total_excitation(m.layout).matrix();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 50.0);
  for (int k = 0; k < 100; ++k) {
    const MatrixXc h = hamiltonian_at(m, U(rng)).matrix();
    CHECK(hermiticity_defect(h) < 1e-12);
    CHECK(commutator(h, N).norm() < 1e-10 * h.norm() * N.norm());
  }
  CHECK_THROWS_AS(hamiltonian_at(m, 51.0), PreconditionError);
}

TEST_CASE("precomputed parts agree with the direct sum") {
  const SystemModel m = driven_model();
  const HamiltonianParts parts(m);
  HamiltonianParts::Sparse s;
  for (double t : {0.0, 12.5, 33.0, 50.0}) {
    const MatrixXc direct = hamiltonian_at(m, t).matrix();
    CHECK((parts(t) - direct).norm() < 1e-13);
    parts.evaluate(t, s);
    CHECK((MatrixXc(s) - direct).norm() < 1e-13);
  }
}

TEST_CASE("constant schedules give a time-independent hamiltonian") {
  SystemModel m;
  m.g_c = 1.0;
  m.delta_c = Schedule::constant(-2.0);
  m.ensembles[0] = {Schedule::constant(0.2), Schedule::constant(0.1)};
  const MatrixXc a = hamiltonian_at(m, 0.0).matrix();
  const MatrixXc b = hamiltonian_at(m, 123.456).matrix();
  CHECK(a == b);
}

TEST_CASE("collapse operators") {
  SystemModel m;
  CHECK(collapse_ops(m).empty());

  m.kappa = 0.04;
  m.gamma_phi = 0.02;
  const auto ops = collapse_ops(m);
  REQUIRE(ops.size() == 2);
  const MatrixXc c = embed(boson_annihilator(4), Factor::cavity, m.layout).matrix();
  CHECK((ops[0].matrix() - std::sqrt(0.04) * c).norm() < 1e-15);
  MatrixXc sz = MatrixXc::Zero(2, 2);
  sz(0, 0) = -1.0;
  sz(1, 1) = 1.0;
  CHECK((ops[1].matrix() - std::sqrt(0.01) * embed(sz, Factor::cpb, m.layout).matrix()).norm() < 1e-15);

  m.kappa = -1.0;
  CHECK_THROWS_AS(collapse_ops(m), PreconditionError);
}

TEST_CASE("cavity vacuum is dark under photon loss") {
  SystemModel m;
  m.layout = SpaceLayout::hybrid(3, 2);
  m.kappa = 0.5;
  const DensityMatrix rho0 = DensityMatrix::pure(Ket::basis(m.layout, 0));
  const auto tl = evolve_density(m, rho0, 10.0);
  CHECK((tl.final_state.matrix - rho0.matrix).norm() < 1e-12);
}
