#include "hybridq/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hybridq/constants.hpp"
#include "hybridq/error.hpp"

namespace hybridq {

namespace k = constants;

UnitSystem UnitSystem::si() { return {k::hbar, k::k_B, 1.0 / (4.0 * k::pi * k::epsilon0)}; }

UnitSystem UnitSystem::gaussian() { return {k::hbar * 1e7, k::k_B * 1e7, 1.0}; }

namespace {
void positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw PreconditionError(std::string(what) + " must be positive");
}
}  // namespace

double field_per_photon(const CavitySpec& c, const UnitSystem& u) {
  positive(c.omega, "cavity frequency");
  positive(c.gap, "electrode distance");
  positive(c.length, "cavity length");
  // 1 / (2 pi eps0) = 2 * coulomb
  return std::sqrt(2.0 * u.coulomb * u.hbar * c.omega / (c.gap * c.gap * c.length));
}

double vacuum_rabi(double dipole, const CavitySpec& c, const UnitSystem& u) {
  if (dipole < 0.0) throw PreconditionError("dipole moment must be non-negative");
  return dipole * field_per_photon(c, u) / u.hbar;
}

RamanCouplings raman_couplings(double g, double omega, double omega1, double omega2, double delta, double count) {
  if (delta == 0.0) throw PreconditionError("Raman detuning Delta must be nonzero");
  if (count < 0.0) throw PreconditionError("molecule count must be non-negative");
  const double ge = g * omega / (2.0 * delta);
  const double drive = std::max({std::abs(omega), std::abs(omega1), std::abs(omega2)});
  return {omega1 * omega2 / (2.0 * delta), ge, std::sqrt(count) * ge, std::abs(delta) > drive};
}

double molecule_count(double density, double gap, double wavelength) {
  if (density < 0.0 || gap < 0.0 || wavelength < 0.0) throw PreconditionError("molecule_count inputs must be non-negative");
  return density * gap * gap * wavelength / 10.0;
}

std::vector<RotationalLevel> rotational_spectrum(const MoleculeSpec& mol, int n_max) {
  if (n_max < 1) throw PreconditionError("rotational_spectrum needs N_max >= 1");
  const double B = mol.rotational, gsr = mol.spin_rotation, b = mol.hyperfine, I = mol.nuclear_spin;
  if (I < 0.0 || std::abs(2.0 * I - std::round(2.0 * I)) > 1e-12) throw PreconditionError("nuclear spin must be a non-negative half-integer");
  std::vector<RotationalLevel> out;
  auto level = [&](int N, double J) {
    return B * N * (N + 1) + 0.5 * gsr * (J * (J + 1) - N * (N + 1) - 0.75);
  };
  const double e0 = level(0, 0.5);
  if (I > 0.0 && b != 0.0) {
    out.push_back({0, 0.5, I - 0.5, e0 - 0.5 * b * (I + 1.0)});
    out.push_back({0, 0.5, I + 0.5, e0 + 0.5 * b * I});
  } else {
    out.push_back({0, 0.5, -1.0, e0});
  }
  for (int N = 1; N <= n_max; ++N)
    for (double J : {N - 0.5, N + 0.5}) out.push_back({N, J, -1.0, level(N, J)});
  return out;
}

VanDerWaals c6_and_range(double dipole, double rotational, double mass, const UnitSystem& u) {
  positive(dipole, "dipole moment");
  positive(rotational, "rotational constant");
  positive(mass, "mass");
  const double d2 = u.coulomb * dipole * dipole;
  const double c6 = d2 * d2 / (6.0 * u.hbar * rotational);
  return {c6, std::pow(mass * c6 / (u.hbar * u.hbar), 0.25)};
}

double mean_relative_speed(double T, double m, const UnitSystem& u) {
  positive(T, "temperature");
  positive(m, "mass");
  return std::sqrt(16.0 * u.k_B * T / (k::pi * m));
}

double barrier_height(int l, double c6, double m, const UnitSystem& u) {
  if (l < 0) throw PreconditionError("partial wave must be non-negative");
  if (l == 0) return 0.0;
  // Reduced mass m/2: centrifugal term hbar^2 l(l+1) / (m r^2) = A / r^2.
  // Maximum of -C6/r^6 + A/r^2 is (2/3) A^(3/2) / sqrt(3 C6).
  const double A = u.hbar * u.hbar * l * (l + 1) / m;
  return 2.0 / 3.0 * std::pow(A, 1.5) / std::sqrt(3.0 * c6);
}

double swave_threshold(double range, double m, const UnitSystem& u) {
  positive(range, "range");
  positive(m, "mass");
  const double c6 = std::pow(range, 4) * u.hbar * u.hbar / m;
  return barrier_height(1, c6, m, u) / u.k_B;
}

Rate collision_rate_swave(double a, double n, double T, double m, const UnitSystem& u) {
  if (n < 0.0) throw PreconditionError("density must be non-negative");
  const double v = mean_relative_speed(T, m, u);
  const bool ok = a == 0.0 || T <= swave_threshold(std::abs(a), m, u);
  return {8.0 * k::pi * a * a * n * v, ok, 1};
}

Rate collision_rate_unitarity(double n, double T, double m, double range, const UnitSystem& u) {
  if (n < 0.0) throw PreconditionError("density must be non-negative");
  positive(range, "range");
  const double v = mean_relative_speed(T, m, u);
  const double c6 = std::pow(range, 4) * u.hbar * u.hbar / m;
  int lmax = 0;
  while (lmax < 100000 && barrier_height(lmax + 1, c6, m, u) < u.k_B * T) ++lmax;
  const double kbar = 0.5 * m * v / u.hbar;
  const double sigma = 4.0 * k::pi * double(lmax + 1) * double(lmax + 1) / (kbar * kbar);
  return {n * sigma * v, lmax >= 1, lmax + 1};
}

Rate dephasing_rate_swave(double a00, double a01, double n, double T, double m, const UnitSystem& u) {
  return collision_rate_swave(a00 - a01, n, T, m, u);
}

MonteCarloEstimate gamma10_montecarlo(const ScatteringAmplitudes& amps, double n, double T, double m,
                                      std::size_t samples, std::uint64_t seed) {
  if (samples < 10000) throw PreconditionError("gamma10_montecarlo needs at least 1e4 samples");
  positive(T, "temperature");
  positive(m, "mass");
  if (n < 0.0) throw PreconditionError("density must be non-negative");
  if (!amps.elastic00 || !amps.elastic01 || !amps.inelastic00 || !amps.inelastic01)
    throw PreconditionError("all four scattering amplitudes are required");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(k::k_B * T / m));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  // Per sample: 2 n |v_rel| * 4 pi <F>_direction, with F the amplitude
  // combination; the outgoing direction is uniform on the sphere.
  const double mu = 0.5 * m;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    double vr2 = 0.0;
    double vrel[3];
    for (double& c : vrel) {
      c = gauss(rng) - gauss(rng);
      vr2 += c * c;
    }
    const double vr = std::sqrt(vr2);
    const double kin = mu * vr / k::hbar;
    const double kout2 = kin * kin + 2.0 * mu * amps.inelastic_release / (k::hbar * k::hbar);
    const double kout = std::sqrt(std::max(kout2, 0.0));
    // Scattering angle against the incoming relative direction.
    const double cz = unit(rng);
    const Kinematics el{kin, kin, cz};
    const Kinematics in{kin, kout, cz};
    const std::complex<double> fe = amps.elastic00(el) - amps.elastic01(el);
    const std::complex<double> f0 = amps.inelastic00(in), f1 = amps.inelastic01(in);
    const double flux = kin > 0.0 ? kout / kin : 0.0;
    const double F = std::norm(fe) + flux * (std::norm(f0) + std::norm(f1));
    if (!std::isfinite(F)) {
      std::ostringstream os;
      os << "non-finite scattering amplitude at k_in=" << kin << " 1/m, k_out=" << kout << " 1/m, cos(theta)=" << cz;
      throw NumericalError(os.str());
    }
    const double x = 2.0 * n * vr * 4.0 * k::pi * F;
    sum += x;
    sum2 += x * x;
  }
  const double N = double(samples);
  const double mean = sum / N;
  const double var = std::max(0.0, (sum2 / N - mean * mean)) * N / (N - 1.0);
  return {mean, std::sqrt(var / N), samples};
}

ErrorBudget gate_error_budget(const EnsembleSpec& e, double G, double kappa, double gap, double m,
                              const UnitSystem& u) {
  positive(e.temperature, "temperature");
  positive(e.trap_omega, "trap frequency");
  positive(G, "collective coupling");
  positive(kappa, "cavity decay");
  positive(gap, "electrode distance");
  positive(m, "mass");
  if (e.alpha < 0.0 || e.mismatch < 0.0) throw PreconditionError("alpha and trap mismatch must be non-negative");
  const double kT = u.k_B * e.temperature;
  const double w2 = e.trap_omega * e.trap_omega;
  const double dw2 = e.mismatch * w2;
  ErrorBudget b;
  b.thermal = e.alpha * e.alpha * kT / (m * w2 * gap * gap);
  b.mismatch = std::pow(kT * dw2 * kappa / (u.hbar * G * G * w2), 2.0 / 3.0);
  b.total = b.thermal + b.mismatch;
  b.optimal_detuning = std::cbrt(3.0 * G * G * std::pow(kT * dw2, 2) / (kappa * w2 * w2 * u.hbar * u.hbar));
  return b;
}

const Quantity& EstimateReport::result(const std::string& name) const {
  for (const Quantity& q : results)
    if (q.name == name) return q;
  throw PreconditionError("estimate report '" + formula + "' has no result '" + name + "'");
}

}  // namespace hybridq
