#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hybridq {

// Constants of a coherent unit system. Estimators take their inputs in the
// base units of the system they are given (SI: m, kg, s, C m; Gaussian CGS:
// cm, g, s, statC cm) and return results in the same system.
struct UnitSystem {
  double hbar;
  double k_B;
  double coulomb;  // 1 / (4 pi epsilon0); 1 in Gaussian units

  static UnitSystem si();
  static UnitSystem gaussian();
};

// Quantities in SI (angular frequencies in rad/s, lengths in m, mass in kg).
struct MoleculeSpec {
  std::string name;
  double dipole = 0.0;           // C m
  double rotational = 0.0;       // B, rad/s
  double spin_rotation = 0.0;    // gamma_sr, rad/s
  double hyperfine = 0.0;        // b, rad/s
  double mass = 0.0;             // kg
  double nuclear_spin = 0.0;     // I
  std::string reference;         // where the constants come from
};

struct CavitySpec {
  double omega = 0.0;   // rad/s
  double gap = 0.0;     // electrode distance d, m
  double length = 0.0;  // L, m
  double kappa = 0.0;   // rad/s
};

struct EnsembleSpec {
  double density = 0.0;      // m^-3
  double temperature = 0.0;  // K
  double count = 0.0;        // N
  double trap_omega = 0.0;   // omega_t, rad/s
  double mismatch = 0.0;     // delta omega^2 / omega_t^2
  double alpha = 0.0;        // coupling gradient across the trap
};

// sqrt(hbar omega_c / (2 pi epsilon0 d^2 L)), the field per photon.
double field_per_photon(const CavitySpec& cavity, const UnitSystem& u = UnitSystem::si());

// g = mu E_c / hbar (rad/s).
double vacuum_rabi(double dipole, const CavitySpec& cavity, const UnitSystem& u = UnitSystem::si());

struct RamanCouplings {
  double omega_eff;  // Omega_1 Omega_2 / 2 Delta
  double g_eff;      // g Omega / 2 Delta
  double g_m;        // sqrt(N) g_eff
  bool valid;        // false unless |Delta| exceeds every drive
};
RamanCouplings raman_couplings(double g, double omega, double omega1, double omega2, double delta, double count);

// N = n d^2 lambda / 10
double molecule_count(double density, double gap, double wavelength);

struct RotationalLevel {
  int N;
  double J;
  double F;  // negative when hyperfine is not resolved
  double energy;  // rad/s
};
// Rigid rotor + spin rotation for a 2Sigma_1/2 molecule; the N = 0 level
// split into F = I +- 1/2 by b I.J (F = I+1/2 at b I/2, F = I-1/2 at
// -b (I+1)/2).
std::vector<RotationalLevel> rotational_spectrum(const MoleculeSpec& mol, int n_max);

struct VanDerWaals {
  double c6;          // J m^6 in SI
  double range;       // R_*, m
};
// C6 = (mu^2 / 4 pi eps0)^2 / (6 B), R_* = (m C6 / hbar^2)^(1/4), full mass.
VanDerWaals c6_and_range(double dipole, double rotational, double mass, const UnitSystem& u = UnitSystem::si());

// Mean relative speed of two identical thermal particles, sqrt(16 kT / pi m).
double mean_relative_speed(double temperature, double mass, const UnitSystem& u = UnitSystem::si());

// Height of the l-wave barrier on -C6/r^6 + hbar^2 l (l+1) / (m r^2).
double barrier_height(int l, double c6, double mass, const UnitSystem& u = UnitSystem::si());

// Temperature at which the p-wave barrier of a molecule with range R_*
// equals k_B T.
double swave_threshold(double range, double mass, const UnitSystem& u = UnitSystem::si());

struct Rate {
  double value;        // s^-1
  bool in_regime;      // the formula's validity condition held
  int partial_waves;   // l_max + 1 where meaningful
};

// 8 pi a^2 n v (s^-1); in_regime when T <= the s-wave threshold of a.
Rate collision_rate_swave(double scattering_length, double density, double temperature, double mass,
                          const UnitSystem& u = UnitSystem::si());

// n v sigma with sigma = 4 pi / k^2 sum_{l <= l_max} (2l + 1), k the
// relative wavenumber at the mean relative speed, l_max the largest l with
// barrier below k_B T.
Rate collision_rate_unitarity(double density, double temperature, double mass, double range,
                              const UnitSystem& u = UnitSystem::si());

// 8 pi (a00 - a01)^2 n v
Rate dephasing_rate_swave(double a00, double a01, double density, double temperature, double mass,
                          const UnitSystem& u = UnitSystem::si());

// Thermal Monte Carlo of the dephasing integral. Amplitudes take the
// relative wavenumbers before/after and the scattering angle cosine.
struct Kinematics {
  double k_in;
  double k_out;
  double cos_theta;
};
using Amplitude = std::function<std::complex<double>(const Kinematics&)>;

struct ScatteringAmplitudes {
  Amplitude elastic00, elastic01, inelastic00, inelastic01;
  double inelastic_release = 0.0;  // internal energy released in the inelastic channels, J
};

struct MonteCarloEstimate {
  double mean;            // s^-1
  double standard_error;  // s^-1
  std::size_t samples;
};
MonteCarloEstimate gamma10_montecarlo(const ScatteringAmplitudes& amps, double density, double temperature,
                                      double mass, std::size_t samples, std::uint64_t seed);

struct ErrorBudget {
  double thermal;      // alpha^2 k_B T / (m omega_t^2 d^2)
  double mismatch;     // (k_B T dw^2 kappa / (hbar g^2 N omega_t^2))^(2/3)
  double total;
  double optimal_detuning;  // Delta_*, rad/s
};
ErrorBudget gate_error_budget(const EnsembleSpec& ens, double collective_coupling, double kappa, double gap,
                              double mass, const UnitSystem& u = UnitSystem::si());

// ---------------------------------------------------------------------------
// Report form for tabular output.

struct Quantity {
  std::string name;
  double value;
  std::string unit;
};

struct EstimateReport {
  std::string formula;
  std::vector<Quantity> inputs;
  std::vector<Quantity> results;
  std::vector<std::string> flags;

  const Quantity& result(const std::string& name) const;
};

}  // namespace hybridq
