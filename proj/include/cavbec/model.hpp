#pragma once

#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace cavbec {

namespace constants {
inline constexpr double hbar = 1.054571817e-34;  // J s
inline constexpr double k_B = 1.380649e-23;      // J / K
inline constexpr double c = 2.99792458e8;        // m / s
inline constexpr double pi = std::numbers::pi;
}  // namespace constants

/// Experimental inputs, SI units. Every frequency and rate is angular (rad/s).
struct PhysicalParams {
  double cavity_length = 0;  // m
  double mirror_mass = 0;    // kg
  double mirror_freq = 0;    // rad/s
  // Exactly one of the two must be set; gamma = mirror_freq / quality_factor.
  std::optional<double> quality_factor;
  std::optional<double> mirror_damping;  // rad/s
  double bath_temperature = 0;           // K
  double cavity_decay = 0;               // kappa, rad/s
  double pump_wavelength = 0;            // m
  double pump_power = 0;                 // W
  double bogoliubov_freq = 0;            // rad/s
  double atom_cavity_rate = 0;           // zeta, rad/s
  // Replaces chi = omega_C / L when set (rad s^-1 m^-1).
  std::optional<double> mirror_coupling_override;
  // g^2 N0 / 2 Delta_a; only enters the bare-detuning cubic.
  double condensate_pull = 0;  // rad/s
};

struct Violation {
  std::string field;
  std::string constraint;
};

/// Empty iff every invariant of PhysicalParams holds.
std::vector<Violation> validate(const PhysicalParams& params);

struct DerivedCouplings {
  double omega_laser = 0;   // 2 pi c / lambda
  double omega_cavity = 0;  // approximated by omega_laser
  double chi = 0;           // rad s^-1 m^-1
  double eta = 0;           // rad/s
  double x_zpf = 0;         // m
  double p_zpf = 0;         // kg m / s
  double gamma = 0;         // rad/s
  double thermal_occupancy = 0;    // Bose factor at mirror_freq
  double classical_occupancy = 0;  // k_B T / (hbar w_m)
};

/// Throws InvalidParameter naming the first offending field.
DerivedCouplings derive_couplings(const PhysicalParams& params);

/// Mirror damping rate implied by whichever of Q / gamma was given.
double mirror_damping_rate(const PhysicalParams& params);

/// Physical params together with their derived couplings; the shape most
/// operations consume.
struct System {
  PhysicalParams params;
  DerivedCouplings couplings;

  static System from(const PhysicalParams& params) {
    return {params, derive_couplings(params)};
  }
  double kappa() const { return params.cavity_decay; }
  double omega_m() const { return params.mirror_freq; }
  double omega_b() const { return params.bogoliubov_freq; }
  double zeta() const { return params.atom_cavity_rate; }
  /// chi * x_zpf, the single-phonon mirror coupling (rad/s).
  double mirror_rate() const { return couplings.chi * couplings.x_zpf; }

  System with_zeta(double zeta) const;
  System with_bogoliubov_freq(double omega) const;
  System with_chi(double chi) const;
  System with_power(double watts) const;
};

}  // namespace cavbec
