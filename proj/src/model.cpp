#include "cavbec/model.hpp"

#include <cmath>

#include "cavbec/error.hpp"

namespace cavbec {

namespace {

bool positive(double v) { return std::isfinite(v) && v > 0; }

void require_positive(std::vector<Violation>& out, const char* field, double v) {
  if (!positive(v)) out.push_back({field, "must be finite and > 0"});
}

}  // namespace

std::vector<Violation> validate(const PhysicalParams& p) {
  std::vector<Violation> out;
  require_positive(out, "cavity_length", p.cavity_length);
  require_positive(out, "mirror_mass", p.mirror_mass);
  require_positive(out, "mirror_freq", p.mirror_freq);
  require_positive(out, "bath_temperature", p.bath_temperature);
  require_positive(out, "cavity_decay", p.cavity_decay);
  require_positive(out, "pump_wavelength", p.pump_wavelength);

  if (p.quality_factor && p.mirror_damping) {
    out.push_back({"quality_factor", "exactly one of quality_factor / mirror_damping may be set"});
  } else if (!p.quality_factor && !p.mirror_damping) {
    out.push_back({"quality_factor", "one of quality_factor / mirror_damping is required"});
  } else if (p.quality_factor) {
    require_positive(out, "quality_factor", *p.quality_factor);
  } else {
    require_positive(out, "mirror_damping", *p.mirror_damping);
  }

  if (!(std::isfinite(p.pump_power) && p.pump_power >= 0)) {
    out.push_back({"pump_power", "must be finite and >= 0"});
  }
  if (!(std::isfinite(p.atom_cavity_rate) && p.atom_cavity_rate >= 0)) {
    out.push_back({"atom_cavity_rate", "must be finite and >= 0"});
  }
  // A Bogoliubov frequency of zero is only meaningful for a decoupled mode.
  if (!(std::isfinite(p.bogoliubov_freq) && p.bogoliubov_freq >= 0)) {
    out.push_back({"bogoliubov_freq", "must be finite and >= 0"});
  } else if (p.bogoliubov_freq == 0 && p.atom_cavity_rate > 0) {
    out.push_back({"bogoliubov_freq", "must be > 0 when atom_cavity_rate > 0"});
  }
  if (p.mirror_coupling_override &&
      !(std::isfinite(*p.mirror_coupling_override) && *p.mirror_coupling_override >= 0)) {
    out.push_back({"mirror_coupling_override", "must be finite and >= 0"});
  }
  if (!std::isfinite(p.condensate_pull)) {
    out.push_back({"condensate_pull", "must be finite"});
  }
  return out;
}

double mirror_damping_rate(const PhysicalParams& p) {
  if (p.mirror_damping) return *p.mirror_damping;
  if (p.quality_factor) return p.mirror_freq / *p.quality_factor;
  throw InvalidParameter("quality_factor", "one of quality_factor / mirror_damping is required");
}

DerivedCouplings derive_couplings(const PhysicalParams& p) {
  if (auto v = validate(p); !v.empty()) {
    throw InvalidParameter(v.front().field, v.front().constraint);
  }
  using namespace constants;
  DerivedCouplings d;
  d.omega_laser = 2 * pi * c / p.pump_wavelength;
  d.omega_cavity = d.omega_laser;
  d.chi = p.mirror_coupling_override ? *p.mirror_coupling_override
                                     : d.omega_cavity / p.cavity_length;
  d.eta = std::sqrt(2 * p.cavity_decay * p.pump_power / (hbar * d.omega_laser));
  d.x_zpf = std::sqrt(hbar / (p.mirror_mass * p.mirror_freq));
  d.p_zpf = std::sqrt(hbar * p.mirror_mass * p.mirror_freq);
  d.gamma = mirror_damping_rate(p);
  const double ratio = hbar * p.mirror_freq / (k_B * p.bath_temperature);
  d.thermal_occupancy = 1 / std::expm1(ratio);
  d.classical_occupancy = 1 / ratio;
  return d;
}

System System::with_zeta(double zeta) const {
  PhysicalParams p = params;
  p.atom_cavity_rate = zeta;
  return from(p);
}

System System::with_bogoliubov_freq(double omega) const {
  PhysicalParams p = params;
  p.bogoliubov_freq = omega;
  return from(p);
}

System System::with_chi(double chi) const {
  PhysicalParams p = params;
  p.mirror_coupling_override = chi;
  return from(p);
}

System System::with_power(double watts) const {
  PhysicalParams p = params;
  p.pump_power = watts;
  return from(p);
}

}  // namespace cavbec
