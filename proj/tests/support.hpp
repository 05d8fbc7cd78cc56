#pragma once

#include <filesystem>
#include <string>

#include "cavbec/config.hpp"
#include "cavbec/model.hpp"

namespace fixture {

inline std::filesystem::path source_dir() { return CAVBEC_SOURCE_DIR; }

inline cavbec::System config(const std::string& name) {
  return cavbec::System::from(cavbec::load_params(source_dir() / "configs" / (name + ".json")));
}

// Empty-cavity set at the given kappa (rad/s), w_b = w_m, zeta = 0.
inline cavbec::PhysicalParams paper_params(double kappa) {
  cavbec::PhysicalParams p;
  p.cavity_length = 0.025;
  p.mirror_mass = 15e-12;
  p.mirror_freq = 2 * cavbec::constants::pi * 275e3;
  p.quality_factor = 1e5;
  p.bath_temperature = 300;
  p.cavity_decay = kappa;
  p.pump_wavelength = 1064e-9;
  p.pump_power = 4e-3;
  p.bogoliubov_freq = p.mirror_freq;
  return p;
}

inline constexpr double kappa_shipped = 2 * cavbec::constants::pi * 5e6;

inline cavbec::System paper(double zeta_ratio = 0, double kappa = kappa_shipped) {
  auto sys = cavbec::System::from(paper_params(kappa));
  return zeta_ratio == 0 ? sys : sys.with_zeta(zeta_ratio * sys.mirror_rate());
}

}  // namespace fixture
