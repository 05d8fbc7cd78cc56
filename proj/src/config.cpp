#include "cavbec/config.hpp"

#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>

#include "cavbec/error.hpp"

namespace cavbec {

namespace {

using nlohmann::json;

constexpr double kTwoPi = 2 * constants::pi;

// One physical quantity may be spelled with several unit variants; at most
// one of them may appear in a file.
struct Variant {
  const char* key;
  double scale;  // multiplies the file value into the internal unit
};

class Reader {
 public:
  explicit Reader(const json& doc) : doc_(doc) {
    if (!doc_.is_object()) throw ConfigError("config: top level must be a JSON object");
  }

  std::optional<double> optional(std::initializer_list<Variant> variants) {
    const Variant* found = nullptr;
    for (const auto& v : variants) {
      seen_.insert(v.key);
      if (!doc_.contains(v.key)) continue;
      if (found) {
        throw ConfigError(std::string("config: keys `") + found->key + "` and `" + v.key +
                          "` set the same quantity; keep one");
      }
      found = &v;
    }
    if (!found) return std::nullopt;
    const auto& value = doc_.at(found->key);
    if (!value.is_number()) {
      throw ConfigError(std::string("config: `") + found->key + "` must be a number");
    }
    return value.get<double>() * found->scale;
  }

  double required(std::initializer_list<Variant> variants) {
    if (auto v = optional(variants)) return *v;
    std::string names;
    for (const auto& v : variants) {
      if (!names.empty()) names += " | ";
      names += std::string("`") + v.key + "`";
    }
    throw ConfigError("config: missing required key " + names);
  }

  std::optional<double> ratio(const char* key) { return optional({{key, 1.0}}); }

  void allow(const char* key) { seen_.insert(key); }

  void reject_unknown() const {
    for (const auto& item : doc_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError("config: unknown key `" + item.key() + "`");
      }
    }
  }

 private:
  const json& doc_;
  std::set<std::string> seen_;
};

}  // namespace

PhysicalParams params_from_json(const json& doc) {
  Reader r(doc);
  r.allow("description");
  PhysicalParams p;
  p.cavity_length = r.required({{"cavity_length_m", 1.0}});
  p.mirror_mass = r.required({{"mirror_mass_kg", 1.0}});
  p.mirror_freq = r.required({{"mirror_freq_hz", kTwoPi}, {"mirror_freq_rad_s", 1.0}});

  auto q = r.optional({{"quality_factor", 1.0}});
  auto gamma = r.optional({{"mirror_damping_hz", kTwoPi}, {"mirror_damping_rad_s", 1.0}});
  if (q && gamma) {
    throw ConfigError("config: set exactly one of `quality_factor` / `mirror_damping_*`");
  }
  if (!q && !gamma) {
    throw ConfigError("config: missing required key `quality_factor` | `mirror_damping_hz` | "
                      "`mirror_damping_rad_s`");
  }
  p.quality_factor = q;
  p.mirror_damping = gamma;

  p.bath_temperature = r.required({{"bath_temperature_k", 1.0}});
  p.cavity_decay = r.required({{"kappa_hz", kTwoPi}, {"kappa_rad_s", 1.0}});
  p.pump_wavelength = r.required({{"pump_wavelength_m", 1.0}});
  p.pump_power = r.required({{"pump_power_w", 1.0}});
  p.mirror_coupling_override = r.optional({{"mirror_coupling_rad_s_m", 1.0}});
  p.condensate_pull =
      r.optional({{"condensate_pull_hz", kTwoPi}, {"condensate_pull_rad_s", 1.0}}).value_or(0.0);

  // Bogoliubov frequency: absolute, or relative to the mirror frequency.
  auto wb = r.optional({{"bogoliubov_freq_hz", kTwoPi}, {"bogoliubov_freq_rad_s", 1.0}});
  auto wb_ratio = r.ratio("bogoliubov_mirror_ratio");
  if (wb && wb_ratio) throw ConfigError("config: `bogoliubov_mirror_ratio` conflicts with `bogoliubov_freq_*`");
  if (!wb && !wb_ratio) {
    throw ConfigError("config: missing required key `bogoliubov_freq_hz` | `bogoliubov_freq_rad_s` | "
                      "`bogoliubov_mirror_ratio`");
  }
  p.bogoliubov_freq = wb ? *wb : *wb_ratio * p.mirror_freq;

  // zeta: absolute, or relative to the single-phonon mirror coupling chi * x_zpf.
  auto zeta = r.optional({{"zeta_hz", kTwoPi}, {"zeta_rad_s", 1.0}});
  auto zeta_ratio = r.ratio("zeta_chi_xzpf_ratio");
  if (zeta && zeta_ratio) throw ConfigError("config: `zeta_chi_xzpf_ratio` conflicts with `zeta_*`");
  if (!zeta && !zeta_ratio) {
    throw ConfigError("config: missing required key `zeta_hz` | `zeta_rad_s` | `zeta_chi_xzpf_ratio`");
  }
  r.reject_unknown();

  if (zeta) {
    p.atom_cavity_rate = *zeta;
  } else {
    p.atom_cavity_rate = 0;
    const auto d = derive_couplings(p);
    p.atom_cavity_rate = *zeta_ratio * d.chi * d.x_zpf;
  }

  if (auto v = validate(p); !v.empty()) {
    throw InvalidParameter(v.front().field, v.front().constraint);
  }
  return p;
}

PhysicalParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return params_from_json(doc);
}

std::vector<std::pair<std::string, double>> describe_params(const PhysicalParams& p) {
  std::vector<std::pair<std::string, double>> out = {
      {"cavity_length_m", p.cavity_length},
      {"mirror_mass_kg", p.mirror_mass},
      {"mirror_freq_rad_s", p.mirror_freq},
  };
  if (p.quality_factor) out.emplace_back("quality_factor", *p.quality_factor);
  if (p.mirror_damping) out.emplace_back("mirror_damping_rad_s", *p.mirror_damping);
  out.insert(out.end(), {
                            {"bath_temperature_k", p.bath_temperature},
                            {"kappa_rad_s", p.cavity_decay},
                            {"pump_wavelength_m", p.pump_wavelength},
                            {"pump_power_w", p.pump_power},
                            {"bogoliubov_freq_rad_s", p.bogoliubov_freq},
                            {"zeta_rad_s", p.atom_cavity_rate},
                            {"condensate_pull_rad_s", p.condensate_pull},
                        });
  if (p.mirror_coupling_override) {
    out.emplace_back("mirror_coupling_rad_s_m", *p.mirror_coupling_override);
  }
  return out;
}

std::vector<std::pair<std::string, double>> describe_couplings(const DerivedCouplings& d) {
  return {
      {"omega_laser_rad_s", d.omega_laser},
      {"omega_cavity_rad_s", d.omega_cavity},
      {"chi_rad_s_m", d.chi},
      {"eta_rad_s", d.eta},
      {"x_zpf_m", d.x_zpf},
      {"p_zpf_kg_m_s", d.p_zpf},
      {"gamma_rad_s", d.gamma},
      {"thermal_occupancy", d.thermal_occupancy},
      {"classical_occupancy", d.classical_occupancy},
  };
}

}  // namespace cavbec
