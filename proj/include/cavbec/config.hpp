#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cavbec/model.hpp"

namespace cavbec {

/// Parses a parameter file. Keys are snake_case with a unit suffix
/// (`mirror_mass_kg`, `kappa_hz`, `kappa_rad_s`, ...). `*_hz` values are
/// multiplied by 2 pi. Unknown keys, duplicate unit variants and missing
/// required keys raise ConfigError naming the key.
PhysicalParams params_from_json(const nlohmann::json& doc);

PhysicalParams load_params(const std::filesystem::path& path);

/// Canonical (key, value) listing of a parameter set in SI / rad/s keys, in
/// a fixed order. Used for provenance headers.
std::vector<std::pair<std::string, double>> describe_params(const PhysicalParams& params);

std::vector<std::pair<std::string, double>> describe_couplings(const DerivedCouplings& couplings);

}  // namespace cavbec
