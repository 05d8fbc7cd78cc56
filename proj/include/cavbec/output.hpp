#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cavbec/dynamics.hpp"
#include "cavbec/model.hpp"
#include "cavbec/spectra.hpp"
#include "cavbec/steadystate.hpp"
#include "cavbec/thermo.hpp"
#include "cavbec/validate.hpp"

namespace cavbec {

inline constexpr const char* tool_version = "0.3.0";

/// "%.10e", or "nan".
std::string format_number(double v);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Everything that goes into the `#` header of an output file.
struct Provenance {
  std::string command;  // e.g. "cavbec spectrum --config ..."
  const PhysicalParams* params = nullptr;
  const DerivedCouplings* couplings = nullptr;
  KeyValues modes;  // noise, momentum, normalization, ...
};

void write_header(std::ostream& os, const Provenance& p);

void write_couplings(std::ostream& os, const System& sys);

struct BranchRow {
  double delta0 = 0;
  BranchSet set;
};
void write_branches(std::ostream& os, const std::vector<BranchRow>& rows);
void write_operating_point(std::ostream& os, const OperatingPoint& op, Stability s);

void write_series(std::ostream& os, const SpectrumSeries& series);

enum class MapLayout { long_form, matrix };
MapLayout parse_layout(const std::string& s);

/// values[i][j] belongs to (outer[i], omega[j]).
struct SpectrumMap {
  std::string outer_name;  // "delta" or "zeta"
  std::vector<double> outer;
  std::vector<double> omega;
  std::vector<std::vector<double>> values;
  std::vector<bool> stable;
};
void write_map(std::ostream& os, const SpectrumMap& map, MapLayout layout);

void write_temperature(std::ostream& os, const TemperatureCurve& curve);

void write_matrices(std::ostream& os, const DriftMatrix& K, const DiffusionMatrix& D);

/// Aligned text table.
void write_cross_check_text(std::ostream& os, const CrossCheckReport& rep);
/// CSV rows: method,quantity,value,reference,tolerance,pass
void write_cross_check_rows(std::ostream& os, const CrossCheckReport& rep);

}  // namespace cavbec
