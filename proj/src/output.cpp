#include "cavbec/output.hpp"

#include <cmath>
#include <cstdio>

#include "cavbec/config.hpp"
#include "cavbec/error.hpp"

namespace cavbec {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

void write_header(std::ostream& os, const Provenance& p) {
  os << "# cavbec " << tool_version << '\n';
  os << "# command: " << p.command << '\n';
  if (p.params) {
    for (const auto& [k, v] : describe_params(*p.params)) os << "# param " << k << " = " << format_number(v) << '\n';
  }
  if (p.couplings) {
    for (const auto& [k, v] : describe_couplings(*p.couplings)) os << "# derived " << k << " = " << format_number(v) << '\n';
  }
  for (const auto& [k, v] : p.modes) os << "# mode " << k << " = " << v << '\n';
}

void write_couplings(std::ostream& os, const System& sys) {
  const auto& c = sys.couplings;
  struct Row {
    const char* name;
    double value;
    const char* unit;
  };
  const Row rows[] = {
      {"omega_laser", c.omega_laser, "rad/s"},
      {"omega_cavity", c.omega_cavity, "rad/s"},
      {"chi", c.chi, "rad/s/m"},
      {"eta", c.eta, "1/s"},
      {"x_zpf", c.x_zpf, "m"},
      {"p_zpf", c.p_zpf, "kg m/s"},
      {"gamma", c.gamma, "rad/s"},
      {"thermal_occupancy", c.thermal_occupancy, "1"},
      {"classical_occupancy", c.classical_occupancy, "1"},
      {"kappa", sys.kappa(), "rad/s"},
      {"omega_m", sys.omega_m(), "rad/s"},
      {"omega_b", sys.omega_b(), "rad/s"},
      {"zeta", sys.zeta(), "rad/s"},
      {"chi_xzpf", sys.mirror_rate(), "rad/s"},
  };
  os << "quantity,value,unit\n";
  for (const auto& r : rows) os << r.name << ',' << format_number(r.value) << ',' << r.unit << '\n';
}

namespace {

void point_fields(std::ostream& os, const OperatingPoint& op) {
  os << format_number(op.delta) << ',' << format_number(op.alpha_s) << ',' << format_number(op.q_s) << ','
     << format_number(op.Q_s) << ',' << format_number(op.G_m) << ',' << format_number(op.G_a);
}

}  // namespace

void write_branches(std::ostream& os, const std::vector<BranchRow>& rows) {
  os << "delta0,branch,delta,alpha_s,q_s,Q_s,G_m,G_a,stability\n";
  for (const auto& r : rows) {
    for (std::size_t b = 0; b < r.set.branches.size(); ++b) {
      os << format_number(r.delta0) << ',' << b << ',';
      point_fields(os, r.set.branches[b].point);
      os << ',' << to_string(r.set.branches[b].stability) << '\n';
    }
  }
}

void write_operating_point(std::ostream& os, const OperatingPoint& op, Stability s) {
  os << "delta,alpha_s,q_s,Q_s,G_m,G_a,stability\n";
  point_fields(os, op);
  os << ',' << to_string(s) << '\n';
}

void write_series(std::ostream& os, const SpectrumSeries& series) {
  os << "omega,S_" << to_string(series.observable) << '\n';
  for (std::size_t i = 0; i < series.omega.size(); ++i) {
    os << format_number(series.omega[i]) << ',' << format_number(series.value[i]) << '\n';
  }
}

MapLayout parse_layout(const std::string& s) {
  if (s == "long") return MapLayout::long_form;
  if (s == "matrix") return MapLayout::matrix;
  throw ConfigError("unknown layout `" + s + "` (long|matrix)");
}

void write_map(std::ostream& os, const SpectrumMap& map, MapLayout layout) {
  if (layout == MapLayout::long_form) {
    os << map.outer_name << ",omega,S,stable\n";
    for (std::size_t i = 0; i < map.outer.size(); ++i) {
      for (std::size_t j = 0; j < map.omega.size(); ++j) {
        os << format_number(map.outer[i]) << ',' << format_number(map.omega[j]) << ','
           << format_number(map.values[i][j]) << ',' << (map.stable[i] ? 1 : 0) << '\n';
      }
    }
    return;
  }
  os << map.outer_name << "\\omega";
  for (double w : map.omega) os << ',' << format_number(w);
  os << '\n';
  for (std::size_t i = 0; i < map.outer.size(); ++i) {
    os << format_number(map.outer[i]);
    for (double v : map.values[i]) os << ',' << format_number(v);
    os << '\n';
  }
}

void write_temperature(std::ostream& os, const TemperatureCurve& curve) {
  os << "sweep_value,T_eff_K,var_q,var_p,stable\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    const auto& p = curve.points[i];
    os << format_number(curve.grid[i]) << ',' << format_number(p.t_eff) << ',' << format_number(p.var_q) << ','
       << format_number(p.var_p) << ',' << (curve.stable[i] ? 1 : 0) << '\n';
  }
}

void write_matrices(std::ostream& os, const DriftMatrix& K, const DiffusionMatrix& D) {
  auto block = [&](const char* name, const Matrix6& M) {
    os << "matrix,row," << basis::header() << '\n';
    for (int i = 0; i < basis::size; ++i) {
      os << name << ',' << basis::names[i];
      for (int j = 0; j < basis::size; ++j) os << ',' << format_number(M(i, j));
      os << '\n';
    }
  };
  block("K", K.K);
  block("D", D.D);
}

void write_cross_check_text(std::ostream& os, const CrossCheckReport& rep) {
  char line[200];
  std::snprintf(line, sizeof line, "%-12s %-8s %18s %18s %14s  %s\n", "method", "quantity", "value", "reference",
                "tolerance", "result");
  os << line;
  for (const auto& r : rep.rows) {
    std::snprintf(line, sizeof line, "%-12s %-8s %18s %18s %14s  %s\n", r.method.c_str(), r.quantity.c_str(),
                  format_number(r.value).c_str(), format_number(r.reference).c_str(),
                  format_number(r.tolerance).c_str(), std::isnan(r.reference) ? "-" : (r.pass ? "pass" : "FAIL"));
    os << line;
  }
  os << (rep.passed() ? "all checks passed\n" : "cross-check FAILED\n");
}

void write_cross_check_rows(std::ostream& os, const CrossCheckReport& rep) {
  os << "method,quantity,value,reference,tolerance,pass\n";
  for (const auto& r : rep.rows) {
    os << r.method << ',' << r.quantity << ',' << format_number(r.value) << ',' << format_number(r.reference)
       << ',' << format_number(r.tolerance) << ',' << (r.pass ? 1 : 0) << '\n';
  }
}

}  // namespace cavbec
