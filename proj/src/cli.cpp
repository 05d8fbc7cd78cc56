#include "cavbec/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "cavbec/config.hpp"
#include "cavbec/dynamics.hpp"
#include "cavbec/error.hpp"
#include "cavbec/output.hpp"
#include "cavbec/parallel.hpp"
#include "cavbec/spectra.hpp"
#include "cavbec/steadystate.hpp"
#include "cavbec/thermo.hpp"
#include "cavbec/validate.hpp"

namespace cavbec {

namespace {

class ExprParser {
 public:
  ExprParser(const std::string& text, const System& sys) : s_(text), sys_(sys) {}

  double parse() {
    const double v = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected `" + s_.substr(pos_) + "`");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError("bad expression `" + s_ + "`: " + why);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  double sum() {
    double v = product();
    for (;;) {
      if (eat('+')) {
        v += product();
      } else if (eat('-')) {
        v -= product();
      } else {
        return v;
      }
    }
  }
  double product() {
    double v = unary();
    for (;;) {
      if (eat('*')) {
        v *= unary();
      } else if (eat('/')) {
        v /= unary();
      } else {
        return v;
      }
    }
  }
  double unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return atom();
  }
  double atom() {
    skip();
    if (eat('(')) {
      const double v = sum();
      if (!eat(')')) fail("missing `)`");
      return v;
    }
    if (pos_ >= s_.size()) fail("unexpected end");
    if (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_') {
      std::size_t end = pos_;
      while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_')) ++end;
      const std::string name = s_.substr(pos_, end - pos_);
      pos_ = end;
      return symbol(name);
    }
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc()) fail("expected a number or symbol");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }
  double symbol(const std::string& name) const {
    if (name == "kappa") return sys_.kappa();
    if (name == "omega_m") return sys_.omega_m();
    if (name == "omega_b") return sys_.omega_b();
    if (name == "zeta") return sys_.zeta();
    if (name == "chi_xzpf") return sys_.mirror_rate();
    if (name == "gamma") return sys_.couplings.gamma;
    if (name == "pi") return constants::pi;
    fail("unknown symbol `" + name + "`");
  }

  std::string s_;
  const System& sys_;
  std::size_t pos_ = 0;
};

std::string quote(const std::string& a) {
  const bool plain = !a.empty() && std::all_of(a.begin(), a.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || std::string_view("-_./:=*+,").find(c) != std::string_view::npos;
  });
  return plain ? a : "'" + a + "'";
}

struct Globals {
  std::string config;
  std::string out;
  unsigned threads = 1;
  std::uint64_t seed = 1;
  std::string noise = "symmetrized";
  std::string momentum = "paper";
};

struct Fixes {
  std::optional<std::string> delta, zeta, omega_b;
};

Fixes parse_fixes(const std::vector<std::string>& items) {
  Fixes f;
  for (const auto& it : items) {
    const auto eq = it.find('=');
    if (eq == std::string::npos) throw ConfigError("--fix expects key=value, got `" + it + "`");
    const std::string key = it.substr(0, eq);
    const std::string val = it.substr(eq + 1);
    if (key == "delta") {
      f.delta = val;
    } else if (key == "zeta") {
      f.zeta = val;
    } else if (key == "omega_b") {
      f.omega_b = val;
    } else {
      throw ConfigError("--fix: unknown key `" + key + "` (delta|zeta|omega_b)");
    }
  }
  return f;
}

class Context {
 public:
  Context(const Globals& g, std::vector<std::string> args, std::ostream& out) : g_(g), args_(std::move(args)) {
    if (g.config.empty()) throw ConfigError("--config is required");
    base_ = System::from(load_params(g.config));
    noise_ = parse_noise_mode(g.noise);
    momentum_ = parse_momentum_mode(g.momentum);
    if (g.threads == 0) throw ConfigError("--threads must be >= 1");
    if (g.out.empty()) {
      os_ = &out;
    } else {
      file_ = std::make_unique<std::ofstream>(g.out);
      if (!*file_) throw ConfigError("cannot open output file `" + g.out + "`");
      os_ = file_.get();
    }
  }

  const System& base() const { return base_; }
  NoiseMode noise() const { return noise_; }
  MomentumMode momentum() const { return momentum_; }
  unsigned threads() const { return g_.threads; }
  std::uint64_t seed() const { return g_.seed; }
  std::ostream& os() { return *os_; }
  bool to_file() const { return file_ != nullptr; }

  double value(const std::string& e) const { return eval_expression(e, base_); }
  std::vector<double> grid(const std::string& e) const { return parse_grid(e, base_); }

  void header(const System& sys, KeyValues modes) {
    Provenance p;
    p.command = "cavbec";
    for (const auto& a : args_) p.command += " " + quote(a);
    p.params = &sys.params;
    p.couplings = &sys.couplings;
    modes.insert(modes.begin(), {{"noise", to_string(noise_)}, {"momentum", to_string(momentum_)}});
    p.modes = std::move(modes);
    write_header(*os_, p);
  }

  void finish() {
    os_->flush();
    if (file_ && !*file_) throw ConfigError("failed writing `" + g_.out + "`");
  }

 private:
  Globals g_;
  std::vector<std::string> args_;
  System base_;
  NoiseMode noise_ = NoiseMode::symmetrized;
  MomentumMode momentum_ = MomentumMode::paper;
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_ = nullptr;
};

System apply_chi_scale(const System& sys, std::optional<double> k) {
  if (!k) return sys;
  if (!(*k >= 0)) throw InvalidParameter("chi-scale", "must be >= 0");
  return sys.with_chi(*k * sys.couplings.omega_cavity / (2 * sys.params.cavity_length));
}

System apply_fixes(const Context& ctx, System sys, const Fixes& f) {
  if (f.zeta) sys = sys.with_zeta(ctx.value(*f.zeta));
  if (f.omega_b) sys = sys.with_bogoliubov_freq(ctx.value(*f.omega_b));
  return sys;
}

std::string fmt(double v) { return format_number(v); }

void cmd_derive(Context& ctx) {
  ctx.header(ctx.base(), {});
  write_couplings(ctx.os(), ctx.base());
}

struct SteadyArgs {
  std::string delta;
  std::string delta0;
};

void cmd_steady(Context& ctx, const SteadyArgs& a) {
  if (a.delta.empty() == a.delta0.empty()) throw ConfigError("steady: give exactly one of --delta or --delta0");
  const System& sys = ctx.base();
  if (!a.delta.empty()) {
    const auto op = operating_point_at_detuning(ctx.value(a.delta), sys.params, sys.couplings);
    const auto st = stability(build_drift_matrix(op, sys.params, sys.couplings)).coupled_classification;
    ctx.header(sys, {{"mode", "fixed-delta"}});
    write_operating_point(ctx.os(), op, st);
    return;
  }
  const auto grid = ctx.grid(a.delta0);
  std::vector<BranchRow> rows(grid.size());
  parallel_for(grid.size(), ctx.threads(),
               [&](std::size_t i) { rows[i] = {grid[i], solve_self_consistent(grid[i], sys.params, sys.couplings)}; });
  ctx.header(sys, {{"mode", "delta0-sweep"}});
  write_branches(ctx.os(), rows);
}

struct SpectrumArgs {
  std::string observable = "q";
  std::string omega = "0.5*omega_m:1.5*omega_m:400";
  std::string map = "none";
  std::string delta;
  std::string zeta;
  std::vector<std::string> fix;
  std::optional<double> chi_scale;
  bool normalize = false;
  std::string units = "zpf";
  std::string layout = "long";
};

// Spectrum row for one configuration; NaN where unstable or singular.
std::vector<double> spectrum_row(Observable obs, const std::vector<double>& omega, const System& sys, double delta,
                                 NoiseMode noise, MomentumMode momentum, double scale, bool& stable) {
  const auto op = operating_point_at_detuning(delta, sys.params, sys.couplings);
  std::vector<double> row(omega.size(), NAN);
  SpectralEngine engine(sys, op, NoiseModel::make(noise, sys.params, sys.couplings), momentum);
  stable = stability(engine.drift()).coupled_classification != Stability::unstable;
  if (!stable) return row;
  for (std::size_t j = 0; j < omega.size(); ++j) {
    try {
      row[j] = engine.dns(obs, omega[j]) * scale;
    } catch (const ResonanceSingularity&) {
    }
  }
  return row;
}

void cmd_spectrum(Context& ctx, const SpectrumArgs& a) {
  const Observable obs = parse_observable(a.observable);
  const Fixes fixes = parse_fixes(a.fix);
  const MapLayout layout = parse_layout(a.layout);
  if (a.units != "zpf" && a.units != "si") throw ConfigError("--units must be zpf or si");
  if (a.normalize && a.units == "si") throw ConfigError("--normalize and --units si are exclusive");
  if (a.delta.size() && fixes.delta) throw ConfigError("give --delta or --fix delta=..., not both");

  const System sys = apply_fixes(ctx, apply_chi_scale(ctx.base(), a.chi_scale), fixes);
  const auto omega = ctx.grid(a.omega);
  const std::string delta_text = fixes.delta ? *fixes.delta : a.delta;

  double scale = a.units == "si" ? si_scale(obs, sys.couplings) : 1.0;
  double reference = NAN;
  if (a.normalize) {
    reference = reference_level(obs, sys, ctx.noise(), ctx.momentum());
    scale = 1.0 / reference;
  }
  KeyValues modes = {{"observable", to_string(obs)},
                     {"units", a.normalize ? "normalized" : a.units},
                     {"normalization", a.normalize ? fmt(reference) : "none"},
                     {"map", a.map}};
  if (a.chi_scale) modes.push_back({"chi_scale", fmt(*a.chi_scale)});

  if (a.map == "none") {
    if (delta_text.empty()) throw ConfigError("spectrum: --delta (or --fix delta=...) is required");
    const double delta = ctx.value(delta_text);
    const auto op = operating_point_at_detuning(delta, sys.params, sys.couplings);
    if (stability(build_drift_matrix(op, sys.params, sys.couplings)).coupled_classification == Stability::unstable) {
      throw NoSteadyState("spectrum: operating point at delta = " + fmt(delta) + " rad/s is unstable");
    }
    SeriesOptions so;
    so.units = a.units == "si" ? SpectrumUnits::si : SpectrumUnits::zero_point;
    so.momentum = ctx.momentum();
    so.normalize = a.normalize;
    so.threads = ctx.threads();
    const auto series = spectrum_series(obs, omega, sys, op, ctx.noise(), so);
    modes.push_back({"delta", fmt(delta)});
    ctx.header(sys, modes);
    write_series(ctx.os(), series);
    return;
  }

  SpectrumMap map;
  map.omega = omega;
  std::vector<System> systems;
  std::vector<double> deltas;
  if (a.map == "omega-delta") {
    if (delta_text.empty()) throw ConfigError("spectrum: --map omega-delta needs a --delta grid");
    map.outer_name = "delta";
    map.outer = ctx.grid(delta_text);
    systems.assign(map.outer.size(), sys);
    deltas = map.outer;
  } else if (a.map == "omega-zeta") {
    if (a.zeta.empty()) throw ConfigError("spectrum: --map omega-zeta needs a --zeta grid");
    if (delta_text.empty()) throw ConfigError("spectrum: --map omega-zeta needs --fix delta=...");
    if (fixes.zeta) throw ConfigError("spectrum: zeta cannot be both swept and fixed");
    map.outer_name = "zeta";
    map.outer = ctx.grid(a.zeta);
    const double delta = ctx.value(delta_text);
    modes.push_back({"delta", fmt(delta)});
    for (double z : map.outer) systems.push_back(sys.with_zeta(z));
    deltas.assign(map.outer.size(), delta);
  } else {
    throw ConfigError("unknown --map `" + a.map + "` (none|omega-delta|omega-zeta)");
  }
  map.values.resize(map.outer.size());
  std::vector<char> stable(map.outer.size(), 0);
  parallel_for(map.outer.size(), ctx.threads(), [&](std::size_t i) {
    bool ok = false;
    map.values[i] = spectrum_row(obs, omega, systems[i], deltas[i], ctx.noise(), ctx.momentum(), scale, ok);
    stable[i] = ok;
  });
  map.stable.assign(stable.begin(), stable.end());
  modes.push_back({"layout", a.layout});
  ctx.header(sys, modes);
  write_map(ctx.os(), map, layout);
}

struct TemperatureArgs {
  std::string sweep = "delta";
  std::string grid;
  std::vector<std::string> fix;
  std::optional<double> chi_scale;
};

void cmd_temperature(Context& ctx, const TemperatureArgs& a) {
  if (a.grid.empty()) throw ConfigError("temperature: --grid is required");
  const Fixes fixes = parse_fixes(a.fix);
  SweepSpec spec;
  if (a.sweep == "delta") {
    spec.variable = SweepVariable::delta;
    if (fixes.delta) throw ConfigError("temperature: delta cannot be both swept and fixed");
  } else if (a.sweep == "zeta") {
    spec.variable = SweepVariable::zeta;
  } else if (a.sweep == "omega_b") {
    spec.variable = SweepVariable::bogoliubov;
  } else {
    throw ConfigError("unknown --sweep `" + a.sweep + "` (delta|zeta|omega_b)");
  }
  if (spec.variable != SweepVariable::delta && !fixes.delta) {
    throw ConfigError("temperature: sweeping " + a.sweep + " needs --fix delta=...");
  }
  const System sys = apply_fixes(ctx, apply_chi_scale(ctx.base(), a.chi_scale), fixes);
  spec.grid = ctx.grid(a.grid);
  if (fixes.delta) spec.fixed_delta = ctx.value(*fixes.delta);
  const auto curve = temperature_sweep(spec, sys, ctx.noise(), ctx.momentum(), ctx.threads());
  KeyValues modes = {{"sweep", to_string(spec.variable)}};
  if (spec.variable != SweepVariable::delta) modes.push_back({"delta", fmt(spec.fixed_delta)});
  if (a.chi_scale) modes.push_back({"chi_scale", fmt(*a.chi_scale)});
  ctx.header(sys, modes);
  write_temperature(ctx.os(), curve);
}

struct ValidateArgs {
  std::string delta = "kappa/2";
  bool time_domain = false;
  bool negative_control = false;
  double relaxation_times = CrossCheckOptions{}.relaxation_times;
  unsigned trajectories = CrossCheckOptions{}.trajectories;
};

int cmd_validate(Context& ctx, const ValidateArgs& a, std::ostream& out) {
  const System& sys = ctx.base();
  const double delta = ctx.value(a.delta);
  const auto op = operating_point_at_detuning(delta, sys.params, sys.couplings);
  CrossCheckOptions o;
  o.time_domain = a.time_domain;
  o.negative_control = a.negative_control;
  o.seed = ctx.seed();
  o.threads = ctx.threads();
  o.relaxation_times = a.relaxation_times;
  o.trajectories = a.trajectories;
  const auto rep = cross_check(sys, op, o);

  write_cross_check_text(out, rep);
  if (!ctx.to_file()) out << '\n';
  ctx.header(sys, {{"delta", fmt(delta)},
                   {"time_domain", a.time_domain ? "on" : "off"},
                   {"negative_control", a.negative_control ? "on" : "off"},
                   {"seed", std::to_string(ctx.seed())}});
  write_cross_check_rows(ctx.os(), rep);
  return rep.passed() ? 0 : 3;
}

struct DumpArgs {
  std::string delta = "kappa/2";
  std::string bath = "high-t-white";
};

void cmd_dump(Context& ctx, const DumpArgs& a) {
  const System& sys = ctx.base();
  BathModel bath = BathModel::high_t_white;
  if (a.bath == "quantum-exact") {
    bath = BathModel::quantum_exact;
  } else if (a.bath != "high-t-white") {
    throw ConfigError("--bath must be high-t-white or quantum-exact");
  }
  const double delta = ctx.value(a.delta);
  const auto op = operating_point_at_detuning(delta, sys.params, sys.couplings);
  ctx.header(sys, {{"delta", fmt(delta)}, {"bath", to_string(bath)}});
  write_matrices(ctx.os(), build_drift_matrix(op, sys.params, sys.couplings),
                 build_diffusion_matrix(sys.params, sys.couplings, bath));
}

}  // namespace

double eval_expression(const std::string& text, const System& sys) {
  const double v = ExprParser(text, sys).parse();
  if (!std::isfinite(v)) throw ConfigError("expression `" + text + "` is not finite");
  return v;
}

std::vector<double> parse_grid(const std::string& text, const System& sys) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto colon = text.find(':', start);
    parts.push_back(text.substr(start, colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() == 1) return {eval_expression(parts[0], sys)};
  if (parts.size() != 3) throw ConfigError("grid `" + text + "`: expected lo:hi:n");
  const double lo = eval_expression(parts[0], sys);
  const double hi = eval_expression(parts[1], sys);
  long n = 0;
  const auto& ns = parts[2];
  const auto [ptr, ec] = std::from_chars(ns.data(), ns.data() + ns.size(), n);
  if (ec != std::errc() || ptr != ns.data() + ns.size() || n < 1) {
    throw ConfigError("grid `" + text + "`: point count must be a positive integer");
  }
  if (n == 1) {
    if (lo != hi) throw ConfigError("grid `" + text + "`: one point needs lo == hi");
    return {lo};
  }
  if (!(hi > lo)) throw ConfigError("grid `" + text + "`: must be strictly increasing");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  g.back() = hi;
  return g;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linearized cavity / vibrating mirror / Bogoliubov mode simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string("cavbec ") + tool_version);

  Globals g;
  app.add_option("--config", g.config, "parameter file (JSON)");
  app.add_option("--out", g.out, "output file (default stdout)");
  app.add_option("--threads", g.threads, "worker threads")->capture_default_str();
  app.add_option("--seed", g.seed, "master seed")->capture_default_str();
  app.add_option("--noise", g.noise, "symmetrized|paper-literal|high-t-white")->capture_default_str();
  app.add_option("--momentum", g.momentum, "paper|exact")->capture_default_str();

  auto* derive = app.add_subcommand("derive", "derived couplings");

  SteadyArgs sa;
  auto* steady = app.add_subcommand("steady", "steady-state operating points");
  steady->add_option("--delta", sa.delta, "total detuning (fixed-delta mode)");
  steady->add_option("--delta0", sa.delta0, "bare detuning grid lo:hi:n (branch sweep)");

  SpectrumArgs pa;
  auto* spectrum = app.add_subcommand("spectrum", "noise spectra");
  spectrum->add_option("--observable", pa.observable, "q|p|Q")->capture_default_str();
  spectrum->add_option("--omega", pa.omega, "frequency grid")->capture_default_str();
  spectrum->add_option("--map", pa.map, "none|omega-delta|omega-zeta")->capture_default_str();
  spectrum->add_option("--delta", pa.delta, "detuning (grid for omega-delta)");
  spectrum->add_option("--zeta", pa.zeta, "zeta grid for omega-zeta");
  spectrum->add_option("--fix", pa.fix, "key=value with key in delta|zeta|omega_b");
  spectrum->add_option("--chi-scale", pa.chi_scale, "set chi = k omega_C / 2L");
  spectrum->add_flag("--normalize", pa.normalize, "divide by S(omega_m) at zero detuning");
  spectrum->add_option("--units", pa.units, "zpf|si")->capture_default_str();
  spectrum->add_option("--layout", pa.layout, "long|matrix")->capture_default_str();

  TemperatureArgs ta;
  auto* temperature = app.add_subcommand("temperature", "effective mirror temperature sweeps");
  temperature->add_option("--sweep", ta.sweep, "delta|zeta|omega_b")->capture_default_str();
  temperature->add_option("--grid", ta.grid, "sweep grid lo:hi:n");
  temperature->add_option("--fix", ta.fix, "key=value with key in delta|zeta|omega_b");
  temperature->add_option("--chi-scale", ta.chi_scale, "set chi = k omega_C / 2L");

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "cross-check spectra, Lyapunov and time-domain variances");
  validate->add_option("--delta", va.delta, "detuning")->capture_default_str();
  validate->add_flag("--time-domain", va.time_domain, "also run the stochastic integrator");
  validate->add_flag("--negative-control", va.negative_control, "use a deliberately wrong diffusion matrix");
  validate->add_option("--relaxation-times", va.relaxation_times, "time-domain length")->capture_default_str();
  validate->add_option("--trajectories", va.trajectories, "independent trajectories")->capture_default_str();

  DumpArgs da;
  auto* dump = app.add_subcommand("dump-matrix", "drift and diffusion matrices");
  dump->add_option("--delta", da.delta, "detuning")->capture_default_str();
  dump->add_option("--bath", da.bath, "high-t-white|quantum-exact")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    Context ctx(g, args, out);
    int code = 0;
    if (*derive) {
      cmd_derive(ctx);
    } else if (*steady) {
      cmd_steady(ctx, sa);
    } else if (*spectrum) {
      cmd_spectrum(ctx, pa);
    } else if (*temperature) {
      cmd_temperature(ctx, ta);
    } else if (*validate) {
      code = cmd_validate(ctx, va, out);
    } else if (*dump) {
      cmd_dump(ctx, da);
    }
    ctx.finish();
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationFailure& e) {
    err << "validation failed: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace cavbec
