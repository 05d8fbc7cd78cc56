// Acceptance suite. `acceptance` runs every criterion; `acceptance 3 7`
// runs a subset. One line per criterion; exit status 1 if any failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "cavbec/dynamics.hpp"
#include "cavbec/error.hpp"
#include "cavbec/spectra.hpp"
#include "cavbec/thermo.hpp"
#include "cavbec/validate.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace cavbec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  v.back() = hi;
  return v;
}

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

OperatingPoint at(const System& sys, double delta) {
  return operating_point_at_detuning(delta, sys.params, sys.couplings);
}

const char* mode_name(NoiseMode m) { return to_string(m); }

// 1. Spectral area vs Lyapunov on the full set; time domain vs Lyapunov on the desk set.
Outcome oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto sys = fixture::config("baseline");
  const auto op = at(sys, sys.kappa() / 2);
  const auto V = lyapunov_covariance(build_drift_matrix(op, sys.params, sys.couplings),
                                     build_diffusion_matrix(sys.params, sys.couplings, BathModel::high_t_white))
                     .V;
  const double spectral = variance(Observable::q, op, sys, NoiseMode::high_t_white).value;
  const double lyap = V(basis::q, basis::q);
  const double rel = std::abs(spectral - lyap) / lyap;

  const auto desk = fixture::config("desk");
  CrossCheckOptions o;
  o.time_domain = true;
  o.threads = threads();
  o.seed = 1;
  const auto rep = cross_check(desk, at(desk, desk.kappa() / 2), o);
  double sigmas = INFINITY;
  for (const auto& r : rep.rows) {
    if (r.method == "time-domain" && r.quantity == "var_q") sigmas = std::abs(r.value - r.reference) / (r.tolerance / 3);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Outcome out;
  out.pass = rel < 0.01 && sigmas <= 3 && secs < 120;
  out.detail = "spectral/lyapunov rel diff " + fmt("%.2e", rel) + ", time-domain " + fmt("%.2f", sigmas) +
               " sigma, " + fmt("%.1f", secs) + " s";
  return out;
}

// 2. Unpumped mirror at room temperature.
Outcome equipartition() {
  const auto sys = fixture::config("baseline").with_power(0);
  double worst = 0;
  for (auto m : {MomentumMode::paper, MomentumMode::exact}) {
    const double t = effective_temperature(at(sys, 0), sys, NoiseMode::symmetrized, m).t_eff;
    worst = std::max(worst, std::abs(t - 300) / 300);
  }
  return {worst < 0.005, "max |T_eff - T| / T = " + fmt("%.2e", worst)};
}

// 3. A_M (k - i w) = D B_M and the atomic analogue.
Outcome transfer_identities() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  const auto base = fixture::config("atomic");
  double worst = 0;
  int draws = 0;
  while (draws < 100) {
    auto sys = base.with_power(base.params.pump_power * std::pow(10.0, 2 * u(rng) - 1));
    sys = sys.with_bogoliubov_freq(base.omega_m() * (0.1 + 1.9 * u(rng)));
    sys = sys.with_zeta(sys.mirror_rate() * u(rng));
    const double delta = (0.02 + 2 * u(rng)) * sys.kappa();
    const auto drift = drift_at(delta, sys);
    if (stability(drift).coupled_classification != Stability::stable) continue;
    ++draws;
    const double wmax = 3 * std::max(sys.kappa(), sys.omega_m());
    for (double w : linspace(-wmax, wmax, 1000)) {
      const auto t = transfer_at(w, drift);
      const cplx k(sys.kappa(), -w);
      auto rel = [](cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); };
      worst = std::max({worst, rel(t.A_M * k, delta * t.B_M), rel(t.A_A * k, delta * t.B_A)});
    }
  }
  return {worst < 1e-10, "worst relative mismatch " + fmt("%.2e", worst) + " over 100 draws x 1000 w"};
}

// 4. Closed-form numerators, plus a sign-flipped drift as negative control.
Outcome closed_form() {
  const auto sys = fixture::config("atomic");
  const auto drift = drift_at(sys.kappa() / 2, sys);
  std::vector<TransferSet> good, bad;
  DriftMatrix broken = drift;
  broken.K(basis::y, basis::Q) *= -1;
  for (double w : linspace(0.05 * sys.omega_m(), 3 * sys.omega_m(), 400)) {
    good.push_back(transfer_at(w, drift));
    bad.push_back(transfer_at(w, broken));
  }
  const auto g = consistency_ratio(good, drift, sys);
  const auto b = consistency_ratio(bad, broken, sys);
  Outcome out;
  out.pass = g.passed && g.atom_checked && g.mirror_spread < 1e-6 && g.atom_spread < 1e-6 && !b.passed;
  out.detail = "spread C_M " + fmt("%.1e", g.mirror_spread) + ", C_A " + fmt("%.1e", g.atom_spread) +
               "; corrupted K spread " + fmt("%.1e", std::max(b.mirror_spread, b.atom_spread));
  return out;
}

// 5. Empty-cavity map: deepest peak at k/2, red-shifted, tenfold cooling.
Outcome empty_cavity() {
  const auto sys = fixture::config("baseline");
  const auto omega = linspace(0.5 * sys.omega_m(), 1.5 * sys.omega_m(), 2001);
  std::vector<double> deltas;
  for (int i = 1; i <= 100; ++i) deltas.push_back(0.02 * i * sys.kappa());
  const std::size_t half = 24;  // 0.5 kappa

  bool single = true, shifted = true, minimum = true;
  double argmin = 0;
  for (auto mode : {NoiseMode::symmetrized, NoiseMode::paper_literal}) {
    std::vector<double> heights(deltas.size(), NAN);
    std::vector<double> centers(deltas.size(), NAN);
    SeriesOptions so;
    so.threads = threads();
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      const auto peaks = find_peaks(spectrum_series(Observable::q, omega, sys, at(sys, deltas[i]), mode, so));
      if (peaks.size() != 1) {
        single = false;
        continue;
      }
      heights[i] = peaks[0].height;
      centers[i] = peaks[0].omega;
    }
    const auto lowest = std::min_element(heights.begin(), heights.end());
    argmin = deltas[lowest - heights.begin()] / sys.kappa();
    minimum = minimum && static_cast<std::size_t>(lowest - heights.begin()) == half;
    shifted = shifted && centers[half] < sys.omega_m();
  }
  const double hot = effective_temperature(at(sys, 0.05 * sys.kappa()), sys, NoiseMode::symmetrized).t_eff;
  const double cold = effective_temperature(at(sys, 0.5 * sys.kappa()), sys, NoiseMode::symmetrized).t_eff;
  const double ratio = cold / hot;
  Outcome out;
  out.pass = single && shifted && minimum && ratio < 0.1;
  out.detail = std::string(single ? "single peak" : "peak count != 1") + ", lowest peak at " +
               fmt("%.2f", argmin) + " kappa" + (shifted ? ", red-shifted" : ", not red-shifted") +
               ", T_eff(k/2)/T_eff(0.05k) = " + fmt("%.3f", ratio);
  return out;
}

// Height of the peak within one grid step of w_b; zero when there is none.
double secondary_height(const std::vector<Peak>& peaks, double wb, double step) {
  double h = 0;
  for (const auto& p : peaks) {
    if (std::abs(p.omega - wb) <= step) h = std::max(h, p.height);
  }
  return h;
}

// 6. Secondary structure pinned at w_b, growing with zeta.
Outcome secondary_structure() {
  const auto sys = fixture::config("atomic");
  const double wb = sys.omega_b();
  // At w = w_b exactly the field decouples and S_q is the bare mirror value for any zeta > 0;
  // an even point count keeps that sample off the grid.
  const auto omega = linspace(0.5 * sys.omega_m(), 1.5 * sys.omega_m(), 400);
  const double step = omega[1] - omega[0];
  SeriesOptions so;
  so.threads = threads();

  bool pinned = true;
  double worst_offset = 0;
  for (double f : linspace(0.1, 1.0, 10)) {
    const auto peaks = find_peaks(spectrum_series(Observable::q, omega, sys, at(sys, f * sys.kappa()),
                                                  NoiseMode::symmetrized, so));
    double offset = INFINITY;
    for (const auto& p : peaks) offset = std::min(offset, std::abs(p.omega - wb));
    worst_offset = std::max(worst_offset, offset / step);
    pinned = pinned && peaks.size() >= 2 && offset <= step;
  }

  bool growing = true;
  double last = -1;
  for (double z : linspace(0, 0.7 * sys.mirror_rate(), 36)) {
    const auto s = sys.with_zeta(z);
    const auto peaks = find_peaks(spectrum_series(Observable::q, omega, s, at(s, s.kappa() / 2),
                                                  NoiseMode::symmetrized, so));
    const double h = secondary_height(peaks, wb, step);
    growing = growing && h >= last;
    last = h;
  }
  Outcome out;
  out.pass = pinned && growing;
  out.detail = "secondary peak within " + fmt("%.2f", worst_offset) + " grid steps of w_b" +
               (growing ? ", height nondecreasing in zeta" : ", height not monotone in zeta");
  return out;
}

// 7. Off-resonant condensate leaves cooling intact; resonant one switches it off.
Outcome cooling_switch() {
  const auto base = fixture::config("baseline");
  const auto atomic = fixture::config("atomic");
  std::vector<double> grid = linspace(0.05 * base.kappa(), 2 * base.kappa(), 40);
  const double zeta = 0.2 * atomic.mirror_rate();
  bool pass = true;
  std::string detail;
  std::vector<bool> orderings;
  for (auto mode : {NoiseMode::symmetrized, NoiseMode::paper_literal}) {
    SweepSpec spec;
    spec.grid = grid;
    const auto empty = temperature_sweep(spec, base, mode, MomentumMode::paper, threads());
    const auto off = temperature_sweep(spec, atomic.with_zeta(zeta).with_bogoliubov_freq(0.1 * atomic.omega_m()), mode,
                                       MomentumMode::paper, threads());
    double worst = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double r = std::abs(off.points[i].t_eff - empty.points[i].t_eff) / empty.points[i].t_eff;
      worst = std::isnan(r) ? INFINITY : std::max(worst, r);
    }

    SweepSpec zs;
    zs.variable = SweepVariable::zeta;
    zs.fixed_delta = atomic.kappa() / 2;
    zs.grid = linspace(0, 0.7 * atomic.mirror_rate(), 15);
    const auto on = temperature_sweep(zs, atomic, mode, MomentumMode::paper, threads());
    bool monotone = true;
    for (std::size_t i = 1; i < on.points.size(); ++i) monotone = monotone && on.points[i].t_eff >= on.points[i - 1].t_eff;
    const double rise = on.points.back().t_eff / on.points.front().t_eff;

    const bool ok = worst < 0.05 && monotone && rise > 10;
    pass = pass && ok;
    orderings.push_back(worst < 0.05);
    orderings.push_back(monotone);
    orderings.push_back(rise > 10);
    detail += std::string(detail.empty() ? "" : "; ") + mode_name(mode) + ": off-resonant max dev " +
              fmt("%.3f", worst) + ", resonant rise x" + fmt("%.0f", rise) + (monotone ? " monotone" : " not monotone");
  }
  const bool same = std::equal(orderings.begin(), orderings.begin() + 3, orderings.begin() + 3);
  return {pass && same, detail};
}

// 8. Atomic spectrum splits once the mirror couples, more so for larger chi.
Outcome normal_mode_splitting() {
  const auto atomic = fixture::config("atomic");
  const auto omega = linspace(0.5 * atomic.omega_m(), 1.5 * atomic.omega_m(), 401);
  const double zeta = 0.7 * atomic.mirror_rate();
  std::vector<std::size_t> counts;
  std::vector<double> separation;
  SeriesOptions so;
  so.threads = threads();
  for (int k : {0, 1, 2}) {
    const auto sys = atomic.with_chi(k * atomic.couplings.omega_cavity / (2 * atomic.params.cavity_length)).with_zeta(zeta);
    const auto peaks = find_peaks(spectrum_series(Observable::Q, omega, sys, at(sys, sys.kappa() / 2),
                                                  NoiseMode::symmetrized, so));
    counts.push_back(peaks.size());
    separation.push_back(peaks.size() >= 2 ? peaks.back().omega - peaks.front().omega : 0);
  }
  Outcome out;
  out.pass = counts[0] == 1 && counts[1] == 2 && counts[2] == 2 && separation[2] > separation[1];
  out.detail = "peaks k=0,1,2: " + std::to_string(counts[0]) + "," + std::to_string(counts[1]) + "," +
               std::to_string(counts[2]) + "; separation k=1 " + fmt("%.4f", separation[1] / atomic.omega_m()) +
               " w_m, k=2 " + fmt("%.4f", separation[2] / atomic.omega_m()) + " w_m";
  return out;
}

oracle::Mat to_mp(const Matrix6& K) {
  oracle::Mat m{};
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) m[i][j] = K(i, j);
  }
  return m;
}

// 9. Weak coupling never destabilizes red detuning; strong blue detuning does.
Outcome stability_map() {
  int sampled = 0, bad = 0;
  for (const char* name : {"baseline", "atomic"}) {
    const auto sys = fixture::config(name);
    for (int i = 1; i <= 200; ++i) {
      ++sampled;
      if (stability(drift_at(0.025 * i * sys.kappa(), sys)).classification == Stability::unstable) ++bad;
    }
  }
  const auto strong = fixture::config("atomic").with_power(0.1);
  const auto d = drift_at(-0.5 * strong.kappa(), strong);
  const bool unstable = stability(d).classification == Stability::unstable;
  const bool agrees = oracle::routh_hurwitz(to_mp(d.K)) == oracle::Hurwitz::unstable;
  Outcome out;
  out.pass = bad == 0 && unstable && agrees;
  out.detail = std::to_string(bad) + " of " + std::to_string(sampled) + " weak-coupling D>0 points unstable; strong D<0 " +
               (unstable ? "unstable" : "not unstable") + (agrees ? ", Routh-Hurwitz agrees" : ", Routh-Hurwitz disagrees");
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 10. Each reproduce script regenerates its golden files byte for byte.
Outcome reproducibility() {
  const fs::path root = fixture::source_dir();
  const fs::path golden = root / "reproduce" / "golden";
  const fs::path tmp = fs::temp_directory_path() / ("cavbec_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  int files = 0, mismatched = 0, failed_scripts = 0;
  std::string first_bad;
  for (const char* script : {"fig1b", "fig1c", "fig2a", "fig2b", "fig2c", "fig3"}) {
    const std::string cmd = "CAVBEC_BIN='" + std::string(CAVBEC_CLI_PATH) + "' '" + (root / "reproduce" / script).string() +
                            "' '" + tmp.string() + "' > /dev/null";
    if (std::system(cmd.c_str()) != 0) {
      ++failed_scripts;
      continue;
    }
  }
  if (fs::exists(golden)) {
    for (const auto& e : fs::directory_iterator(golden)) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      const auto fresh = tmp / e.path().filename();
      if (!fs::exists(fresh) || slurp(fresh) != slurp(e.path())) {
        ++mismatched;
        if (first_bad.empty()) first_bad = e.path().filename().string();
      }
    }
  }
  fs::remove_all(tmp);
  Outcome out;
  out.pass = failed_scripts == 0 && files > 0 && mismatched == 0;
  out.detail = std::to_string(files) + " golden files, " + std::to_string(mismatched) + " differ" +
               (first_bad.empty() ? "" : " (first: " + first_bad + ")") +
               (failed_scripts ? ", " + std::to_string(failed_scripts) + " scripts failed" : "");
  return out;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "oracle equivalence", oracle_equivalence},
      {2, "equipartition anchor", equipartition},
      {3, "transfer identities", transfer_identities},
      {4, "closed-form consistency", closed_form},
      {5, "empty-cavity cooling map", empty_cavity},
      {6, "secondary atomic structure", secondary_structure},
      {7, "cooling switch", cooling_switch},
      {8, "normal-mode splitting", normal_mode_splitting},
      {9, "stability map", stability_map},
      {10, "reproducibility", reproducibility},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  bool ok = true;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("criterion %2d  %-4s  %-27s %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
    ok = ok && o.pass;
  }
  return ok ? 0 : 1;
}
