#include "cavbec/thermo.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cavbec/dynamics.hpp"
#include "cavbec/error.hpp"
#include "cavbec/parallel.hpp"

namespace cavbec {

namespace {

// Breakpoints at c +- w 2^k around every resonance c = |Im l|, w = |Re l|.
std::vector<double> breakpoints(const StabilityReport& rep, bool atom_ignored, double omega_max) {
  std::vector<double> pts = {0.0, omega_max};
  for (auto l : rep.eigenvalues) {
    // Eigenvalues of an ignored (decoupled, undamped) atomic pair sit on the axis.
    if (atom_ignored && std::abs(l.real()) <= rep.epsilon) continue;
    const double c = std::abs(l.imag());
    const double w = std::abs(l.real());
    if (c < omega_max) pts.push_back(c);
    if (w == 0) continue;
    for (double off = 0.25 * w; off < omega_max; off *= 2) {
      if (c + off < omega_max) pts.push_back(c + off);
      if (c - off > 0) pts.push_back(c - off);
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

VarianceResult variance(Observable obs, const SpectralEngine& engine, const QuadratureOptions& quad) {
  const System& sys = engine.system();
  const StabilityReport rep = stability(engine.drift());
  if (rep.coupled_classification == Stability::unstable) {
    throw DivergentVariance("variance: operating point is unstable");
  }
  const bool atom_ignored = atom_block_decoupled(engine.drift().K);
  if (obs == Observable::Q && !atom_ignored && rep.coupled_classification == Stability::marginal) {
    throw DivergentVariance("variance: undamped Bogoliubov mode is driven; <dQ^2> diverges");
  }

  double scale = std::max({sys.kappa(), sys.omega_m(), sys.omega_b()});
  for (auto l : rep.eigenvalues) scale = std::max(scale, std::abs(l));
  VarianceResult out;
  out.omega_max = quad.omega_max_factor * scale;

  const auto pts = breakpoints(rep, atom_ignored, out.omega_max);
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

  // One Kronrod rule per interval fixes the scale; intervals whose error
  // exceeds their share of the absolute budget are then refined. Depth is
  // capped because round-off near very narrow resonances puts a floor under
  // the attainable relative error of a single interval.
  // The last interval is the tail [w_max, inf), mapped to u in (0, 1] by
  // w = w_max / u so that a 1/w^2 decay (white force, exact momentum)
  // becomes a constant integrand.
  auto integrate_side = [&](double sign) {
    const std::size_t n = pts.size();
    const double w_max = pts.back();
    auto rule = [&](std::size_t i, unsigned depth, double tol, double* e, double* l) {
      if (i + 1 < n) {
        auto f = [&](double w) { return engine.dns(obs, sign * w); };
        return GK::integrate(f, pts[i], pts[i + 1], depth, tol, e, l);
      }
      auto g = [&](double u) { return engine.dns(obs, sign * w_max / u) * w_max / (u * u); };
      return GK::integrate(g, 0.0, 1.0, depth, tol, e, l);
    };
    std::vector<double> value(n), error(n), l1(n);
    double scale_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      value[i] = rule(i, 0, 0.0, &error[i], &l1[i]);
      scale_sum += l1[i];
    }
    const double budget = 0.1 * quad.rel_tol * scale_sum / static_cast<double>(n);
    double sum = 0;
    double err = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (error[i] > budget && l1[i] > 0) {
        value[i] = rule(i, 6, budget / l1[i], &error[i], &l1[i]);
      }
      sum += value[i];
      err += error[i];
    }
    return std::pair{sum, err};
  };

  if (engine.noise().even()) {
    auto [v, e] = integrate_side(+1);
    out.value = 2 * v;
    out.error_estimate = 2 * e;
  } else {
    auto [vp, ep] = integrate_side(+1);
    auto [vn, en] = integrate_side(-1);
    out.value = vp + vn;
    out.error_estimate = ep + en;
  }
  return out;
}

VarianceResult variance(Observable obs, const OperatingPoint& op, const System& sys, NoiseMode noise,
                        MomentumMode momentum, const QuadratureOptions& quad) {
  SpectralEngine engine(sys, op, NoiseModel::make(noise, sys.params, sys.couplings), momentum);
  return variance(obs, engine, quad);
}

TemperaturePoint effective_temperature(const OperatingPoint& op, const System& sys, NoiseMode noise,
                                       MomentumMode momentum, const QuadratureOptions& quad) {
  SpectralEngine engine(sys, op, NoiseModel::make(noise, sys.params, sys.couplings), momentum);
  TemperaturePoint t;
  t.var_q = variance(Observable::q, engine, quad).value;
  t.var_p = momentum == MomentumMode::paper ? t.var_q : variance(Observable::p, engine, quad).value;
  t.t_eff = constants::hbar * sys.omega_m() / (2 * constants::k_B) * (t.var_q + t.var_p);
  return t;
}

const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::delta:
      return "delta";
    case SweepVariable::zeta:
      return "zeta";
    case SweepVariable::bogoliubov:
      return "bogoliubov";
  }
  return "?";
}

TemperatureCurve temperature_sweep(const SweepSpec& spec, const System& sys, NoiseMode noise,
                                   MomentumMode momentum, unsigned threads, const QuadratureOptions& quad) {
  if (spec.grid.empty()) throw ConfigError("temperature_sweep: empty grid");
  for (std::size_t i = 1; i < spec.grid.size(); ++i) {
    if (!(spec.grid[i] > spec.grid[i - 1])) {
      throw ConfigError("temperature_sweep: grid must be strictly increasing");
    }
  }
  TemperatureCurve curve;
  curve.variable = spec.variable;
  curve.grid = spec.grid;
  curve.noise = noise;
  curve.momentum = momentum;
  curve.params = sys.params;
  curve.points.assign(spec.grid.size(), TemperaturePoint{NAN, NAN, NAN});
  std::vector<char> stable(spec.grid.size(), 0);

  parallel_for(spec.grid.size(), threads, [&](std::size_t i) {
    const double v = spec.grid[i];
    System s = sys;
    double delta = spec.fixed_delta;
    switch (spec.variable) {
      case SweepVariable::delta:
        delta = v;
        break;
      case SweepVariable::zeta:
        s = sys.with_zeta(v);
        break;
      case SweepVariable::bogoliubov:
        s = sys.with_bogoliubov_freq(v);
        break;
    }
    const auto op = operating_point_at_detuning(delta, s.params, s.couplings);
    try {
      curve.points[i] = effective_temperature(op, s, noise, momentum, quad);
      stable[i] = 1;
    } catch (const DivergentVariance&) {
    } catch (const ResonanceSingularity&) {
    }
  });
  curve.stable.assign(stable.begin(), stable.end());
  return curve;
}

}  // namespace cavbec
