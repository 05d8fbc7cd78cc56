#pragma once

#include <string>
#include <vector>

#include "cavbec/model.hpp"
#include "cavbec/spectra.hpp"
#include "cavbec/steadystate.hpp"

namespace cavbec {

struct QuadratureOptions {
  double rel_tol = 1e-6;
  /// Breakpoints stop at this factor times max(k, w_m, w_b, |lambda|max);
  /// the remaining tail is integrated to infinity.
  double omega_max_factor = 10;
};

struct VarianceResult {
  double value = 0;
  double error_estimate = 0;
  double omega_max = 0;
};

/// Area under the spectrum of `obs` (zero-point units). Adaptive
/// Gauss-Kronrod between breakpoints placed around every eigenvalue of the
/// coupled drift matrix, so resonances narrower than the grid spacing of any
/// fixed rule are still resolved. Uses evenness when the noise weight is even.
/// Throws DivergentVariance at unstable operating points.
VarianceResult variance(Observable obs, const SpectralEngine& engine, const QuadratureOptions& quad = {});

VarianceResult variance(Observable obs, const OperatingPoint& op, const System& sys, NoiseMode noise,
                        MomentumMode momentum = MomentumMode::paper, const QuadratureOptions& quad = {});

struct TemperaturePoint {
  double t_eff = 0;  // K
  double var_q = 0;
  double var_p = 0;
};

/// T_eff = (hbar w_m / 2 k_B)(<dq~^2> + <dp~^2>); in paper momentum mode
/// <dp~^2> is taken equal to <dq~^2>.
TemperaturePoint effective_temperature(const OperatingPoint& op, const System& sys, NoiseMode noise,
                                       MomentumMode momentum = MomentumMode::paper,
                                       const QuadratureOptions& quad = {});

enum class SweepVariable { delta, zeta, bogoliubov };

const char* to_string(SweepVariable v);

struct SweepSpec {
  SweepVariable variable = SweepVariable::delta;
  std::vector<double> grid;  // rad/s, strictly increasing
  double fixed_delta = 0;    // used when sweeping zeta or w_b
};

struct TemperatureCurve {
  SweepVariable variable = SweepVariable::delta;
  std::vector<double> grid;
  std::vector<TemperaturePoint> points;  // NaN entries at gaps
  std::vector<bool> stable;
  NoiseMode noise = NoiseMode::symmetrized;
  MomentumMode momentum = MomentumMode::paper;
  PhysicalParams params;
};

/// Unstable sweep points become gaps (stable = false, NaN values).
TemperatureCurve temperature_sweep(const SweepSpec& spec, const System& sys, NoiseMode noise,
                                   MomentumMode momentum = MomentumMode::paper, unsigned threads = 1,
                                   const QuadratureOptions& quad = {});

}  // namespace cavbec
