#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cavbec/dynamics.hpp"
#include "cavbec/model.hpp"
#include "cavbec/steadystate.hpp"

namespace cavbec {

using cplx = std::complex<double>;
using Matrix6c = Eigen::Matrix<cplx, 6, 6>;

enum class Observable { q, p, Q };
/// Brownian-force weight.
///   symmetrized:   g (w / w_m) coth(hbar w / 2 k_B T)            (even)
///   paper-literal: g (w / w_m) [1 + coth(hbar w / 2 k_B T)]      (not even)
///   high-t-white:  g (2 n_cl + 1), the diffusion-matrix entry     (flat)
enum class NoiseMode { symmetrized, paper_literal, high_t_white };
/// paper: S_p = m^2 w_m^2 S_q;  exact: S_p = m^2 w^2 S_q.
enum class MomentumMode { paper, exact };
enum class SpectrumUnits { zero_point, si };

const char* to_string(Observable o);
const char* to_string(NoiseMode m);
const char* to_string(MomentumMode m);
const char* to_string(SpectrumUnits u);
Observable parse_observable(const std::string& s);
NoiseMode parse_noise_mode(const std::string& s);
MomentumMode parse_momentum_mode(const std::string& s);

/// Per-channel symmetrized spectral weights, dimensionless variables.
struct NoiseModel {
  NoiseMode mode = NoiseMode::symmetrized;
  double gamma = 0;
  double mirror_freq = 0;
  double temperature = 0;
  double classical_occupancy = 0;

  static NoiseModel make(NoiseMode mode, const PhysicalParams& params, const DerivedCouplings& couplings);

  double vacuum_weight() const { return 1.0; }
  double brownian_weight(double omega) const;
  bool even() const { return mode != NoiseMode::paper_literal; }
};

/// Responses of dq and dQ to the three noise channels at one frequency:
/// A <- dy_in, B <- dx_in (both entering with sqrt(2 kappa)), C <- xi.
struct TransferSet {
  double omega = 0;
  cplx A_M, B_M, C_M;
  cplx A_A, B_A, C_A;
  Matrix6c resolvent = Matrix6c::Zero();  // (-i w I - K)^-1
  double residual = 0;                    // max |(-i w I - K) T - I|
};

/// Solves (-i w I - K) T = I. kappa is read from K(x, x). An exactly
/// decoupled (Q, P) block is solved separately; at its own resonance its
/// resolvent block is NaN while every transfer coefficient stays finite.
/// Throws ResonanceSingularity when the coupled system is singular at w.
TransferSet transfer_at(double omega, const DriftMatrix& drift);

/// Frequency-domain engine for one operating point.
class SpectralEngine {
 public:
  SpectralEngine(const System& sys, const OperatingPoint& op, NoiseModel noise,
                 MomentumMode momentum = MomentumMode::paper);

  /// Symmetrized spectrum in zero-point units, normalized so that
  /// the integral over all w equals the variance.
  double dns(Observable obs, double omega) const;
  TransferSet transfer(double omega) const { return transfer_at(omega, drift_); }

  const DriftMatrix& drift() const { return drift_; }
  const NoiseModel& noise() const { return noise_; }
  MomentumMode momentum() const { return momentum_; }
  const System& system() const { return sys_; }
  const OperatingPoint& point() const { return drift_.point; }

 private:
  System sys_;
  DriftMatrix drift_;
  NoiseModel noise_;
  MomentumMode momentum_;
};

/// S_q~(w) = (1/2pi) [|A_M|^2 + |B_M|^2 + S_xi(w) |C_M|^2], analogously
/// for Q; p follows the momentum mode. Zero-point units.
double dns(Observable obs, double omega, const OperatingPoint& op, const PhysicalParams& params,
           const DerivedCouplings& couplings, const NoiseModel& noise,
           MomentumMode momentum = MomentumMode::paper);

/// Conversion factor from zero-point units to SI for `obs`.
double si_scale(Observable obs, const DerivedCouplings& couplings);

struct SpectrumSeries {
  Observable observable = Observable::q;
  SpectrumUnits units = SpectrumUnits::zero_point;
  std::vector<double> omega;
  std::vector<double> value;
  double normalization = 1.0;  // values were divided by this
  PhysicalParams params;
  NoiseMode noise = NoiseMode::symmetrized;
  MomentumMode momentum = MomentumMode::paper;
  double delta = 0;
};

struct SeriesOptions {
  SpectrumUnits units = SpectrumUnits::zero_point;
  MomentumMode momentum = MomentumMode::paper;
  /// Divide by S_obs(w_m) at zero detuning (same parameters).
  bool normalize = false;
  unsigned threads = 1;
};

/// Evaluates the spectrum on `omega_grid` (fixed order, any thread count).
SpectrumSeries spectrum_series(Observable obs, std::span<const double> omega_grid, const System& sys,
                               const OperatingPoint& op, NoiseMode noise, const SeriesOptions& opts = {});

/// The normalization used by SeriesOptions::normalize.
double reference_level(Observable obs, const System& sys, NoiseMode noise, MomentumMode momentum);

struct Peak {
  double omega = 0;
  double height = 0;
  double fwhm = 0;  // NaN when neither half-maximum crossing is on the grid
};

/// Interior local maxima with parabolic refinement, sorted by omega.
/// Needs at least five samples; returns an empty list otherwise.
std::vector<Peak> find_peaks(const SpectrumSeries& series);
std::vector<Peak> find_peaks(std::span<const double> omega, std::span<const double> value);

/// Functional-form check of the closed-form transfer coefficients.
///
/// Mirror: with d(w) = det(-i w I - K) taken from the eigenvalues of the
/// full 6x6 K, C_M d / N_C must be constant, where
///   N_C = (w^2 - w_b^2)[(k - i w)^2 + D^2] + 4 w_b D alpha_s^2 zeta^2.
/// Atom: with d_A defined through A_A ~ w (i g w + w^2 - w_m^2) / d_A,
/// C_A d_A / w must be constant.
/// The reference quantities (D, alpha_s, zeta, w_b, w_m, g, k) come from
/// the operating point and parameters, not from K, so a corrupted K is
/// detected.
struct ConsistencyReport {
  double tolerance = 1e-6;
  double mirror_spread = 0;
  double mirror_worst_omega = 0;
  bool atom_checked = false;
  double atom_spread = 0;
  double atom_worst_omega = 0;
  /// Same mirror ratio but with d_M taken from the literal A_M form
  /// A_M ~ D / d_M; reported for diagnosis only.
  double literal_mirror_spread = 0;
  /// ... and with A_M ~ D (w^2 - w_b^2) / d_M.
  double corrected_mirror_spread = 0;
  bool passed = false;
};

ConsistencyReport consistency_ratio(std::span<const TransferSet> transfers, const DriftMatrix& drift,
                                    const System& sys, double tolerance = 1e-6);

}  // namespace cavbec
