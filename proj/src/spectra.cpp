#include "cavbec/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "cavbec/error.hpp"
#include "cavbec/parallel.hpp"

namespace cavbec {

namespace {

constexpr double kTwoPi = 2 * constants::pi;
// Below this reciprocal condition number the solve is treated as singular.
constexpr double kMinRcond = 1e-14;

}  // namespace

const char* to_string(Observable o) {
  switch (o) {
    case Observable::q:
      return "q";
    case Observable::p:
      return "p";
    case Observable::Q:
      return "Q";
  }
  return "?";
}

const char* to_string(NoiseMode m) {
  switch (m) {
    case NoiseMode::symmetrized:
      return "symmetrized";
    case NoiseMode::paper_literal:
      return "paper-literal";
    case NoiseMode::high_t_white:
      return "high-t-white";
  }
  return "?";
}

const char* to_string(MomentumMode m) { return m == MomentumMode::paper ? "paper" : "exact"; }

const char* to_string(SpectrumUnits u) { return u == SpectrumUnits::si ? "si" : "zpf"; }

Observable parse_observable(const std::string& s) {
  if (s == "q") return Observable::q;
  if (s == "p") return Observable::p;
  if (s == "Q") return Observable::Q;
  throw ConfigError("unknown observable `" + s + "` (expected q, p or Q)");
}

NoiseMode parse_noise_mode(const std::string& s) {
  if (s == "symmetrized") return NoiseMode::symmetrized;
  if (s == "paper-literal") return NoiseMode::paper_literal;
  if (s == "high-t-white") return NoiseMode::high_t_white;
  throw ConfigError("unknown noise mode `" + s + "`");
}

MomentumMode parse_momentum_mode(const std::string& s) {
  if (s == "paper") return MomentumMode::paper;
  if (s == "exact") return MomentumMode::exact;
  throw ConfigError("unknown momentum mode `" + s + "`");
}

NoiseModel NoiseModel::make(NoiseMode mode, const PhysicalParams& params, const DerivedCouplings& couplings) {
  NoiseModel n;
  n.mode = mode;
  n.gamma = couplings.gamma;
  n.mirror_freq = params.mirror_freq;
  n.temperature = params.bath_temperature;
  n.classical_occupancy = couplings.classical_occupancy;
  return n;
}

double NoiseModel::brownian_weight(double omega) const {
  if (mode == NoiseMode::high_t_white) return gamma * (2 * classical_occupancy + 1);
  // w coth(hbar w / 2 k_B T) -> 2 k_B T / hbar as w -> 0.
  if (omega == 0) return 2 * gamma * classical_occupancy;
  const double x = constants::hbar * omega / (2 * constants::k_B * temperature);
  const double r = omega / mirror_freq;
  if (mode == NoiseMode::symmetrized) return gamma * r / std::tanh(x);
  // 1 + coth(x) = 2 / (1 - exp(-2x))
  return gamma * r * 2 / -std::expm1(-2 * x);
}

TransferSet transfer_at(double omega, const DriftMatrix& drift) {
  const Matrix6& K = drift.K;
  const double kappa = -K(basis::x, basis::x);
  const cplx s(0, -omega);

  TransferSet t;
  t.omega = omega;
  Matrix6c A = -K.cast<cplx>();
  A.diagonal().array() += s;

  if (atom_block_decoupled(K)) {
    const Eigen::Matrix<cplx, 4, 4> A4 = A.topLeftCorner<4, 4>();
    Eigen::PartialPivLU<Eigen::Matrix<cplx, 4, 4>> lu(A4);
    if (!(lu.rcond() > kMinRcond)) throw ResonanceSingularity(omega);
    t.resolvent.topLeftCorner<4, 4>() = lu.inverse();
    const Eigen::Matrix<cplx, 2, 2> A2 = A.bottomRightCorner<2, 2>();
    const cplx det = A2.determinant();
    if (std::abs(det) > kMinRcond * A2.cwiseAbs2().sum()) {
      t.resolvent.bottomRightCorner<2, 2>() = A2.inverse();
    } else {
      t.resolvent.bottomRightCorner<2, 2>().setConstant(cplx(NAN, NAN));
    }
    const Eigen::Matrix<cplx, 4, 4> r4 =
        A4 * t.resolvent.topLeftCorner<4, 4>() - Eigen::Matrix<cplx, 4, 4>::Identity();
    t.residual = r4.cwiseAbs().maxCoeff();
  } else {
    Eigen::PartialPivLU<Matrix6c> lu(A);
    if (!(lu.rcond() > kMinRcond)) throw ResonanceSingularity(omega);
    t.resolvent = lu.inverse();
    t.residual = (A * t.resolvent - Matrix6c::Identity()).cwiseAbs().maxCoeff();
  }

  const double in = std::sqrt(2 * kappa);
  const auto& T = t.resolvent;
  t.A_M = in * T(basis::q, basis::y);
  t.B_M = in * T(basis::q, basis::x);
  t.C_M = T(basis::q, basis::p);
  t.A_A = in * T(basis::Q, basis::y);
  t.B_A = in * T(basis::Q, basis::x);
  t.C_A = T(basis::Q, basis::p);
  return t;
}

SpectralEngine::SpectralEngine(const System& sys, const OperatingPoint& op, NoiseModel noise,
                               MomentumMode momentum)
    : sys_(sys),
      drift_(build_drift_matrix(op, sys.params, sys.couplings)),
      noise_(noise),
      momentum_(momentum) {}

double SpectralEngine::dns(Observable obs, double omega) const {
  const TransferSet t = transfer_at(omega, drift_);
  const double w = noise_.brownian_weight(omega);
  auto combine = [&](cplx a, cplx b, cplx c) {
    return (noise_.vacuum_weight() * (std::norm(a) + std::norm(b)) + w * std::norm(c)) / kTwoPi;
  };
  switch (obs) {
    case Observable::q:
      return combine(t.A_M, t.B_M, t.C_M);
    case Observable::Q:
      return combine(t.A_A, t.B_A, t.C_A);
    case Observable::p: {
      const double sq = combine(t.A_M, t.B_M, t.C_M);
      if (momentum_ == MomentumMode::paper) return sq;
      const double r = omega / sys_.omega_m();
      return r * r * sq;
    }
  }
  return 0;
}

double dns(Observable obs, double omega, const OperatingPoint& op, const PhysicalParams& params,
           const DerivedCouplings& couplings, const NoiseModel& noise, MomentumMode momentum) {
  return SpectralEngine(System{params, couplings}, op, noise, momentum).dns(obs, omega);
}

double si_scale(Observable obs, const DerivedCouplings& couplings) {
  switch (obs) {
    case Observable::q:
      return couplings.x_zpf * couplings.x_zpf;
    case Observable::p:
      return couplings.p_zpf * couplings.p_zpf;
    case Observable::Q:
      return 1.0;
  }
  return 1.0;
}

double reference_level(Observable obs, const System& sys, NoiseMode noise, MomentumMode momentum) {
  // At zero detuning dx evolves on its own and neither dy nor dQ feeds back
  // into the mirror, so S_q there does not depend on zeta. Dropping the atoms
  // avoids the undamped (Q, P) resonance sitting on w_m when w_b = w_m.
  const System ref = obs == Observable::Q ? sys : sys.with_zeta(0.0);
  const auto op = operating_point_at_detuning(0.0, ref.params, ref.couplings);
  SpectralEngine engine(ref, op, NoiseModel::make(noise, ref.params, ref.couplings), momentum);
  double level = NAN;
  try {
    level = engine.dns(obs, ref.omega_m());
  } catch (const ResonanceSingularity&) {
  }
  if (!(level > 0) || !std::isfinite(level)) {
    throw NumericalError(std::string("normalization: S_") + to_string(obs) +
                         "(w_m) at zero detuning is not a finite positive number");
  }
  return level;
}

SpectrumSeries spectrum_series(Observable obs, std::span<const double> omega_grid, const System& sys,
                               const OperatingPoint& op, NoiseMode noise, const SeriesOptions& opts) {
  if (omega_grid.empty()) throw ConfigError("spectrum_series: empty frequency grid");
  SpectralEngine engine(sys, op, NoiseModel::make(noise, sys.params, sys.couplings), opts.momentum);

  SpectrumSeries out;
  out.observable = obs;
  out.units = opts.units;
  out.params = sys.params;
  out.noise = noise;
  out.momentum = opts.momentum;
  out.delta = op.delta;
  out.omega.assign(omega_grid.begin(), omega_grid.end());
  out.value.resize(omega_grid.size());
  parallel_for(omega_grid.size(), opts.threads,
               [&](std::size_t i) { out.value[i] = engine.dns(obs, omega_grid[i]); });

  double scale = opts.units == SpectrumUnits::si ? si_scale(obs, sys.couplings) : 1.0;
  if (opts.normalize) {
    out.normalization = reference_level(obs, sys, noise, opts.momentum);
    scale = 1.0 / out.normalization;
  }
  if (scale != 1.0) {
    for (double& v : out.value) v *= scale;
  }
  return out;
}

namespace {

// Bisection for the crossing of the linear interpolant through
// (x0, y0), (x1, y1) with `level`; y0 and y1 straddle it.
double crossing(double x0, double y0, double x1, double y1, double level) {
  auto f = [&](double x) { return y0 + (y1 - y0) * (x - x0) / (x1 - x0) - level; };
  double lo = x0;
  double hi = x1;
  const bool rising = f(lo) < 0;
  for (int it = 0; it < 200 && hi - lo > 0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((f(mid) < 0) == rising) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<Peak> find_peaks(std::span<const double> x, std::span<const double> y) {
  std::vector<Peak> peaks;
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 5) return peaks;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;

    Peak pk{x[i], y[i], NAN};
    // Parabola through the three samples (Lagrange form).
    const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
    const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
    const double d01 = x0 - x1, d02 = x0 - x2, d12 = x1 - x2;
    const double a = y0 / (d01 * d02) - y1 / (d01 * d12) + y2 / (d02 * d12);
    if (a < 0) {
      const double b = -y0 * (x1 + x2) / (d01 * d02) + y1 * (x0 + x2) / (d01 * d12) -
                       y2 * (x0 + x1) / (d02 * d12);
      const double xv = std::clamp(-b / (2 * a), x0, x2);
      const double yv = y0 * (xv - x1) * (xv - x2) / (d01 * d02) -
                        y1 * (xv - x0) * (xv - x2) / (d01 * d12) +
                        y2 * (xv - x0) * (xv - x1) / (d02 * d12);
      if (yv >= y1) {
        pk.omega = xv;
        pk.height = yv;
      }
    }

    const double half = 0.5 * pk.height;
    std::optional<double> left, right;
    for (std::size_t j = i; j > 0; --j) {
      if (y[j - 1] <= half) {
        left = crossing(x[j - 1], y[j - 1], x[j], y[j], half);
        break;
      }
    }
    for (std::size_t j = i; j + 1 < n; ++j) {
      if (y[j + 1] <= half) {
        right = crossing(x[j], y[j], x[j + 1], y[j + 1], half);
        break;
      }
    }
    if (left && right) {
      pk.fwhm = *right - *left;
    } else if (left) {
      pk.fwhm = 2 * (pk.omega - *left);
    } else if (right) {
      pk.fwhm = 2 * (*right - pk.omega);
    }
    peaks.push_back(pk);
  }
  return peaks;
}

std::vector<Peak> find_peaks(const SpectrumSeries& series) { return find_peaks(series.omega, series.value); }

namespace {

struct Spread {
  double value = 0;
  double worst_omega = 0;
};

Spread relative_spread(const std::vector<cplx>& r, const std::vector<double>& omega) {
  Spread s;
  if (r.empty()) return {NAN, NAN};
  const cplx mean = std::accumulate(r.begin(), r.end(), cplx(0)) / static_cast<double>(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = std::abs(r[i] - mean) / std::abs(mean);
    if (!(d <= s.value)) {
      s.value = d;
      s.worst_omega = omega[i];
    }
  }
  return s;
}

}  // namespace

ConsistencyReport consistency_ratio(std::span<const TransferSet> transfers, const DriftMatrix& drift,
                                    const System& sys, double tolerance) {
  const auto& op = drift.point;
  const double kappa = sys.kappa();
  const double delta = op.delta;
  const double wb = sys.omega_b();
  const double wm = sys.omega_m();
  const double gamma = sys.couplings.gamma;
  const double zeta = sys.zeta();
  const double a2z2 = op.alpha_s * op.alpha_s * zeta * zeta;

  Eigen::EigenSolver<Matrix6> es(drift.K, false);
  if (es.info() != Eigen::Success) throw NumericalError("consistency_ratio: eigensolver failed");
  const Eigen::VectorXcd lambda = es.eigenvalues();

  std::vector<cplx> mirror, literal, corrected, atom;
  std::vector<double> w_mirror, w_literal, w_atom;
  for (const auto& t : transfers) {
    const double w = t.omega;
    const cplx s(0, -w);
    cplx det(1);
    for (int j = 0; j < lambda.size(); ++j) det *= s - lambda[j];
    const cplx kw(kappa, -w);
    const cplx nc = (w * w - wb * wb) * (kw * kw + delta * delta) + 4 * wb * delta * a2z2;
    if (std::abs(nc) == 0) continue;
    mirror.push_back(t.C_M * det / nc);
    w_mirror.push_back(w);
    if (std::abs(t.A_M) > 0) {
      literal.push_back(t.C_M * (delta / t.A_M) / nc);
      corrected.push_back(t.C_M * (delta * (w * w - wb * wb) / t.A_M) / nc);
      w_literal.push_back(w);
    }
    if (w != 0 && std::abs(t.A_A) > 0 && op.G_a > 0 && op.G_m > 0) {
      const cplx mech(w * w - wm * wm, gamma * w);
      atom.push_back(t.C_A * mech / t.A_A);
      w_atom.push_back(w);
    }
  }

  ConsistencyReport rep;
  rep.tolerance = tolerance;
  const Spread m = relative_spread(mirror, w_mirror);
  rep.mirror_spread = m.value;
  rep.mirror_worst_omega = m.worst_omega;
  rep.literal_mirror_spread = relative_spread(literal, w_literal).value;
  rep.corrected_mirror_spread = relative_spread(corrected, w_literal).value;
  rep.atom_checked = !atom.empty();
  if (rep.atom_checked) {
    const Spread a = relative_spread(atom, w_atom);
    rep.atom_spread = a.value;
    rep.atom_worst_omega = a.worst_omega;
  }
  rep.passed = m.value < tolerance && (!rep.atom_checked || rep.atom_spread < tolerance);
  return rep;
}

}  // namespace cavbec
