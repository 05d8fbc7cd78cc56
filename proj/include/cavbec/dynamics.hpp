#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cavbec/model.hpp"
#include "cavbec/steadystate.hpp"

namespace cavbec {

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector6 = Eigen::Matrix<double, 6, 1>;

/// Fluctuation vector ordering (dx, dy, dq, dp, dQ, dP). Cavity quadratures
/// x = a + a^dag, y = i(a^dag - a) obey [x, y] = 2i; the mirror pair is in
/// zero-point units (q / x_zpf, p / p_zpf) and, like (Q, P), canonical.
namespace basis {
inline constexpr int x = 0;
inline constexpr int y = 1;
inline constexpr int q = 2;
inline constexpr int p = 3;
inline constexpr int Q = 4;
inline constexpr int P = 5;
inline constexpr int size = 6;
inline constexpr std::array<const char*, 6> names = {"dx", "dy", "dq", "dp", "dQ", "dP"};
/// "dx,dy,dq,dp,dQ,dP"
std::string header();
}  // namespace basis

struct DriftMatrix {
  Matrix6 K = Matrix6::Zero();
  OperatingPoint point;
};

/// True iff the (Q, P) block has no coupling to the cavity/mirror block.
/// Such a block is left out of solves when it is undamped (zeta = 0).
bool atom_block_decoupled(const Matrix6& K);

enum class BathModel { quantum_exact, high_t_white };

const char* to_string(BathModel b);

/// Symmetrized white-noise diffusion. Nonzero only at (x,x), (y,y), (p,p).
struct DiffusionMatrix {
  Matrix6 D = Matrix6::Zero();
  BathModel bath = BathModel::high_t_white;
};

struct StabilityReport {
  std::vector<std::complex<double>> eigenvalues;  // all six, sorted
  double max_real = 0;
  double epsilon = 0;  // 1e-9 * max |K_ij|
  Stability classification = Stability::stable;
  // Same classification restricted to the coupled subsystem: an exactly
  // decoupled, undamped (Q, P) block is ignored.
  double coupled_max_real = 0;
  Stability coupled_classification = Stability::stable;
};

/// Linearized drift, rows:
///   dx' = -k dx + D dy
///   dy' = -D dx - k dy + 2 G_m dq - 2 G_a dQ
///   dq' = w_m dp
///   dp' = -w_m dq - g dp + G_m dx
///   dQ' = w_b dP
///   dP' = -w_b dQ - G_a dx
DriftMatrix build_drift_matrix(const OperatingPoint& op, const PhysicalParams& params,
                               const DerivedCouplings& couplings);

/// high_t_white: D = diag(2k, 2k, 0, g (2 n_cl + 1), 0, 0) with
/// n_cl = k_B T / (hbar w_m). quantum_exact carries the same matrix
/// evaluated with the Bose factor at w_m, but is tagged so that only the
/// spectral engine (which uses the frequency-dependent weight) accepts it.
DiffusionMatrix build_diffusion_matrix(const PhysicalParams& params, const DerivedCouplings& couplings,
                                       BathModel bath);

StabilityReport stability(const DriftMatrix& drift);

/// Convenience: K at total detuning `delta`.
DriftMatrix drift_at(double delta, const System& sys);

}  // namespace cavbec
