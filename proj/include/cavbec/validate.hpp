#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cavbec/dynamics.hpp"
#include "cavbec/model.hpp"
#include "cavbec/spectra.hpp"
#include "cavbec/steadystate.hpp"

namespace cavbec {

/// V = <{phi_i, phi_j}>/2 at steady state.
struct CovarianceMatrix {
  Matrix6 V = Matrix6::Zero();
  BathModel bath = BathModel::high_t_white;
};

/// Solves K V + V K^T + D = 0 as a dense Kronecker system. An exactly
/// decoupled (Q, P) block that receives no noise is left out and gets zero
/// covariance. Throws NoSteadyState unless the remaining K is strictly
/// stable, SingularConfiguration if the Kronecker system is numerically
/// singular, InternalError if the residual exceeds 1e-10 max|D|.
CovarianceMatrix lyapunov_covariance(const Matrix6& K, const Matrix6& D);
/// Rejects the quantum_exact bath (no white-noise counterpart).
CovarianceMatrix lyapunov_covariance(const DriftMatrix& K, const DiffusionMatrix& D);

/// max |K V + V K^T + D|
double lyapunov_residual(const Matrix6& K, const Matrix6& V, const Matrix6& D);

/// Trajectory i's seed: splitmix64 output for state master + (i + 1) * golden gamma.
std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index);

struct TimeDomainOptions {
  double dt = 0;
  double t_end = 0;
  std::uint64_t seed = 1;
  unsigned trajectories = 1;
  unsigned batches = 20;  // per trajectory, over the second half
  unsigned threads = 1;
  Vector6 initial = Vector6::Zero();
};

struct TimeDomainResult {
  Matrix6 V = Matrix6::Zero();       // second-half average of phi phi^T
  Matrix6 std_error = Matrix6::Zero();  // batch means
  std::uint64_t steps = 0;            // per trajectory
  Vector6 final_state = Vector6::Zero();  // of trajectory 0
  bool aborted = false;
  double abort_time = 0;
  unsigned batch_count = 0;
};

/// Euler-Maruyama for d phi = K phi dt + dW, <dW dW^T> = D dt. Requires
/// dt <= 0.05 / max|lambda(K)| (StepSizeError otherwise). A trajectory whose
/// squared norm grows past 1e8 times its early level (or goes non-finite) is
/// stopped and reported as aborted. Bit-identical for fixed options.
TimeDomainResult simulate_time_domain(const Matrix6& K, const Matrix6& D, const TimeDomainOptions& opts);

/// Largest usable step for K.
double max_step(const Matrix6& K);

struct CrossCheckOptions {
  bool time_domain = false;
  /// Doubles D(p, p) for the Lyapunov and time-domain routes only.
  bool negative_control = false;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  unsigned trajectories = 4;
  double dt_factor = 0.02;         // dt = dt_factor / max|lambda|
  double relaxation_times = 500;   // t_end in units of the slowest decay time
  double max_steps = 2e8;          // per trajectory; larger requests are refused
  double spectral_tolerance = 0.01; // relative
  double sigma_tolerance = 3;
};

struct CrossCheckRow {
  std::string method;
  std::string quantity;
  double value = 0;
  double reference = 0;  // NaN on rows that only report
  double tolerance = 0;  // absolute; pass iff |value - reference| <= tolerance
  bool pass = true;
};

struct CrossCheckReport {
  std::vector<CrossCheckRow> rows;
  CovarianceMatrix lyapunov;
  bool passed() const;
};

/// Compares spectral variances (high-t-white weight), the Lyapunov covariance
/// and optionally the time-domain estimate. Throws NoSteadyState when op is
/// not stable; every other disagreement is a failed row.
CrossCheckReport cross_check(const System& sys, const OperatingPoint& op, const CrossCheckOptions& opts = {});

}  // namespace cavbec
