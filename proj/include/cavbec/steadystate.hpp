#pragma once

#include <vector>

#include "cavbec/model.hpp"

namespace cavbec {

enum class Stability { stable, unstable, marginal };

const char* to_string(Stability s);

/// Classical steady state at total detuning `delta`. alpha_s is taken real
/// and non-negative (phase gauge).
struct OperatingPoint {
  double delta = 0;    // total detuning, rad/s
  double alpha_s = 0;  // intracavity amplitude, dimensionless
  double q_s = 0;      // mirror displacement, m
  double Q_s = 0;      // Bogoliubov displacement, dimensionless (<= 0)
  double G_m = 0;      // chi x_zpf alpha_s, rad/s
  double G_a = 0;      // sqrt(2) zeta alpha_s, rad/s
};

struct Branch {
  OperatingPoint point;
  Stability stability = Stability::stable;
};

/// All self-consistent steady states for one bare detuning, sorted by delta.
struct BranchSet {
  double delta0 = 0;
  std::vector<Branch> branches;
};

OperatingPoint operating_point_at_detuning(double delta, const PhysicalParams& params,
                                           const DerivedCouplings& couplings);

/// C = hbar chi^2 / (m w_m^2) + 2 zeta^2 / w_b. The detuning shift at field
/// amplitude alpha_s is C alpha_s^2. Throws SingularConfiguration for
/// zeta > 0 with w_b = 0.
double radiation_pressure_constant(const PhysicalParams& params, const DerivedCouplings& couplings);

/// Roots of  D^3 - D0 D^2 + k^2 D - D0 k^2 + C eta^2 = 0, i.e. the fixed
/// points of D = D0 - C eta^2 / (D^2 + k^2). `delta0` includes the
/// condensate pull. Each branch is tagged with the stability of its
/// coupled drift matrix; coincident roots are tagged marginal.
BranchSet solve_self_consistent(double delta0, const PhysicalParams& params,
                                const DerivedCouplings& couplings);

/// D - D0 + C eta^2 / (D^2 + k^2); zero on every branch.
double fixed_point_residual(double delta, double delta0, const PhysicalParams& params,
                            const DerivedCouplings& couplings);

}  // namespace cavbec
