#include "cavbec/steadystate.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "cavbec/dynamics.hpp"
#include "cavbec/error.hpp"

namespace cavbec {

const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable:
      return "stable";
    case Stability::unstable:
      return "unstable";
    case Stability::marginal:
      return "marginal";
  }
  return "?";
}

OperatingPoint operating_point_at_detuning(double delta, const PhysicalParams& params,
                                           const DerivedCouplings& couplings) {
  const double kappa = params.cavity_decay;
  OperatingPoint op;
  op.delta = delta;
  op.alpha_s = couplings.eta / std::hypot(delta, kappa);
  const double n = op.alpha_s * op.alpha_s;
  op.q_s = constants::hbar * couplings.chi * n / (params.mirror_mass * params.mirror_freq * params.mirror_freq);
  op.Q_s = params.atom_cavity_rate == 0
               ? 0.0
               : -std::numbers::sqrt2 * params.atom_cavity_rate * n / params.bogoliubov_freq;
  op.G_m = couplings.chi * couplings.x_zpf * op.alpha_s;
  op.G_a = std::numbers::sqrt2 * params.atom_cavity_rate * op.alpha_s;
  return op;
}

double radiation_pressure_constant(const PhysicalParams& params, const DerivedCouplings& couplings) {
  const double zeta = params.atom_cavity_rate;
  if (zeta > 0 && !(params.bogoliubov_freq > 0)) {
    throw SingularConfiguration("radiation_pressure_constant: zeta > 0 requires bogoliubov_freq > 0");
  }
  const double wm = params.mirror_freq;
  double c = constants::hbar * couplings.chi * couplings.chi / (params.mirror_mass * wm * wm);
  if (zeta > 0) c += 2 * zeta * zeta / params.bogoliubov_freq;
  return c;
}

double fixed_point_residual(double delta, double delta0, const PhysicalParams& params,
                            const DerivedCouplings& couplings) {
  const double kappa = params.cavity_decay;
  const double shift = radiation_pressure_constant(params, couplings) * couplings.eta * couplings.eta;
  return delta - delta0 + shift / (delta * delta + kappa * kappa);
}

namespace {

// Everything is solved in units of kappa: d = D / k, d0 = D0 / k,
// c = C eta^2 / k^3, giving  d^3 - d0 d^2 + d - d0 + c = 0.
struct ScaledCubic {
  double d0;
  double c;
  double value(double d) const { return ((d - d0) * d + 1) * d - d0 + c; }
  double slope(double d) const { return (3 * d - 2 * d0) * d + 1; }
};

double polish(const ScaledCubic& p, double d) {
  for (int it = 0; it < 4; ++it) {
    const double f = p.value(d);
    const double g = p.slope(d);
    if (f == 0 || g == 0) break;
    const double next = d - f / g;
    if (!(std::abs(p.value(next)) < std::abs(f))) break;
    d = next;
  }
  return d;
}

}  // namespace

BranchSet solve_self_consistent(double delta0, const PhysicalParams& params,
                                const DerivedCouplings& couplings) {
  const double kappa = params.cavity_decay;
  const double C = radiation_pressure_constant(params, couplings);
  const ScaledCubic cubic{delta0 / kappa, C * couplings.eta * couplings.eta / (kappa * kappa * kappa)};

  // Companion matrix of x^3 + a2 x^2 + a1 x + a0 with a2 = -d0, a1 = 1, a0 = c - d0.
  Eigen::Matrix3d companion;
  companion << cubic.d0, -1.0, cubic.d0 - cubic.c, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0;
  Eigen::EigenSolver<Eigen::Matrix3d> es(companion, false);
  if (es.info() != Eigen::Success) {
    throw InternalError("solve_self_consistent: companion eigensolver failed");
  }

  // Near a double root the two coalescing roots come back as a complex pair
  // with a tiny imaginary part; those are treated as one repeated real root.
  constexpr double kImagTol = 1e-6;
  std::vector<double> roots;
  for (int i = 0; i < 3; ++i) {
    const auto z = es.eigenvalues()[i];
    if (std::abs(z.imag()) <= kImagTol * std::max(1.0, std::abs(z))) roots.push_back(z.real());
  }
  if (roots.empty()) {
    throw InternalError("solve_self_consistent: real cubic returned no real root");
  }
  std::sort(roots.begin(), roots.end());

  std::vector<bool> repeated(roots.size(), false);
  for (size_t i = 0; i + 1 < roots.size(); ++i) {
    if (std::abs(roots[i + 1] - roots[i]) <= 1e-5 * std::max(1.0, std::abs(roots[i]))) {
      repeated[i] = repeated[i + 1] = true;
    }
  }

  BranchSet out;
  out.delta0 = delta0;
  const double tol = 1e-9 * std::max(std::abs(cubic.d0), 1.0);
  for (size_t i = 0; i < roots.size(); ++i) {
    const double d = repeated[i] ? roots[i] : polish(cubic, roots[i]);
    const double residual = d - cubic.d0 + cubic.c / (d * d + 1);
    if (!repeated[i] && !(std::abs(residual) < tol)) {
      throw InternalError("solve_self_consistent: root failed fixed-point residual check");
    }
    Branch b;
    b.point = operating_point_at_detuning(d * kappa, params, couplings);
    if (repeated[i]) {
      b.stability = Stability::marginal;
    } else {
      b.stability = stability(build_drift_matrix(b.point, params, couplings)).coupled_classification;
    }
    out.branches.push_back(b);
  }
  return out;
}

}  // namespace cavbec
