#include "cavbec/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "cavbec/error.hpp"

namespace cavbec {

std::string basis::header() {
  std::string out;
  for (const char* n : names) {
    if (!out.empty()) out += ',';
    out += n;
  }
  return out;
}

const char* to_string(BathModel b) {
  return b == BathModel::quantum_exact ? "quantum-exact" : "high-t-white";
}

bool atom_block_decoupled(const Matrix6& K) {
  return K.block<2, 4>(4, 0).isZero(0) && K.block<4, 2>(0, 4).isZero(0);
}

DriftMatrix build_drift_matrix(const OperatingPoint& op, const PhysicalParams& params,
                               const DerivedCouplings& couplings) {
  using namespace basis;
  const double kappa = params.cavity_decay;
  const double wm = params.mirror_freq;
  const double wb = params.bogoliubov_freq;

  DriftMatrix out;
  out.point = op;
  Matrix6& K = out.K;
  K(x, x) = -kappa;
  K(x, y) = op.delta;
  K(y, x) = -op.delta;
  K(y, y) = -kappa;
  K(y, q) = 2 * op.G_m;
  K(y, Q) = -2 * op.G_a;
  K(q, p) = wm;
  K(p, q) = -wm;
  K(p, p) = -couplings.gamma;
  K(p, x) = op.G_m;
  K(Q, P) = wb;
  K(P, Q) = -wb;
  K(P, x) = -op.G_a;
  return out;
}

DiffusionMatrix build_diffusion_matrix(const PhysicalParams& params, const DerivedCouplings& couplings,
                                       BathModel bath) {
  DiffusionMatrix out;
  out.bath = bath;
  const double kappa = params.cavity_decay;
  out.D(basis::x, basis::x) = 2 * kappa;
  out.D(basis::y, basis::y) = 2 * kappa;
  const double occupancy = bath == BathModel::high_t_white ? couplings.classical_occupancy
                                                           : couplings.thermal_occupancy;
  out.D(basis::p, basis::p) = couplings.gamma * (2 * occupancy + 1);
  return out;
}

namespace {

Stability classify(double max_real, double eps) {
  if (max_real < -eps) return Stability::stable;
  if (max_real > eps) return Stability::unstable;
  return Stability::marginal;
}

Eigen::VectorXcd eigenvalues_of(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("stability: nonsymmetric eigensolver did not converge");
  }
  return es.eigenvalues();
}

}  // namespace

StabilityReport stability(const DriftMatrix& drift) {
  const Matrix6& K = drift.K;
  StabilityReport r;
  r.epsilon = 1e-9 * K.cwiseAbs().maxCoeff();

  const Eigen::VectorXcd ev = eigenvalues_of(K);
  r.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::sort(r.eigenvalues.begin(), r.eigenvalues.end(), [](auto a, auto b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  r.max_real = -INFINITY;
  for (auto l : r.eigenvalues) r.max_real = std::max(r.max_real, l.real());
  r.classification = classify(r.max_real, r.epsilon);

  if (atom_block_decoupled(K)) {
    const Eigen::VectorXcd sub = eigenvalues_of(K.topLeftCorner<4, 4>());
    const Eigen::VectorXcd atom = eigenvalues_of(K.bottomRightCorner<2, 2>());
    double sub_max = -INFINITY;
    for (int i = 0; i < sub.size(); ++i) sub_max = std::max(sub_max, sub[i].real());
    double atom_max = -INFINITY;
    for (int i = 0; i < atom.size(); ++i) atom_max = std::max(atom_max, atom[i].real());
    // An undamped, unexcited block cannot affect anything else.
    r.coupled_max_real = classify(atom_max, r.epsilon) == Stability::marginal
                             ? sub_max
                             : std::max(sub_max, atom_max);
  } else {
    r.coupled_max_real = r.max_real;
  }
  r.coupled_classification = classify(r.coupled_max_real, r.epsilon);
  return r;
}

DriftMatrix drift_at(double delta, const System& sys) {
  return build_drift_matrix(operating_point_at_detuning(delta, sys.params, sys.couplings), sys.params,
                            sys.couplings);
}

}  // namespace cavbec
