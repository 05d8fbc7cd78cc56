#include "cavbec/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "cavbec/error.hpp"
#include "cavbec/parallel.hpp"
#include "cavbec/thermo.hpp"

namespace cavbec {

namespace {

std::vector<int> active_indices(const Matrix6& K, const Matrix6& D) {
  const bool drop_atom = atom_block_decoupled(K) && D.block<2, 6>(4, 0).isZero(0) &&
                         D.block<6, 2>(0, 4).isZero(0);
  std::vector<int> idx = {0, 1, 2, 3};
  if (!drop_atom) idx.insert(idx.end(), {4, 5});
  return idx;
}

Eigen::MatrixXd restrict(const Matrix6& M, const std::vector<int>& idx) {
  const int n = static_cast<int>(idx.size());
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = M(idx[i], idx[j]);
  return out;
}

double max_real_part(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  return es.eigenvalues().real().maxCoeff();
}

std::uint64_t splitmix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

double lyapunov_residual(const Matrix6& K, const Matrix6& V, const Matrix6& D) {
  return (K * V + V * K.transpose() + D).cwiseAbs().maxCoeff();
}

CovarianceMatrix lyapunov_covariance(const Matrix6& K, const Matrix6& D) {
  const auto idx = active_indices(K, D);
  const int n = static_cast<int>(idx.size());
  const Eigen::MatrixXd Ka = restrict(K, idx);
  const Eigen::MatrixXd Da = restrict(D, idx);

  const double eps = 1e-9 * K.cwiseAbs().maxCoeff();
  if (!(max_real_part(Ka) < -eps)) {
    throw NoSteadyState("lyapunov_covariance: drift matrix is not strictly stable");
  }

  // (I (x) K + K (x) I) vec(V) = -vec(D), column-major vec.
  const int m = n * n;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        A(i + n * j, k + n * j) += Ka(i, k);
        A(i + n * j, i + n * k) += Ka(j, k);
      }
  Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(Da.data(), m);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  if (!(lu.rcond() > 1e-15)) {
    throw SingularConfiguration("lyapunov_covariance: Kronecker system is singular (rcond " +
                                std::to_string(lu.rcond()) + ")");
  }
  Eigen::VectorXd v = lu.solve(rhs);
  for (int it = 0; it < 2; ++it) v += lu.solve(rhs - A * v);

  CovarianceMatrix out;
  out.bath = BathModel::high_t_white;
  const Eigen::Map<const Eigen::MatrixXd> Va(v.data(), n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.V(idx[i], idx[j]) = 0.5 * (Va(i, j) + Va(j, i));

  const double res = lyapunov_residual(K, out.V, D);
  const double scale = D.cwiseAbs().maxCoeff() + 2 * K.cwiseAbs().maxCoeff() * out.V.cwiseAbs().maxCoeff();
  if (res > 1e-12 * scale) {
    throw InternalError("lyapunov_covariance: residual " + std::to_string(res) + " above bound");
  }
  return out;
}

CovarianceMatrix lyapunov_covariance(const DriftMatrix& K, const DiffusionMatrix& D) {
  if (D.bath == BathModel::quantum_exact) {
    throw UnsupportedCombination("lyapunov_covariance needs white noise; use the high-t-white bath");
  }
  auto out = lyapunov_covariance(K.K, D.D);
  out.bath = D.bath;
  return out;
}

std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

double max_step(const Matrix6& K) {
  Eigen::EigenSolver<Matrix6> es(K, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
  return lmax > 0 ? 0.05 / lmax : INFINITY;
}

namespace {

struct Trajectory {
  std::vector<Matrix6> batch_means;
  Vector6 final_state = Vector6::Zero();
  bool aborted = false;
  double abort_time = 0;
};

Trajectory run_trajectory(const Matrix6& K, const Matrix6& B, const TimeDomainOptions& o, std::uint64_t steps,
                          std::uint64_t seed) {
  Trajectory tr;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double sqdt = std::sqrt(o.dt);
  const Matrix6 step = Matrix6::Identity() + o.dt * K;

  const std::uint64_t half = steps / 2;
  const std::uint64_t per_batch = (steps - half) / o.batches;
  const std::uint64_t first_stat = steps - per_batch * o.batches;
  const std::uint64_t warmup = std::max<std::uint64_t>(1, steps / 20);

  Vector6 phi = o.initial;
  double norm_ref = phi.squaredNorm();
  double warm_sum = 0;
  Matrix6 acc = Matrix6::Zero();
  std::uint64_t in_batch = 0;
  Vector6 xi;
  for (std::uint64_t s = 1; s <= steps; ++s) {
    for (int i = 0; i < 6; ++i) xi(i) = normal(rng);
    phi = step * phi + sqdt * (B * xi);

    const double n2 = phi.squaredNorm();
    if (s <= warmup) {
      warm_sum += n2;
      if (s == warmup) norm_ref = std::max(norm_ref, warm_sum / static_cast<double>(warmup));
    }
    if (!std::isfinite(n2) || (s > warmup && n2 > 1e8 * std::max(norm_ref, 1e-300))) {
      tr.aborted = true;
      tr.abort_time = static_cast<double>(s) * o.dt;
      tr.final_state = phi;
      return tr;
    }
    if (s > first_stat) {
      acc.noalias() += phi * phi.transpose();
      if (++in_batch == per_batch) {
        tr.batch_means.push_back(acc / static_cast<double>(per_batch));
        acc.setZero();
        in_batch = 0;
      }
    }
  }
  tr.final_state = phi;
  return tr;
}

}  // namespace

TimeDomainResult simulate_time_domain(const Matrix6& K, const Matrix6& D, const TimeDomainOptions& o) {
  if (!(o.dt > 0) || !(o.t_end > 0)) throw InvalidParameter("dt", "dt and t_end must be > 0");
  if (o.trajectories == 0 || o.batches < 2) {
    throw InvalidParameter("batches", "need at least one trajectory and two batches");
  }
  const double limit = max_step(K);
  if (o.dt > limit) {
    throw StepSizeError("simulate_time_domain: dt = " + std::to_string(o.dt) + " exceeds 0.05/max|lambda| = " +
                        std::to_string(limit));
  }
  const auto steps = static_cast<std::uint64_t>(std::llround(o.t_end / o.dt));
  if (steps < 2ULL * o.batches) throw InvalidParameter("t_end", "too few steps for the requested batches");

  Eigen::SelfAdjointEigenSolver<Matrix6> es(0.5 * (D + D.transpose()));
  const Matrix6 B = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  std::vector<Trajectory> runs(o.trajectories);
  parallel_for(o.trajectories, o.threads, [&](std::size_t i) {
    runs[i] = run_trajectory(K, B, o, steps, trajectory_seed(o.seed, i));
  });

  TimeDomainResult out;
  out.steps = steps;
  out.final_state = runs[0].final_state;
  for (const auto& r : runs) {
    if (r.aborted) {
      out.aborted = true;
      out.abort_time = r.abort_time;
      return out;
    }
  }
  std::vector<Matrix6> all;
  for (const auto& r : runs) all.insert(all.end(), r.batch_means.begin(), r.batch_means.end());
  const double nb = static_cast<double>(all.size());
  out.batch_count = static_cast<unsigned>(all.size());
  Matrix6 mean = Matrix6::Zero();
  for (const auto& m : all) mean += m;
  mean /= nb;
  Matrix6 var = Matrix6::Zero();
  for (const auto& m : all) var += (m - mean).cwiseAbs2();
  var /= (nb - 1);
  out.V = 0.5 * (mean + mean.transpose());
  out.std_error = (var / nb).cwiseSqrt();
  return out;
}

bool CrossCheckReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const CrossCheckRow& r) { return r.pass; });
}

CrossCheckReport cross_check(const System& sys, const OperatingPoint& op, const CrossCheckOptions& opts) {
  const DriftMatrix K = build_drift_matrix(op, sys.params, sys.couplings);
  DiffusionMatrix D = build_diffusion_matrix(sys.params, sys.couplings, BathModel::high_t_white);
  const StabilityReport st = stability(K);
  if (st.coupled_classification != Stability::stable) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", st.coupled_max_real);
    throw NoSteadyState(std::string("cross_check: no steady state, operating point is ") +
                        to_string(st.coupled_classification) + " (max Re lambda = " + buf + " rad/s)");
  }
  if (opts.negative_control) D.D(basis::p, basis::p) *= 2;

  CrossCheckReport rep;
  rep.lyapunov = lyapunov_covariance(K, D);

  struct Quantity {
    const char* name;
    Observable obs;
    int index;
  };
  std::vector<Quantity> quantities = {{"var_q", Observable::q, basis::q}, {"var_p", Observable::p, basis::p}};
  if (!atom_block_decoupled(K.K)) quantities.push_back({"var_Q", Observable::Q, basis::Q});

  SpectralEngine engine(sys, op, NoiseModel::make(NoiseMode::high_t_white, sys.params, sys.couplings),
                        MomentumMode::exact);
  QuadratureOptions quad;
  quad.rel_tol = 1e-8;
  for (const auto& q : quantities) {
    const double spectral = variance(q.obs, engine, quad).value;
    const double lyap = rep.lyapunov.V(q.index, q.index);
    rep.rows.push_back({"spectral", q.name, spectral, NAN, NAN, true});
    const double tol = opts.spectral_tolerance * std::abs(lyap);
    rep.rows.push_back({"lyapunov", q.name, lyap, spectral, tol, std::abs(lyap - spectral) <= tol});
  }

  if (opts.time_domain) {
    Eigen::EigenSolver<Matrix6> es(K.K, false);
    const auto ev = es.eigenvalues();
    double lmax = 0;
    double slowest = INFINITY;
    for (int i = 0; i < 6; ++i) {
      lmax = std::max(lmax, std::abs(ev(i)));
      if (ev(i).real() < 0) slowest = std::min(slowest, -ev(i).real());
    }
    TimeDomainOptions td;
    td.dt = opts.dt_factor / lmax;
    td.t_end = opts.relaxation_times / slowest;
    if (!(td.t_end / td.dt <= opts.max_steps)) {
      throw InvalidParameter("relaxation_times", "time-domain run would need " + std::to_string(td.t_end / td.dt) +
                                                     " steps per trajectory (slowest decay rate " +
                                                     std::to_string(slowest) + " rad/s)");
    }
    td.seed = opts.seed;
    td.trajectories = opts.trajectories;
    td.threads = opts.threads;
    const auto sim = simulate_time_domain(K.K, D.D, td);
    for (const auto& q : quantities) {
      const double lyap = rep.lyapunov.V(q.index, q.index);
      if (sim.aborted) {
        rep.rows.push_back({"time-domain", q.name, NAN, lyap, NAN, false});
        continue;
      }
      const double v = sim.V(q.index, q.index);
      const double tol = opts.sigma_tolerance * sim.std_error(q.index, q.index);
      rep.rows.push_back({"time-domain", q.name, v, lyap, tol, std::abs(v - lyap) <= tol});
    }
  }
  return rep;
}

}  // namespace cavbec
