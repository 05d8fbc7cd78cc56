#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "cavbec/dynamics.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace cavbec;

namespace {

oracle::Mat to_mp(const Matrix6& K) {
  oracle::Mat m{};
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) m[i][j] = K(i, j);
  }
  return m;
}

System random_system(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  auto logu = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(rng)); };
  auto p = fixture::paper_params(fixture::kappa_shipped);
  p.cavity_decay = logu(3e6, 1e8);
  p.quality_factor = logu(1e2, 1e6);
  p.pump_power = logu(1e-4, 5e-2);
  p.bogoliubov_freq = p.mirror_freq * logu(0.1, 3);
  p.bath_temperature = logu(1e-3, 300);
  auto sys = System::from(p);
  return sys.with_zeta(sys.mirror_rate() * logu(1e-2, 2));
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("uncoupled drift is block diagonal") {
    const auto sys = fixture::paper(0).with_power(0);
    const double delta = 0.3 * sys.kappa();
    const auto K = drift_at(delta, sys).K;
    CHECK(K.block<2, 4>(0, 2).isZero(0));
    CHECK(K.block<4, 2>(2, 0).isZero(0));
    const auto rep = stability(drift_at(delta, sys));
    int cavity = 0;
    for (auto l : rep.eigenvalues) {
      if (std::abs(l.real() + sys.kappa()) < 1e-6 && std::abs(std::abs(l.imag()) - delta) < 1e-6) ++cavity;
    }
    CHECK(cavity == 2);
  }

  TEST_CASE("entries match the extended-precision derivation") {
    const auto sys = fixture::paper(0.7);
    const double delta = sys.kappa() / 2;
    const auto K = drift_at(delta, sys).K;
    const auto ref = oracle::drift(oracle::point(sys.params, delta));
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        const double r = static_cast<double>(ref[i][j]);
        CAPTURE(i);
        CAPTURE(j);
        CHECK(std::abs(K(i, j) - r) <= 1e-13 * std::abs(r));
      }
    }
  }

  TEST_CASE("push signs") {
    const auto sys = fixture::paper(0.7);
    const auto K = drift_at(sys.kappa() / 2, sys).K;
    CHECK(K(basis::y, basis::q) > 0);
    CHECK(K(basis::y, basis::Q) < 0);
    CHECK(K(basis::p, basis::x) > 0);
    CHECK(K(basis::P, basis::x) < 0);
    CHECK(K(basis::y, basis::q) == 2 * K(basis::p, basis::x));
    CHECK(K(basis::y, basis::Q) == 2 * K(basis::P, basis::x));
  }

  TEST_CASE("trace and conjugate pairs") {
    const auto sys = fixture::paper(0.7);
    const auto d = drift_at(0.4 * sys.kappa(), sys);
    CHECK(d.K.trace() == -2 * sys.kappa() - sys.couplings.gamma);
    const auto rep = stability(d);
    REQUIRE(rep.eigenvalues.size() == 6);
    for (auto l : rep.eigenvalues) {
      const bool has_conjugate = std::any_of(rep.eigenvalues.begin(), rep.eigenvalues.end(), [&](auto m) {
        return std::abs(m - std::conj(l)) <= 1e-9 * std::abs(l);
      });
      CHECK(has_conjugate);
    }
  }

  TEST_CASE("free Bogoliubov pair") {
    const auto sys = fixture::paper(0);
    const auto rep = stability(drift_at(sys.kappa() / 2, sys));
    int found = 0;
    for (auto l : rep.eigenvalues) {
      if (l.real() == 0 && std::abs(std::abs(l.imag()) - sys.omega_b()) <= 1e-12 * sys.omega_b()) ++found;
    }
    CHECK(found == 2);
    CHECK(rep.classification == Stability::marginal);
    CHECK(rep.coupled_classification == Stability::stable);
    CHECK(atom_block_decoupled(drift_at(sys.kappa() / 2, sys).K));
    CHECK_FALSE(atom_block_decoupled(drift_at(sys.kappa() / 2, fixture::paper(0.7)).K));
  }

  TEST_CASE("diffusion matrix") {
    const auto sys = fixture::paper(0);
    const auto D = build_diffusion_matrix(sys.params, sys.couplings, BathModel::high_t_white);
    CHECK(D.D(basis::x, basis::x) == 2 * sys.kappa());
    CHECK(D.D(basis::y, basis::y) == 2 * sys.kappa());
    CHECK(D.D(basis::p, basis::p) ==
          doctest::Approx(sys.couplings.gamma * (2 * sys.couplings.classical_occupancy + 1)).epsilon(1e-15));
    CHECK(sys.couplings.classical_occupancy == doctest::Approx(2.27e7).epsilon(0.01));
    Matrix6 rest = D.D;
    rest(0, 0) = rest(1, 1) = rest(3, 3) = 0;
    CHECK(rest.isZero(0));

    auto cold = sys.params;
    cold.bath_temperature = 1e-30;
    const auto cs = System::from(cold);
    const auto Dc = build_diffusion_matrix(cs.params, cs.couplings, BathModel::high_t_white);
    CHECK(Dc.D(basis::p, basis::p) == doctest::Approx(cs.couplings.gamma).epsilon(1e-12));
    CHECK(Dc.D(basis::x, basis::x) == D.D(basis::x, basis::x));

    CHECK(build_diffusion_matrix(sys.params, sys.couplings, BathModel::quantum_exact).bath == BathModel::quantum_exact);
  }

  TEST_CASE("weak coupling is stable at positive detuning") {
    const auto sys = fixture::paper(0.7);
    const auto rep = stability(drift_at(sys.kappa() / 2, sys));
    CHECK(rep.classification == Stability::stable);
    CHECK(rep.epsilon == doctest::Approx(1e-9 * drift_at(sys.kappa() / 2, sys).K.cwiseAbs().maxCoeff()));
  }

  TEST_CASE("blue detuning with strong coupling is unstable") {
    const auto sys = fixture::paper(0.7).with_power(0.1);
    const auto d = drift_at(-0.5 * sys.kappa(), sys);
    CHECK(stability(d).classification == Stability::unstable);
    CHECK(oracle::routh_hurwitz(to_mp(d.K)) == oracle::Hurwitz::unstable);
  }

  TEST_CASE("classification agrees with Routh-Hurwitz on random draws") {
    std::mt19937_64 rng(20261019);
    std::uniform_real_distribution<double> u(-2, 2);
    int compared = 0, unstable = 0;
    for (int n = 0; n < 1000; ++n) {
      const auto sys = random_system(rng);
      const auto d = drift_at(u(rng) * sys.kappa(), sys);
      const auto rep = stability(d);
      if (rep.classification == Stability::marginal) continue;
      const auto rh = oracle::routh_hurwitz(to_mp(d.K));
      CAPTURE(n);
      CHECK(rh != oracle::Hurwitz::degenerate);
      CHECK((rep.classification == Stability::stable) == (rh == oracle::Hurwitz::stable));
      ++compared;
      unstable += rep.classification == Stability::unstable;
    }
    CHECK(compared > 900);
    CHECK(unstable > 50);
  }

  TEST_CASE("basis header") { CHECK(basis::header() == "dx,dy,dq,dp,dQ,dP"); }
}
