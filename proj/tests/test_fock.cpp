#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "ggr/constants.hpp"
#include "ggr/expansion.hpp"
#include "ggr/fock.hpp"
#include "ggr/free_lattice.hpp"

using namespace ggr;

namespace {

LatticeModel ring_model(int M, double beta, double mu, double eta = 0.0, double w = 1.2,
                        double v0 = 0.0) {
  return make_lattice_model(
      {1, M, 1.0}, beta, mu,
      [eta, w](double r) { return 1.0 - eta * std::exp(-(r * r) / (w * w)); },
      [v0](double r) { return v0 * std::exp(-r * r); });
}

} // namespace

TEST_CASE("two-site closed form fixes the partition function", "[fock]") {
  // one-particle levels on the two-site ring are 0 and 4/h^2
  const double beta = 0.7, mu = 0.4;
  const auto state = ExactState(ring_model(2, beta, mu));
  const double expect = (1.0 + std::exp(beta * mu)) * (1.0 + std::exp(beta * (mu - 4.0)));
  CHECK(state.Z() == Catch::Approx(expect).epsilon(1e-12));
  CHECK(state.Z_determinant() == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("sector traces agree with the determinant identity", "[fock]") {
  for (int M : {5, 6, 8}) {
    const auto state = ExactState(ring_model(M, 1.1, -0.2));
    INFO("M=" << M);
    CHECK(state.Z() == Catch::Approx(state.Z_determinant()).epsilon(1e-10));
  }
}

TEST_CASE("free kernel matches the torus model and Wick's rule", "[fock]") {
  const int M = 6;
  const double beta = 0.9, mu = 0.1;
  const auto state = ExactState(ring_model(M, beta, mu));
  DiscreteTorusModel torus;
  torus.grid = {1, M, 1.0};
  torus.beta = beta;
  torus.mu = mu;
  torus.dispersion = DispersionKind::TightBinding;
  const auto kernel = torus.kernel_table();
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      CHECK(state.gamma1(i, j) ==
            Catch::Approx(kernel[static_cast<std::size_t>(torus.grid.wrap(i - j))]).margin(1e-12));
  // two- and three-point functions factorize into kernel determinants
  for (int x : {1, 2, 3}) {
    const double wick = state.gamma1(0, 0) * state.gamma1(x, x) -
                        state.gamma1(0, x) * state.gamma1(x, 0);
    CHECK(state.rho_free({0, static_cast<long long>(x)}) ==
          Catch::Approx(wick).margin(1e-10));
  }
  const double w3 = wick_density(torus.grid, kernel, {{{0, 0, 0}}, {{2, 0, 0}}, {{3, 0, 0}}});
  CHECK(state.rho_free({0, 2, 3}) == Catch::Approx(w3).margin(1e-10));
}

TEST_CASE("sector propagator equals the Slater determinant form", "[fock]") {
  const auto model = ring_model(6, 0.8, 0.3);
  const auto state = ExactState(model);
  std::mt19937 rng(11u);
  std::uniform_int_distribution<std::uint32_t> draw(0, (1u << 6) - 1);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint32_t c1 = draw(rng), c2 = draw(rng);
    if (__builtin_popcount(c1) != __builtin_popcount(c2)) continue;
    ++checked;
    CHECK(state.propagator(c1, c2) ==
          Catch::Approx(slater_propagator(model, c1, c2)).margin(1e-10));
  }
  REQUIRE(checked > 40);
}

TEST_CASE("trivial pair factor reduces the correlated state to the free one", "[fock]") {
  const int M = 8;
  const double beta = 1.2, mu = -0.1;
  const auto state = ExactState(ring_model(M, beta, mu));
  CHECK(state.ZJ() == Catch::Approx(state.Z()).epsilon(1e-12));
  // entropy equals the one-particle occupation entropy of the free state
  DiscreteTorusModel torus;
  torus.grid = {1, M, 1.0};
  torus.beta = beta;
  torus.mu = mu;
  torus.dispersion = DispersionKind::TightBinding;
  double s_free = 0.0, n_free = 0.0;
  for (int k = 0; k < M; ++k) {
    const double n = torus.occupation({k, 0, 0});
    n_free += n;
    if (n > 0.0 && n < 1.0) s_free += -n * std::log(n) - (1.0 - n) * std::log(1.0 - n);
  }
  CHECK(state.entropy_J() == Catch::Approx(s_free).margin(1e-10));
  CHECK(state.mean_N_J() == Catch::Approx(n_free).margin(1e-10));
  // at its maximizer the pressure functional equals (1/beta V) log Z
  CHECK(state.pressure_J() == Catch::Approx(state.pressure_free_gibbs()).margin(1e-12));
  CHECK(state.pressure_interacting_gibbs() ==
        Catch::Approx(state.pressure_free_gibbs()).margin(1e-12));
}

TEST_CASE("hard-core pair factor empties the contact density", "[fock]") {
  auto model = make_lattice_model(
      {1, 8, 1.0}, 1.0, 0.2, [](double r) { return r > 0.0 && r < 1.5 ? 0.0 : 1.0; });
  const auto state = ExactState(model);
  CHECK(state.rho_J({0, 1}) == 0.0);
  CHECK(state.rho_J({3, 4}) == 0.0);
  CHECK(state.rho_J({0, 2}) > 0.0);
  CHECK(state.trace_J() == Catch::Approx(1.0).margin(1e-12));
  CHECK(state.min_eigenvalue_J() >= -1e-12);
  CHECK(state.ZJ() < state.Z()); // excluded configurations can only lower the trace
}

TEST_CASE("state structure and entropy inequality on random instances", "[fock]") {
  std::mt19937 rng(20240816u);
  std::uniform_real_distribution<double> ubeta(0.8, 1.4), umu(-0.6, 0.3), ueta(0.05, 0.35),
      uw(0.8, 1.4);
  for (int trial = 0; trial < 6; ++trial) {
    const int M = 6 + 2 * (trial % 2);
    const auto model = ring_model(M, ubeta(rng), umu(rng), ueta(rng), uw(rng));
    const auto state = ExactState(model);
    INFO("trial " << trial << " M=" << M);
    CHECK(state.trace_J() == Catch::Approx(1.0).margin(1e-12));
    CHECK(state.min_eigenvalue_J() >= -1e-12);
    CHECK(state.entropy_J() >= 0.0);
    CHECK(state.entropy_J() <= M * std::log(2.0) + 1e-12);
    // -S/beta <= -(1/beta) log Z_J + d_beta log Z_J
    const double margin = state.entropy_J() / model.beta -
                          state.log_ZJ() / model.beta + state.d_beta_log_ZJ();
    CHECK(margin >= -1e-8);
    // the finite difference agrees with the exact spectral derivative
    const double exact_deriv = state.d_beta_log_ZJ_spectral();
    CHECK(state.d_beta_log_ZJ() == Catch::Approx(exact_deriv).epsilon(1e-9).margin(1e-11));
    // and differs in general from -Tr[(H - mu N) Gamma_J]: F does not commute
    // with the hopping Hamiltonian, so the naive Gibbs identity fails here.
    // (Both are derivative-like; only the spectral form matches log Z_J.)
    // translation invariance ties <N>_J to the one-point density
    CHECK(state.mean_N_J() ==
          Catch::Approx(M * state.rho_J({0})).epsilon(1e-10));
  }
}

TEST_CASE("trial states never beat the interacting Gibbs pressure", "[fock]") {
  std::mt19937 rng(77u);
  std::uniform_real_distribution<double> ubeta(0.8, 1.3), umu(-0.4, 0.3), ueta(0.1, 0.4),
      uv(0.2, 2.0);
  for (int trial = 0; trial < 6; ++trial) {
    const int M = trial % 2 ? 6 : 8;
    const auto model = ring_model(M, ubeta(rng), umu(rng), ueta(rng), 1.1, uv(rng));
    const auto state = ExactState(model);
    INFO("trial " << trial);
    CHECK(state.pressure_J() <= state.pressure_interacting_gibbs() + 1e-12);
  }
}

TEST_CASE("entropy grows toward full mixing as temperature rises", "[fock]") {
  const int M = 6;
  double prev = -1.0;
  for (double beta : {1.0, 0.5, 0.1, 0.02}) {
    const auto state = ExactState(ring_model(M, beta, 0.0));
    CHECK(state.entropy_J() > prev);
    prev = state.entropy_J();
  }
  CHECK(prev >= 0.995 * M * std::log(2.0));
}

TEST_CASE("linked-diagram truncations converge to the exact log ratio", "[fock]") {
  const auto model = ring_model(10, 1.0, 0.0, 0.25, 1.2);
  const ExactState exact(model);
  const auto tables = oracle_tables(model);
  ConstantRegistry reg;
  fit_tail_constants(tables, 0, 4, {}, reg);
  INFO(reg.dump());
  const auto r2 = compare_ggr(exact, tables, 2, reg);
  const auto r3 = compare_ggr(exact, tables, 3, reg);
  const auto r4 = compare_ggr(exact, tables, 4, reg);
  INFO("exact=" << r2.exact_log_ratio << " residuals " << r2.residual << " " << r3.residual
                << " " << r4.residual << " tail4=" << r4.tail);
  CHECK(r2.in_regime);
  CHECK(r3.residual < r2.residual);
  CHECK(r4.residual < r2.residual);
  CHECK(r4.residual <= r4.tail);
  // trivial pair factor: the ratio collapses and every truncation is exact
  const auto trivial = compare_ggr(ring_model(10, 1.0, 0.0, 0.0), 3, reg);
  CHECK(std::abs(trivial.exact_log_ratio) < 1e-12);
  CHECK(trivial.truncated == 0.0);
  CHECK(trivial.residual < 1e-12);
}

TEST_CASE("reduced densities match the external-rooted expansion", "[fock]") {
  const auto model = ring_model(10, 1.0, -0.2, 0.2, 1.1);
  const ExactState exact(model);
  const auto tables = oracle_tables(model);
  ConstantRegistry reg;
  fit_tail_constants(tables, 0, 4, {}, reg);
  fit_tail_constants(tables, 1, 3, {0}, reg);
  fit_tail_constants(tables, 2, 2, {0, 3}, reg);
  const auto norms = expansion_norms(tables);
  // one-point density: oracle vs truncated series within the class tail
  const auto r1 = rhoJ_expansion(tables, 1, {0}, 3, reg);
  const double exact1 = exact.rho_J({0});
  INFO("rho1 exact=" << exact1 << " series=" << r1.total << " tail=" << r1.tail);
  CHECK(std::abs(exact1 - r1.total) <= tail_sum(1, 3, norms, reg) + 1e-13);
  // two-point density at separation 3
  const auto r2 = rhoJ_expansion(tables, 2, {0, 3}, 2, reg);
  const double exact2 = exact.rho_J({0, 3});
  INFO("rho2 exact=" << exact2 << " series=" << r2.total);
  CHECK(std::abs(exact2 - r2.total) <= tail_sum(2, 2, norms, reg) + 1e-13);
}
