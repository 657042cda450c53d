#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "graph_fixtures.hpp"
#include "graphrqi/errors.hpp"
#include "graphrqi/spectral.hpp"

using namespace graphrqi;

namespace {

DynamicLaplacian p3_state() {
  DynamicLaplacian g;
  step(g, {{1, {0, 0}}, {2, {1, 0}}, {3, {2, 0}}}, 1);
  return g;
}

void check_against_reference(const DynamicLaplacian& g, const Spectrum& s, double tol) {
  const Eigen::MatrixXd lap = g.dense();
  const Eigen::VectorXd ev = testing::reference_eigenvalues(lap);
  const int n = static_cast<int>(ev.size());
  const int k = s.k();
  const double scale = std::max(1.0, g.inf_norm());
  for (int j = 0; j < k; ++j) {
    CHECK(std::abs(s.values[j] - ev[n - k + j]) <= tol * std::max(1.0, std::abs(ev[n - k + j])));
    CHECK(s.residuals[j] <= 1e-8 * scale);
  }
}

}  // namespace

TEST_CASE("graphrqi spectrum of P3 from a cold start") {
  const auto g = p3_state();
  const Spectrum s = graphrqi_spectrum(g, nullptr, SolverConfig{.k = 3});
  REQUIRE(s.k() == 3);
  CHECK(std::abs(s.values[0]) < 1e-12);
  CHECK(s.values[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.values[2] == doctest::Approx(3.0).epsilon(1e-12));
  // Sign convention: the largest-magnitude entry is positive.
  CHECK(s.vectors(1, 2) > 0);
  CHECK(s.vectors(1, 2) == doctest::Approx(2 / std::sqrt(6.0)));
}

TEST_CASE("warm start on an unchanged state converges immediately") {
  const auto g = p3_state();
  const SolverConfig cfg{.k = 2};
  const Spectrum cold = graphrqi_spectrum(g, nullptr, cfg);
  IncrementalEigensolver solver(cfg);
  solver.update(g);
  const Spectrum warm = solver.update(g);
  for (int j = 0; j < 2; ++j) {
    CHECK(warm.values[j] == doctest::Approx(cold.values[j]).epsilon(1e-12));
    CHECK(warm.iterations[static_cast<std::size_t>(j)] <= 1);
  }
}

TEST_CASE("smallest mode returns the kernel") {
  const auto g = p3_state();
  SolverConfig cfg{.k = 1};
  cfg.end = SpectrumEnd::kSmallest;
  const Spectrum s = graphrqi_spectrum(g, nullptr, cfg);
  CHECK(std::abs(s.values[0]) < 1e-12);
  for (int i = 0; i < 3; ++i) CHECK(s.vectors(i, 0) == doctest::Approx(1 / std::sqrt(3.0)));
}

TEST_CASE("k out of range") {
  const auto g = p3_state();
  CHECK_THROWS_AS(graphrqi_spectrum(g, nullptr, SolverConfig{.k = 4}), ArgumentError);
  CHECK_THROWS_AS(graphrqi_spectrum(DynamicLaplacian{}, nullptr, SolverConfig{.k = 1}),
                  ArgumentError);
  CHECK_THROWS_AS(inverse_iteration_baseline(testing::path3(), 4, SolverConfig{}), ArgumentError);
}

TEST_CASE("baseline agrees with graphrqi on random graphs") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd lap = testing::random_laplacian(12 + trial, 0.3, rng);
    const Spectrum base = inverse_iteration_baseline(lap, 4, SolverConfig{});
    const Spectrum oracle = dense_oracle(lap);
    const int n = oracle.k();
    for (int j = 0; j < 4; ++j) {
      const double want = oracle.values[n - 4 + j];
      CHECK(std::abs(base.values[j] - want) <= 1e-6 * std::max(1.0, want));
    }
  }
}

TEST_CASE("incremental solver tracks a growing sequence") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto frames = testing::growing_sequence(5, 40, seed);
    DynamicLaplacian g;
    IncrementalEigensolver solver(SolverConfig{.k = 6});
    for (const auto& f : frames) {
      step(g, f.positions, 4);
      const int k = std::min<int>(6, static_cast<int>(g.size()));
      const Spectrum s = solver.update(g, k);
      check_against_reference(g, s, 1e-6);
    }
    CHECK(solver.refactorizations() >= 1);
  }
}

TEST_CASE("chain cap forces refactorization") {
  const auto frames = testing::growing_sequence(5, 40, 9);
  DynamicLaplacian g;
  SolverConfig cfg{.k = 3};
  cfg.chain_cap = 4;
  IncrementalEigensolver solver(cfg);
  for (const auto& f : frames) {
    step(g, f.positions, 4);
    const Spectrum s = solver.update(g);
    CHECK(solver.last_stats().chain_length <= 4);
    check_against_reference(g, s, 1e-6);
  }
}

TEST_CASE("graphrqi_spectrum with a previous spectrum runs from the base") {
  const auto frames = testing::growing_sequence(6, 20, 3);
  DynamicLaplacian g;
  Spectrum prev;
  for (const auto& f : frames) {
    step(g, f.positions, 4);
    const SolverConfig cfg{.k = 4};
    const Spectrum s = graphrqi_spectrum(g, prev.empty() ? nullptr : &prev, cfg);
    check_against_reference(g, s, 1e-6);
    prev = s;
  }
}

TEST_CASE("reset keeps the solver consistent") {
  const auto frames = testing::growing_sequence(8, 30, 4);
  DynamicLaplacian g;
  IncrementalEigensolver solver(SolverConfig{.k = 4});
  for (const auto& f : frames) {
    step(g, f.positions, 4);
    maybe_reset(g, 5);
    const Spectrum s = solver.update(g);
    check_against_reference(g, s, 1e-6);
  }
}
