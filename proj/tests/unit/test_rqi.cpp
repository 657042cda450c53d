#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "graph_fixtures.hpp"
#include "graphrqi/errors.hpp"
#include "graphrqi/rqi.hpp"

using namespace graphrqi;

namespace {

std::vector<Eigen::VectorXd> none;
std::vector<double> no_values;

}  // namespace

TEST_CASE("rayleigh quotient") {
  CHECK(rayleigh_quotient(testing::k2(), Eigen::Vector2d(1, -1)) == 2.0);
  CHECK(rayleigh_quotient(testing::k2(), Eigen::Vector2d(1, 1)) == 0.0);
  Eigen::Vector3d top(1, -2, 1);
  CHECK(rayleigh_quotient(testing::path3(), top) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_THROWS_AS(rayleigh_quotient(testing::k2(), Eigen::Vector2d::Zero()), ArgumentError);
  CHECK_THROWS_AS(rayleigh_quotient(testing::k2(), Eigen::Vector3d::Ones()), ArgumentError);
}

TEST_CASE("rqi: K2 from mu0 = 1.5 finds lambda = 2") {
  DenseShiftedSystem sys(testing::k2());
  const auto r = rqi_eigenpair(sys, 1.5, Eigen::Vector2d(1, 0), none, no_values, SolverConfig{});
  CHECK(r.lambda == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(std::abs(r.vector[0]) - 1 / std::sqrt(2.0)) < 1e-10);
  CHECK(r.vector[0] * r.vector[1] < 0);
}

TEST_CASE("rqi: K2 with the top vector locked finds the kernel") {
  DenseShiftedSystem sys(testing::k2());
  std::vector<Eigen::VectorXd> locked{Eigen::Vector2d(1, -1).normalized()};
  std::vector<double> values{2.0};
  const auto r = rqi_eigenpair(sys, 0.5, Eigen::Vector2d(1, 0), locked, values, SolverConfig{});
  CHECK(std::abs(r.lambda) < 1e-12);
  CHECK(std::abs(r.vector[0] - r.vector[1]) < 1e-10);
}

TEST_CASE("rqi: P3 from mu0 = 2.5 finds lambda = 3") {
  DenseShiftedSystem sys(testing::path3());
  const auto r =
      rqi_eigenpair(sys, 2.5, Eigen::Vector3d(0.2, -1.0, 0.4), none, no_values, SolverConfig{});
  CHECK(r.lambda == doctest::Approx(3.0).epsilon(1e-12));
  const Eigen::Vector3d want = Eigen::Vector3d(1, -2, 1).normalized();
  CHECK(std::abs(std::abs(r.vector.dot(want)) - 1.0) < 1e-12);
  CHECK(r.residual <= 1e-8 * 3);
}

TEST_CASE("rqi: argument errors and non-convergence") {
  DenseShiftedSystem sys(testing::path3());
  CHECK_THROWS_AS(rqi_eigenpair(sys, 0.0, Eigen::Vector3d::Zero(), none, no_values, SolverConfig{}),
                  ArgumentError);
  std::vector<Eigen::VectorXd> locked{Eigen::Vector3d(1, 0, 0)};
  std::vector<double> v{0.0};
  CHECK_THROWS_AS(rqi_eigenpair(sys, 0.0, Eigen::Vector3d(1, 0, 0), locked, v, SolverConfig{}),
                  ArgumentError);

  SolverConfig one;
  one.max_iter = 1;
  std::mt19937_64 rng(2);
  DenseShiftedSystem big(testing::random_laplacian(30, 0.2, rng));
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(30, 1, 2);
  try {
    rqi_eigenpair(big, 3.3, x, none, no_values, one);
    FAIL("expected NonConvergenceError");
  } catch (const NonConvergenceError& e) {
    CHECK(e.best_vector().size() == 30);
    CHECK(e.iterations() == 1);
  }
}

TEST_CASE("rqi: an exact eigenvector converges in one iteration despite the singular shift") {
  DenseShiftedSystem sys(testing::path3());
  const Eigen::Vector3d u = Eigen::Vector3d(1, 0, -1).normalized();
  const auto r = rqi_eigenpair(sys, 1.0, u, none, no_values, SolverConfig{});
  CHECK(r.iterations == 1);
  CHECK(r.shift_perturbations >= 1);
  CHECK(r.lambda == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("solve_extreme_pairs recovers the k largest from bad seeds") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto lap = testing::random_laplacian(25, 0.25, rng);
    const Eigen::VectorXd ev = testing::reference_eigenvalues(lap);
    DenseShiftedSystem sys(lap);
    // Seeds aimed at the bottom of the spectrum force the inertia repair.
    std::vector<RqiSeed> seeds;
    for (int j = 0; j < 4; ++j) seeds.push_back({0.1 * j, Eigen::VectorXd()});
    const auto out = solve_extreme_pairs(sys, seeds, 4, SolverConfig{}, 10.0, rng);
    std::vector<double> got;
    for (const auto& p : out.pairs) got.push_back(p.lambda);
    std::sort(got.begin(), got.end());
    for (int j = 0; j < 4; ++j) CHECK(got[static_cast<std::size_t>(j)] == doctest::Approx(ev[21 + j]).epsilon(1e-9));
  }
}

TEST_CASE("solve_extreme_pairs: smallest end") {
  std::mt19937_64 rng(78);
  const auto lap = testing::random_laplacian(20, 0.3, rng);
  const Eigen::VectorXd ev = testing::reference_eigenvalues(lap);
  DenseShiftedSystem sys(lap);
  SolverConfig cfg;
  cfg.end = SpectrumEnd::kSmallest;
  const auto out = solve_extreme_pairs(sys, {}, 3, cfg, 10.0, rng);
  std::vector<double> got;
  for (const auto& p : out.pairs) got.push_back(p.lambda);
  std::sort(got.begin(), got.end());
  for (int j = 0; j < 3; ++j) CHECK(std::abs(got[static_cast<std::size_t>(j)] - ev[j]) < 1e-9);
}
