#include <cmath>
#include <random>

#include "doctest.h"
#include "graph_fixtures.hpp"
#include "graphrqi/dense_oracle.hpp"
#include "graphrqi/errors.hpp"

using namespace graphrqi;

TEST_CASE("oracle: K2 and P3") {
  const auto s2 = dense_oracle(testing::k2());
  CHECK(s2.values[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(s2.values[1] == doctest::Approx(2.0).epsilon(1e-14));

  // P3 characteristic polynomial: -l (l - 1)(l - 3).
  const auto s3 = dense_oracle(testing::path3());
  CHECK(std::abs(s3.values[0]) < 1e-14);
  CHECK(s3.values[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s3.values[2] == doctest::Approx(3.0).epsilon(1e-14));
  Eigen::Vector3d top(1, -2, 1);
  top /= std::sqrt(6.0);
  CHECK((s3.vectors.col(2).cwiseAbs() - top.cwiseAbs()).norm() < 1e-12);
  CHECK(s3.vectors.col(2)[1] > 0.0);  // sign: largest-magnitude entry positive
}

TEST_CASE("oracle: zero matrix") {
  const auto s = dense_oracle(Eigen::MatrixXd::Zero(5, 5));
  CHECK(s.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK((s.vectors.transpose() * s.vectors - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-14);
  CHECK(dense_oracle(Eigen::MatrixXd(0, 0)).values.size() == 0);
}

TEST_CASE("oracle: asymmetric input is rejected") {
  Eigen::MatrixXd a = testing::path3();
  a(0, 1) += 1e-9;
  CHECK_THROWS_AS(dense_oracle(a), ArgumentError);
  CHECK_THROWS_AS(dense_oracle(Eigen::MatrixXd::Zero(2, 3)), ArgumentError);
}

TEST_CASE("oracle: random Laplacians agree with an independent solver") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial * 2;
    const auto lap = testing::random_laplacian(n, 0.2, rng);
    const auto s = dense_oracle(lap);
    const double norm = std::max(1.0, lap.cwiseAbs().rowwise().sum().maxCoeff());
    CHECK((s.values - testing::reference_eigenvalues(lap)).cwiseAbs().maxCoeff() < 1e-10 * norm);
    CHECK(s.residuals.maxCoeff() <= 1e-10 * norm);
    CHECK((s.vectors.transpose() * s.vectors - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <
          1e-12);
    for (Eigen::Index j = 1; j < s.values.size(); ++j) CHECK(s.values[j - 1] <= s.values[j]);
  }
}
