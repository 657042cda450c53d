#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "graph_fixtures.hpp"
#include "graphrqi/dense_oracle.hpp"
#include "graphrqi/errors.hpp"
#include "graphrqi/features.hpp"
#include "graphrqi/synth.hpp"

using namespace graphrqi;

TEST_CASE("topology vector: K2 and the kernel") {
  const Eigen::Vector2d u = Eigen::Vector2d(1, -1) / std::sqrt(2.0);
  const auto tv = topology_vector(testing::k2(), u);
  CHECK(tv.w[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(tv.w[1] == doctest::Approx(-std::sqrt(2.0)));

  std::mt19937_64 rng(1);
  const auto lap = testing::random_laplacian(9, 0.4, rng);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(9) / 3.0;
  CHECK(topology_vector(lap, ones).w.cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(topology_vector(testing::k2(), Eigen::Vector3d::Ones()), ArgumentError);
}

TEST_CASE("star: the centre carries the largest gradient") {
  const auto lap = testing::star(3);
  const Spectrum s = dense_oracle(lap);
  const Eigen::VectorXd top = s.vectors.col(3);
  CHECK(s.values[3] == doctest::Approx(4.0));
  CHECK(std::abs(top.dot(Eigen::Vector4d(3, -1, -1, -1) / std::sqrt(12.0))) == doctest::Approx(1.0));
  const auto tv = aggressiveness_gradient(lap, s);
  CHECK(tv.source_eigindex == 3);
  for (int leaf = 1; leaf <= 3; ++leaf) CHECK(std::abs(tv.w[0]) > std::abs(tv.w[leaf]));
  const auto ranked = rank_by_magnitude(tv, {10, 11, 12, 13});
  CHECK(ranked.front().agent == 10);
  // Equal leaves are ordered by id.
  CHECK(ranked[1].agent == 11);
  CHECK(ranked[3].agent == 13);
}

TEST_CASE("ring C4: no agent is distinguished") {
  const auto lap = testing::ring(4);
  const auto tv = aggressiveness_gradient(lap, dense_oracle(lap));
  for (int i = 1; i < 4; ++i) CHECK(std::abs(tv.w[i]) == doctest::Approx(std::abs(tv.w[0])));
}

TEST_CASE("two disjoint K2s: no cross terms") {
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(4, 4);
  lap.topLeftCorner(2, 2) = testing::k2();
  lap.bottomRightCorner(2, 2) = testing::k2();
  const Eigen::Vector4d u = Eigen::Vector4d(1, -1, 0, 0) / std::sqrt(2.0);
  const auto tv = topology_vector(lap, u);
  CHECK(tv.w[2] == 0.0);
  CHECK(tv.w[3] == 0.0);
  CHECK(tv.w[0] == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("edge-sum identity and w = lambda u on growing graphs") {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    DynamicLaplacian g(GraphOptions{seed % 2 ? EdgeWeighting::kUnweighted : EdgeWeighting::kExponential});
    for (const auto& f : testing::growing_sequence(5, 30, seed)) {
      step(g, f.positions, 4);
      const Spectrum s = dense_oracle(g.dense());
      for (Eigen::Index j = 0; j < s.k(); ++j) {
        const Eigen::VectorXd u = s.vectors.col(j);
        const auto tv = topology_vector(g, u, static_cast<int>(j));
        worst = std::max(worst, (tv.w - neighbor_differences(g, u)).cwiseAbs().maxCoeff());
        CHECK((tv.w - s.values[j] * u).norm() <= s.residuals[j] + 1e-12);
        CHECK(std::abs(tv.w.sum() - s.values[j] * u.sum()) <= 1e-10);
      }
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("agent features are the rows of U") {
  Spectrum s;
  s.vectors.resize(3, 2);
  s.vectors << 1, 2, 3, 4, 5, 6;
  s.values = Eigen::Vector2d(1, 2);
  const auto fm = agent_features(s, {7, 8, 9});
  CHECK(fm.size() == 3);
  CHECK(fm.dim() == 2);
  CHECK(fm.rows(1, 1) == 4);
  CHECK(fm.agent_ids[2] == 9);
  const auto again = agent_features(s, {7, 8, 9});
  CHECK(again.rows == fm.rows);
  CHECK_THROWS_AS(agent_features(s, {1, 2}), ArgumentError);
}

TEST_CASE("relabelling agents permutes feature rows") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(0.1, 1.0);
  const int n = 8;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) a(i, j) = a(j, i) = uni(rng);
  Eigen::MatrixXd lap = -a;
  lap.diagonal() = a.rowwise().sum();
  Eigen::VectorXi perm(n);
  perm << 3, 0, 7, 1, 6, 2, 5, 4;
  Eigen::PermutationMatrix<Eigen::Dynamic> p(perm);
  const Eigen::MatrixXd permuted = p * lap * p.transpose();

  std::vector<AgentId> ids(n), pids(n);
  std::iota(ids.begin(), ids.end(), AgentId{100});
  for (int i = 0; i < n; ++i) pids[static_cast<std::size_t>(perm[i])] = ids[static_cast<std::size_t>(i)];
  const auto f1 = agent_features(dense_oracle(lap), ids);
  const auto f2 = agent_features(dense_oracle(permuted), pids);
  for (int i = 0; i < n; ++i) {
    CHECK((f1.rows.row(i) - f2.rows.row(perm[i])).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("mean over window") {
  FeatureMatrix a{Eigen::MatrixXd(2, 1), {1, 2}}, b{Eigen::MatrixXd(2, 1), {2, 3}};
  a.rows << 1, 2;
  b.rows << 4, 5;
  const auto m = mean_features({a, b});
  REQUIRE(m.size() == 3);
  CHECK(m.agent_ids == std::vector<AgentId>{1, 2, 3});
  CHECK(m.rows(0, 0) == 1);
  CHECK(m.rows(1, 0) == 3);
  CHECK(m.rows(2, 0) == 5);
  FeatureMatrix c{Eigen::MatrixXd(1, 2), {1}};
  CHECK_THROWS_AS(mean_features({a, c}), ArgumentError);
}

TEST_CASE("feature CSV round trip") {
  FeatureMatrix fm{Eigen::MatrixXd(2, 3), {4, 9}};
  fm.rows << 0.1, -2.5e-7, 3, 1.0 / 3.0, 0, -1;
  const auto text = format_feature_csv(fm);
  CHECK(text.rfind("agent_id,f1,f2,f3\n", 0) == 0);
  const auto back = parse_feature_csv(text);
  CHECK(back.agent_ids == fm.agent_ids);
  CHECK(back.rows == fm.rows);
  CHECK_THROWS_AS(parse_feature_csv("id,f1\n1,2\n"), ParseError);
  CHECK_THROWS_AS(parse_feature_csv("agent_id,f1\n1,2,3\n"), ParseError);
  CHECK_THROWS_AS(parse_feature_csv("agent_id,f1\n1,nan\n"), ParseError);
}

TEST_CASE("extract_features: one sample per agent per window") {
  ScenarioSpec spec;
  spec.n_agents = 12;
  spec.behavior_mix = uniform_mix();
  const auto sc = generate(spec);
  FeatureOptions fo;
  auto windows = extract_features(sc.trajectories, fo);
  REQUIRE(windows.size() == 1);
  CHECK(windows[0].features.size() == 12);
  CHECK(windows[0].features.dim() == 6);
  CHECK(windows[0].last_frame == 99);
  CHECK(windows[0].ranking.size() == 12);
  CHECK(windows[0].features.rows.allFinite());

  fo.T = 30;
  windows = extract_features(sc.trajectories, fo);
  REQUIRE(windows.size() == 4);
  CHECK(windows[0].last_frame == 29);
  CHECK(windows[3].last_frame == 99);
  CHECK(stack_windows(windows).size() == 48);

  fo.aggregation = Aggregation::kMeanOverWindow;
  const auto mean = extract_features(sc.trajectories, fo);
  CHECK(mean.size() == 4);
  CHECK(mean[0].features.rows != windows[0].features.rows);

  // Deterministic.
  CHECK(extract_features(sc.trajectories, fo)[2].features.rows == mean[2].features.rows);
}

TEST_CASE("extract_features pads graphs smaller than k") {
  TrajectorySet set;
  for (Frame f = 0; f < 3; ++f) {
    set.add(1, {f, 0.0, 0.0});
    set.add(2, {f, 1.0, 0.0});
    set.add(3, {f, 3.0, 0.0});
  }
  const auto w = extract_features(set, FeatureOptions{});
  REQUIRE(w.size() == 1);
  CHECK(w[0].features.dim() == 6);
  CHECK(w[0].features.rows.rightCols(3).isZero());
}
