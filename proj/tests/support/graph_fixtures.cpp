#include "graph_fixtures.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace graphrqi::testing {

Eigen::MatrixXd k2() {
  Eigen::MatrixXd l(2, 2);
  l << 1, -1, -1, 1;
  return l;
}

Eigen::MatrixXd path3() {
  Eigen::MatrixXd l(3, 3);
  l << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  return l;
}

Eigen::MatrixXd star(int leaves) {
  const int n = leaves + 1;
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    l(0, 0) += 1;
    l(i, i) += 1;
    l(0, i) = l(i, 0) = -1;
  }
  return l;
}

Eigen::MatrixXd ring(int n) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    l(i, i) += 1;
    l(j, j) += 1;
    l(i, j) -= 1;
    l(j, i) -= 1;
  }
  return l;
}

Eigen::MatrixXd random_laplacian(int n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!coin(rng)) continue;
      l(i, i) += 1;
      l(j, j) += 1;
      l(i, j) = l(j, i) = -1;
    }
  }
  return l;
}

std::vector<GrowthFrame> growing_sequence(int n_start, int n_end, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(0.0, 100.0);
  std::normal_distribution<double> jitter(0.0, 1.5);
  std::uniform_int_distribution<int> arrivals(1, 2);

  std::vector<GrowthFrame> frames;
  std::map<AgentId, Point> pos;
  AgentId next = 1;
  for (int i = 0; i < n_start; ++i) pos[next++] = Point{box(rng), box(rng)};
  frames.push_back({pos});
  while (static_cast<int>(pos.size()) < n_end) {
    for (auto& [id, p] : pos) {
      p.x += jitter(rng);
      p.y += jitter(rng);
    }
    const int add = std::min(arrivals(rng), n_end - static_cast<int>(pos.size()));
    for (int a = 0; a < add; ++a) pos[next++] = Point{box(rng), box(rng)};
    frames.push_back({pos});
  }
  return frames;
}

Eigen::VectorXd reference_eigenvalues(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.transpose() * b);
  const double smin = std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
  return std::acos(smin);
}

}  // namespace graphrqi::testing
