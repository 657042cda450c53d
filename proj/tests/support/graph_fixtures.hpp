#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Core>

#include "graphrqi/trajgraph.hpp"

namespace graphrqi::testing {

Eigen::MatrixXd k2();
Eigen::MatrixXd path3();
/// Star with centre at index 0 and `leaves` leaves.
Eigen::MatrixXd star(int leaves);
Eigen::MatrixXd ring(int n);

/// Laplacian of an Erdos-Renyi graph with edge probability p.
Eigen::MatrixXd random_laplacian(int n, double p, std::mt19937_64& rng);

/// One time-step of a randomly growing traffic-like point cloud.
struct GrowthFrame {
  std::map<AgentId, Point> positions;
};

/// Agents random-walk in a box; new agents arrive until `n_end` agents exist.
/// Frame 0 has `n_start` agents.
std::vector<GrowthFrame> growing_sequence(int n_start, int n_end, std::uint64_t seed);

/// Sorted eigenvalues from a plain symmetric solver (test cross-check only).
Eigen::VectorXd reference_eigenvalues(const Eigen::MatrixXd& a);

/// Largest principal angle between the column spans of two orthonormal
/// matrices with the same number of columns.
double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace graphrqi::testing
