#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "graphrqi/solver_config.hpp"
#include "graphrqi/spectrum.hpp"
#include "graphrqi/trajectory.hpp"
#include "graphrqi/trajgraph.hpp"

namespace graphrqi {

/// Row i is the feature vector of agent_ids[i].
struct FeatureMatrix {
  Eigen::MatrixXd rows;
  std::vector<AgentId> agent_ids;

  Eigen::Index size() const noexcept { return rows.rows(); }
  Eigen::Index dim() const noexcept { return rows.cols(); }
};

/// w = L u, one entry per agent.
struct TopologyVector {
  Eigen::VectorXd w;
  int source_eigindex = 0;
};

TopologyVector topology_vector(const Eigen::MatrixXd& lap, const Eigen::VectorXd& u,
                               int source_eigindex = 0);
TopologyVector topology_vector(const DynamicLaplacian& state, const Eigen::VectorXd& u,
                               int source_eigindex = 0);

/// Entry j is sum over neighbours k of w_jk (u(j) - u(k)), summed edge by
/// edge. Equal to L u; kept separate as an independent check.
Eigen::VectorXd neighbor_differences(const DynamicLaplacian& state, const Eigen::VectorXd& u);

/// topology_vector for the eigenvector with the largest eigenvalue in spec.
TopologyVector aggressiveness_gradient(const Eigen::MatrixXd& lap, const Spectrum& spec);
TopologyVector aggressiveness_gradient(const DynamicLaplacian& state, const Spectrum& spec);

struct RankedAgent {
  AgentId agent = 0;
  double w = 0.0;
};

/// Agents sorted by |w| descending; entries equal to 12 significant digits
/// go by ascending id.
std::vector<RankedAgent> rank_by_magnitude(const TopologyVector& tv,
                                           const std::vector<AgentId>& agent_ids);

/// Rows of the spectrum's eigenvector matrix, aligned to `agent_ids`.
FeatureMatrix agent_features(const Spectrum& spec, const std::vector<AgentId>& agent_ids);

/// Per-agent mean of the rows over every step the agent appears in. Agents
/// are ordered by first appearance. All steps must share one dimension.
FeatureMatrix mean_features(const std::vector<FeatureMatrix>& steps);

enum class Aggregation { kFinalStep, kMeanOverWindow };

struct FeatureOptions {
  int knn_k = 4;
  int T = 100;
  GraphOptions graph;
  SolverConfig solver;  // solver.k eigenpairs per step
  Aggregation aggregation = Aggregation::kFinalStep;
};

/// Features of one reset window.
struct WindowFeatures {
  int window = 0;
  Frame last_frame = 0;
  /// solver.k columns; graphs with fewer agents than that are zero-padded.
  FeatureMatrix features;
  /// Gradient at the window's last step, ranked.
  std::vector<RankedAgent> ranking;
};

/// Plays the trajectories frame by frame through the dynamic graph and the
/// incremental solver, one sample per agent per reset window.
std::vector<WindowFeatures> extract_features(const TrajectorySet& set, const FeatureOptions& options);

/// Stacks the windows' rows into one matrix (agent ids may repeat).
FeatureMatrix stack_windows(const std::vector<WindowFeatures>& windows);

/// Header `agent_id,f1..fk`, one row per agent.
std::string format_feature_csv(const FeatureMatrix& fm);
void write_feature_csv(const FeatureMatrix& fm, const std::filesystem::path& path);
FeatureMatrix parse_feature_csv(std::string_view text);

}  // namespace graphrqi
