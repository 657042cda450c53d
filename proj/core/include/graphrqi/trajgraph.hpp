#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "graphrqi/trajectory.hpp"

namespace graphrqi {

/// Unordered agent pair, stored with `a < b`.
struct Edge {
  AgentId a = 0;
  AgentId b = 0;

  static Edge make(AgentId u, AgentId v) { return u < v ? Edge{u, v} : Edge{v, u}; }
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Symmetrized k-nearest-neighbour edges. Each agent selects its
/// min(k, n-1) nearest agents by Euclidean distance, ties broken by ascending
/// id; an edge exists if either endpoint selected the other. Fewer than two
/// agents yields no edges.
std::set<Edge> knn_edges(const std::map<AgentId, Point>& positions, int k);

enum class EdgeWeighting {
  kUnweighted,   // A(i,j) = 1
  kExponential,  // A(i,j) = exp(-distance)
};

/// A new agent took the next row/column of the Laplacian.
struct BorderEvent {
  AgentId agent = 0;
  std::size_t index = 0;
};

/// lap += s * b * b^T where b = +1 at `i`, -1 at `j` (i < j) and
/// s = `weight`. In unweighted mode weight is 1.
struct EdgeAddEvent {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 1.0;
};

using UpdateEvent = std::variant<BorderEvent, EdgeAddEvent>;

struct GraphOptions {
  EdgeWeighting weighting = EdgeWeighting::kUnweighted;
};

/// Growing graph Laplacian L = D - A over agents in arrival order. New agents
/// are bordered with an empty row/column; every new edge is one signed
/// rank-1 incidence update. Edges are never removed between resets.
class DynamicLaplacian {
 public:
  explicit DynamicLaplacian(GraphOptions options = {});

  std::size_t size() const noexcept { return agents_.size(); }
  const GraphOptions& options() const noexcept { return options_; }
  const std::vector<AgentId>& agents() const noexcept { return agents_; }
  bool contains(AgentId id) const { return index_.count(id) != 0; }
  std::size_t index_of(AgentId id) const;

  const std::set<Edge>& edges() const noexcept { return edges_; }
  const std::map<Edge, double>& edge_weights() const noexcept { return weights_; }
  const std::vector<UpdateEvent>& update_log() const noexcept { return log_; }
  int steps_since_reset() const noexcept { return steps_since_reset_; }
  /// Incremented by every reset; consumers caching factorizations key on it.
  std::uint64_t epoch() const noexcept { return epoch_; }

  /// Size and edges of the Laplacian the update log starts from.
  std::size_t base_size() const noexcept { return base_size_; }
  const std::vector<EdgeAddEvent>& base_edges() const noexcept { return base_edges_; }

  /// Appends an agent (Border event). Throws StateError if already present.
  BorderEvent add_agent(AgentId id);
  /// Adds an edge between two present agents. Returns false, logging
  /// nothing, if the edge already exists.
  bool add_edge(AgentId u, AgentId v, double weight = 1.0);

  /// Remembers the latest positions, the observed subset and the kNN k, so
  /// a later reset can rebuild from them.
  void record_positions(const std::map<AgentId, Point>& positions,
                        const std::set<AgentId>& present, int k);
  const std::map<AgentId, Point>& last_positions() const noexcept { return positions_; }
  const std::set<AgentId>& present() const noexcept { return present_; }
  int last_k() const noexcept { return last_k_; }

  double diagonal(std::size_t i) const { return degree_[i]; }
  /// (neighbour index, edge weight) pairs of row `i`.
  const std::vector<std::pair<std::size_t, double>>& neighbors(std::size_t i) const {
    return adjacency_[i];
  }

  /// y = L x without materializing L.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  /// Infinity norm of L, i.e. twice the maximum weighted degree.
  double inf_norm() const;

  Eigen::MatrixXd dense() const;
  Eigen::MatrixXd dense_base() const;

  /// Clears everything and makes the current graph the new base: the log is
  /// emptied, the step counter reset, the epoch bumped.
  void rebase_as_fresh(const std::vector<AgentId>& agents, const std::map<Edge, double>& edges,
                       const std::map<AgentId, Point>& positions, int k);

  void increment_step() noexcept { ++steps_since_reset_; }

 private:
  void insert_edge(std::size_t i, std::size_t j, double weight);

  GraphOptions options_;
  std::vector<AgentId> agents_;
  std::map<AgentId, std::size_t> index_;
  std::set<Edge> edges_;
  std::map<Edge, double> weights_;
  std::vector<double> degree_;
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_;
  std::vector<UpdateEvent> log_;
  std::size_t base_size_ = 0;
  std::vector<EdgeAddEvent> base_edges_;
  std::map<AgentId, Point> positions_;
  std::set<AgentId> present_;
  int steps_since_reset_ = 0;
  int last_k_ = 4;
  std::uint64_t epoch_ = 0;
};

/// Edge weight used for an edge between two points under `weighting`.
double edge_weight(EdgeWeighting weighting, const Point& a, const Point& b);

/// Advances the graph by one time-step. `positions` must contain every agent
/// already in the graph (StateError otherwise); unseen ids are appended in
/// ascending id order. New kNN edges are added in ascending (a, b) order.
/// `present` marks which agents are actually observed at this step (those a
/// reset keeps); when empty every supplied agent counts as present.
std::vector<UpdateEvent> step(DynamicLaplacian& state, const std::map<AgentId, Point>& positions,
                              int k, const std::set<AgentId>& present = {});

/// Rebuilds the state from the present agents and their current kNN edges
/// once `steps_since_reset() >= T`. Returns true if a reset happened.
bool maybe_reset(DynamicLaplacian& state, int T);

/// Reference construction of D - A over the given agent order.
Eigen::MatrixXd laplacian_from_edges(const std::vector<AgentId>& agents,
                                     const std::set<Edge>& edges,
                                     const std::map<Edge, double>& weights = {});

/// Applies `log` on top of `base` (which must be the Laplacian the log starts
/// from) and returns the result.
Eigen::MatrixXd replay_log(const Eigen::MatrixXd& base, std::span<const UpdateEvent> log);

/// Plain text: first line n, then n rows of n space-separated values.
std::string format_laplacian(const Eigen::MatrixXd& lap);
void write_laplacian(const Eigen::MatrixXd& lap, const std::filesystem::path& path);
Eigen::MatrixXd parse_laplacian(std::string_view text);

}  // namespace graphrqi
