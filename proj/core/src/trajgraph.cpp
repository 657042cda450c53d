#include "graphrqi/trajgraph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "file_util.hpp"
#include "graphrqi/errors.hpp"
#include "text_util.hpp"

namespace graphrqi {

std::set<Edge> knn_edges(const std::map<AgentId, Point>& positions, int k) {
  if (k < 1) throw ArgumentError("knn_edges: k must be >= 1");
  std::set<Edge> edges;
  const std::size_t n = positions.size();
  if (n < 2) return edges;
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), n - 1);

  std::vector<std::pair<AgentId, Point>> pts(positions.begin(), positions.end());
  std::vector<std::pair<double, AgentId>> cand;
  cand.reserve(n - 1);
  for (const auto& [id, p] : pts) {
    cand.clear();
    for (const auto& [other, q] : pts) {
      if (other == id) continue;
      const double dx = p.x - q.x;
      const double dy = p.y - q.y;
      // Squared distance keeps ties exact for lattice-like inputs.
      cand.emplace_back(dx * dx + dy * dy, other);
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end());
    for (std::size_t i = 0; i < take; ++i) edges.insert(Edge::make(id, cand[i].second));
  }
  return edges;
}

double edge_weight(EdgeWeighting weighting, const Point& a, const Point& b) {
  switch (weighting) {
    case EdgeWeighting::kUnweighted:
      return 1.0;
    case EdgeWeighting::kExponential:
      return std::exp(-std::hypot(a.x - b.x, a.y - b.y));
  }
  return 1.0;
}

DynamicLaplacian::DynamicLaplacian(GraphOptions options) : options_(options) {}

std::size_t DynamicLaplacian::index_of(AgentId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw StateError("agent " + std::to_string(id) + " not in graph");
  return it->second;
}

BorderEvent DynamicLaplacian::add_agent(AgentId id) {
  if (contains(id)) throw StateError("agent " + std::to_string(id) + " already in graph");
  const BorderEvent ev{id, agents_.size()};
  index_.emplace(id, agents_.size());
  agents_.push_back(id);
  degree_.push_back(0.0);
  adjacency_.emplace_back();
  log_.emplace_back(ev);
  return ev;
}

void DynamicLaplacian::insert_edge(std::size_t i, std::size_t j, double weight) {
  degree_[i] += weight;
  degree_[j] += weight;
  adjacency_[i].emplace_back(j, weight);
  adjacency_[j].emplace_back(i, weight);
}

bool DynamicLaplacian::add_edge(AgentId u, AgentId v, double weight) {
  if (u == v) throw StateError("self-loop on agent " + std::to_string(u));
  if (!(weight > 0.0) || !std::isfinite(weight)) throw ArgumentError("edge weight must be positive");
  const auto e = Edge::make(u, v);
  if (edges_.count(e)) return false;
  std::size_t i = index_of(e.a);
  std::size_t j = index_of(e.b);
  if (i > j) std::swap(i, j);
  edges_.insert(e);
  weights_.emplace(e, weight);
  insert_edge(i, j, weight);
  log_.emplace_back(EdgeAddEvent{i, j, weight});
  return true;
}

void DynamicLaplacian::record_positions(const std::map<AgentId, Point>& positions,
                                        const std::set<AgentId>& present, int k) {
  positions_ = positions;
  present_ = present;
  last_k_ = k;
}

Eigen::VectorXd DynamicLaplacian::apply(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != size()) throw ArgumentError("apply: dimension mismatch");
  Eigen::VectorXd y(x.size());
  for (std::size_t i = 0; i < size(); ++i) {
    double acc = degree_[i] * x[static_cast<Eigen::Index>(i)];
    for (const auto& [j, w] : adjacency_[i]) acc -= w * x[static_cast<Eigen::Index>(j)];
    y[static_cast<Eigen::Index>(i)] = acc;
  }
  return y;
}

double DynamicLaplacian::inf_norm() const {
  double m = 0.0;
  for (double d : degree_) m = std::max(m, 2.0 * d);
  return m;
}

Eigen::MatrixXd DynamicLaplacian::dense() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lap(i, i) = degree_[static_cast<std::size_t>(i)];
    for (const auto& [j, w] : adjacency_[static_cast<std::size_t>(i)]) {
      lap(i, static_cast<Eigen::Index>(j)) -= w;
    }
  }
  return lap;
}

Eigen::MatrixXd DynamicLaplacian::dense_base() const {
  const auto n = static_cast<Eigen::Index>(base_size_);
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : base_edges_) {
    const auto i = static_cast<Eigen::Index>(e.i);
    const auto j = static_cast<Eigen::Index>(e.j);
    lap(i, i) += e.weight;
    lap(j, j) += e.weight;
    lap(i, j) -= e.weight;
    lap(j, i) -= e.weight;
  }
  return lap;
}

void DynamicLaplacian::rebase_as_fresh(const std::vector<AgentId>& agents,
                                       const std::map<Edge, double>& edges,
                                       const std::map<AgentId, Point>& positions, int k) {
  agents_.clear();
  index_.clear();
  edges_.clear();
  weights_.clear();
  degree_.clear();
  adjacency_.clear();
  log_.clear();
  base_edges_.clear();

  for (AgentId id : agents) {
    index_.emplace(id, agents_.size());
    agents_.push_back(id);
    degree_.push_back(0.0);
    adjacency_.emplace_back();
  }
  for (const auto& [e, w] : edges) {
    std::size_t i = index_of(e.a);
    std::size_t j = index_of(e.b);
    if (i > j) std::swap(i, j);
    edges_.insert(e);
    weights_.emplace(e, w);
    insert_edge(i, j, w);
    base_edges_.push_back(EdgeAddEvent{i, j, w});
  }
  base_size_ = agents_.size();
  positions_ = positions;
  present_.clear();
  for (AgentId id : agents) present_.insert(id);
  last_k_ = k;
  steps_since_reset_ = 0;
  ++epoch_;
}

std::vector<UpdateEvent> step(DynamicLaplacian& state, const std::map<AgentId, Point>& positions,
                              int k, const std::set<AgentId>& present) {
  if (k < 1) throw ArgumentError("step: k must be >= 1");
  for (AgentId id : state.agents()) {
    if (!positions.count(id)) {
      throw StateError("agent " + std::to_string(id) + " missing from positions");
    }
  }
  for (AgentId id : present) {
    if (!positions.count(id)) {
      throw StateError("present agent " + std::to_string(id) + " has no position");
    }
  }

  const std::size_t log_before = state.update_log().size();
  for (const auto& [id, p] : positions) {
    if (!state.contains(id)) state.add_agent(id);
  }
  for (const auto& e : knn_edges(positions, k)) {
    const double w =
        edge_weight(state.options().weighting, positions.at(e.a), positions.at(e.b));
    state.add_edge(e.a, e.b, w);
  }

  std::set<AgentId> live = present;
  if (live.empty()) {
    for (const auto& [id, p] : positions) live.insert(id);
  }
  state.record_positions(positions, live, k);
  state.increment_step();
  const auto& log = state.update_log();
  return {log.begin() + static_cast<std::ptrdiff_t>(log_before), log.end()};
}

bool maybe_reset(DynamicLaplacian& state, int T) {
  if (T < 1) throw ArgumentError("maybe_reset: T must be >= 1");
  if (state.steps_since_reset() < T) return false;

  std::map<AgentId, Point> current;
  for (AgentId id : state.present()) current.emplace(id, state.last_positions().at(id));

  std::vector<AgentId> keep;
  for (AgentId id : state.agents()) {
    if (current.count(id)) keep.push_back(id);
  }
  std::map<Edge, double> edges;
  const int k = state.last_k();
  if (current.size() >= 2) {
    for (const auto& e : knn_edges(current, k)) {
      edges.emplace(e, edge_weight(state.options().weighting, current.at(e.a), current.at(e.b)));
    }
  }
  state.rebase_as_fresh(keep, edges, current, k);
  return true;
}

Eigen::MatrixXd laplacian_from_edges(const std::vector<AgentId>& agents,
                                     const std::set<Edge>& edges,
                                     const std::map<Edge, double>& weights) {
  std::map<AgentId, Eigen::Index> idx;
  for (std::size_t i = 0; i < agents.size(); ++i) idx.emplace(agents[i], static_cast<Eigen::Index>(i));
  const auto n = static_cast<Eigen::Index>(agents.size());
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : edges) {
    const auto wi = weights.find(e);
    const double w = wi == weights.end() ? 1.0 : wi->second;
    adj(idx.at(e.a), idx.at(e.b)) = w;
    adj(idx.at(e.b), idx.at(e.a)) = w;
  }
  Eigen::MatrixXd deg = adj.rowwise().sum().asDiagonal();
  return deg - adj;
}

Eigen::MatrixXd replay_log(const Eigen::MatrixXd& base, std::span<const UpdateEvent> log) {
  Eigen::MatrixXd lap = base;
  for (const auto& ev : log) {
    if (const auto* b = std::get_if<BorderEvent>(&ev)) {
      const auto n = lap.rows();
      if (static_cast<Eigen::Index>(b->index) != n) throw StateError("replay: border index out of order");
      lap.conservativeResize(n + 1, n + 1);
      lap.row(n).setZero();
      lap.col(n).setZero();
    } else {
      const auto& e = std::get<EdgeAddEvent>(ev);
      Eigen::VectorXd inc = Eigen::VectorXd::Zero(lap.rows());
      inc[static_cast<Eigen::Index>(e.i)] = 1.0;
      inc[static_cast<Eigen::Index>(e.j)] = -1.0;
      lap += e.weight * inc * inc.transpose();
    }
  }
  return lap;
}

std::string format_laplacian(const Eigen::MatrixXd& lap) {
  std::string out = std::to_string(lap.rows()) + "\n";
  for (Eigen::Index i = 0; i < lap.rows(); ++i) {
    for (Eigen::Index j = 0; j < lap.cols(); ++j) {
      if (j) out += ' ';
      out += detail::format_double(lap(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_laplacian(const Eigen::MatrixXd& lap, const std::filesystem::path& path) {
  detail::write_file(path, format_laplacian(lap));
}

Eigen::MatrixXd parse_laplacian(std::string_view text) {
  std::vector<std::vector<double>> rows;
  long n = -1;
  detail::for_each_line(text, [&](std::string_view raw, std::size_t line) {
    const auto row = detail::trim(raw);
    if (row.empty()) return;
    const auto fields = detail::split_ws(row);
    if (n < 0) {
      const auto v = detail::parse_number<long>(row);
      if (!v || *v < 0) throw ParseError("expected dimension on first line", line);
      n = *v;
      return;
    }
    if (static_cast<long>(fields.size()) != n) throw ParseError("row has wrong length", line);
    std::vector<double> r;
    for (const auto f : fields) {
      const auto v = detail::parse_number<double>(f);
      if (!v) throw ParseError("cannot parse value '" + std::string(f) + "'", line);
      r.push_back(*v);
    }
    rows.push_back(std::move(r));
  });
  if (n < 0) throw ParseError("empty Laplacian dump", 0);
  if (static_cast<long>(rows.size()) != n) throw ParseError("expected " + std::to_string(n) + " rows", 0);
  Eigen::MatrixXd lap(n, n);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) lap(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return lap;
}

}  // namespace graphrqi
