#include "graphrqi/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>

#include "file_util.hpp"
#include "graphrqi/errors.hpp"
#include "graphrqi/spectral.hpp"
#include "text_util.hpp"

namespace graphrqi {

TopologyVector topology_vector(const Eigen::MatrixXd& lap, const Eigen::VectorXd& u,
                               int source_eigindex) {
  if (lap.rows() != lap.cols() || lap.rows() != u.size()) {
    throw ArgumentError("topology_vector: dimension mismatch");
  }
  return {lap * u, source_eigindex};
}

TopologyVector topology_vector(const DynamicLaplacian& state, const Eigen::VectorXd& u,
                               int source_eigindex) {
  if (static_cast<Eigen::Index>(state.size()) != u.size()) {
    throw ArgumentError("topology_vector: dimension mismatch");
  }
  return {state.apply(u), source_eigindex};
}

Eigen::VectorXd neighbor_differences(const DynamicLaplacian& state, const Eigen::VectorXd& u) {
  if (static_cast<Eigen::Index>(state.size()) != u.size()) {
    throw ArgumentError("neighbor_differences: dimension mismatch");
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(u.size());
  for (std::size_t j = 0; j < state.size(); ++j) {
    for (const auto& [k, wt] : state.neighbors(j)) {
      w[static_cast<Eigen::Index>(j)] += wt * (u[static_cast<Eigen::Index>(j)] - u[static_cast<Eigen::Index>(k)]);
    }
  }
  return w;
}

namespace {

Eigen::Index top_column(const Spectrum& spec) {
  if (spec.empty()) throw ArgumentError("aggressiveness_gradient: empty spectrum");
  Eigen::Index best = 0;
  spec.values.maxCoeff(&best);
  return best;
}

}  // namespace

TopologyVector aggressiveness_gradient(const Eigen::MatrixXd& lap, const Spectrum& spec) {
  const Eigen::Index j = top_column(spec);
  return topology_vector(lap, spec.vectors.col(j), static_cast<int>(j));
}

TopologyVector aggressiveness_gradient(const DynamicLaplacian& state, const Spectrum& spec) {
  const Eigen::Index j = top_column(spec);
  return topology_vector(state, spec.vectors.col(j), static_cast<int>(j));
}

std::vector<RankedAgent> rank_by_magnitude(const TopologyVector& tv,
                                           const std::vector<AgentId>& agent_ids) {
  if (static_cast<Eigen::Index>(agent_ids.size()) != tv.w.size()) {
    throw ArgumentError("rank_by_magnitude: id count does not match w");
  }
  // Sort on |w| rounded to 12 significant digits so entries equal up to
  // rounding fall back to id order.
  std::vector<std::pair<double, RankedAgent>> keyed;
  keyed.reserve(agent_ids.size());
  char buf[32];
  for (std::size_t i = 0; i < agent_ids.size(); ++i) {
    const double w = tv.w[static_cast<Eigen::Index>(i)];
    std::snprintf(buf, sizeof buf, "%.12g", std::abs(w));
    keyed.push_back({std::strtod(buf, nullptr), RankedAgent{agent_ids[i], w}});
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second.agent < b.second.agent;
  });
  std::vector<RankedAgent> out;
  out.reserve(keyed.size());
  for (const auto& kv : keyed) out.push_back(kv.second);
  return out;
}

FeatureMatrix agent_features(const Spectrum& spec, const std::vector<AgentId>& agent_ids) {
  if (static_cast<Eigen::Index>(agent_ids.size()) != spec.n()) {
    throw ArgumentError("agent_features: id count does not match spectrum rows");
  }
  return {spec.vectors, agent_ids};
}

FeatureMatrix mean_features(const std::vector<FeatureMatrix>& steps) {
  if (steps.empty()) return {};
  const Eigen::Index dim = steps.front().dim();
  std::vector<AgentId> order;
  std::map<AgentId, std::pair<Eigen::VectorXd, int>> acc;
  for (const auto& s : steps) {
    if (s.dim() != dim) throw ArgumentError("mean_features: dimension changes between steps");
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const AgentId id = s.agent_ids[static_cast<std::size_t>(i)];
      auto [it, fresh] = acc.try_emplace(id, Eigen::VectorXd::Zero(dim), 0);
      if (fresh) order.push_back(id);
      it->second.first += s.rows.row(i).transpose();
      ++it->second.second;
    }
  }
  FeatureMatrix out{Eigen::MatrixXd(static_cast<Eigen::Index>(order.size()), dim), order};
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& [sum, count] = acc.at(order[i]);
    out.rows.row(static_cast<Eigen::Index>(i)) = sum.transpose() / count;
  }
  return out;
}

namespace {

FeatureMatrix padded(const Spectrum& spec, const std::vector<AgentId>& ids, int k) {
  FeatureMatrix fm{Eigen::MatrixXd::Zero(spec.n(), k), ids};
  fm.rows.leftCols(spec.k()) = spec.vectors;
  return fm;
}

}  // namespace

std::vector<WindowFeatures> extract_features(const TrajectorySet& set, const FeatureOptions& options) {
  if (options.knn_k < 1) throw ArgumentError("kNN k must be at least 1");
  if (options.T < 1) throw ArgumentError("T must be at least 1");
  validate(options.solver);
  std::vector<WindowFeatures> out;
  if (set.empty()) return out;

  const int k = options.solver.k;
  DynamicLaplacian state(options.graph);
  IncrementalEigensolver solver(options.solver);
  std::vector<FeatureMatrix> window_steps;
  FeatureMatrix last;
  std::vector<RankedAgent> last_ranking;
  Frame last_frame = 0;

  auto close_window = [&]() {
    if (window_steps.empty()) return;
    WindowFeatures wf;
    wf.window = static_cast<int>(out.size());
    wf.last_frame = last_frame;
    wf.features = options.aggregation == Aggregation::kFinalStep ? last : mean_features(window_steps);
    wf.ranking = std::move(last_ranking);
    out.push_back(std::move(wf));
    window_steps.clear();
  };

  for (Frame f = set.first_frame(); f <= set.last_frame(); ++f) {
    const auto present_list = set.present_at(f);
    const std::set<AgentId> present(present_list.begin(), present_list.end());
    std::map<AgentId, Point> positions;
    // Agents that left stay at their last position until the next reset.
    for (const auto& [id, p] : set.positions_at(f)) {
      if (present.count(id) || state.contains(id)) positions.emplace(id, p);
    }
    if (positions.empty()) continue;
    step(state, positions, options.knn_k, present);

    const int kk = std::min<int>(k, static_cast<int>(state.size()));
    const Spectrum spec = solver.update(state, kk);
    last = padded(spec, state.agents(), k);
    last_ranking = rank_by_magnitude(aggressiveness_gradient(state, spec), state.agents());
    last_frame = f;
    if (options.aggregation == Aggregation::kMeanOverWindow) window_steps.push_back(last);
    else window_steps.assign(1, last);

    if (maybe_reset(state, options.T)) close_window();
  }
  close_window();
  return out;
}

FeatureMatrix stack_windows(const std::vector<WindowFeatures>& windows) {
  FeatureMatrix out;
  Eigen::Index rows = 0, dim = 0;
  for (const auto& w : windows) {
    if (rows && w.features.dim() != dim) throw ArgumentError("stack_windows: dimension mismatch");
    dim = w.features.dim();
    rows += w.features.size();
  }
  out.rows.resize(rows, dim);
  Eigen::Index at = 0;
  for (const auto& w : windows) {
    out.rows.middleRows(at, w.features.size()) = w.features.rows;
    out.agent_ids.insert(out.agent_ids.end(), w.features.agent_ids.begin(), w.features.agent_ids.end());
    at += w.features.size();
  }
  return out;
}

std::string format_feature_csv(const FeatureMatrix& fm) {
  std::string out = "agent_id";
  for (Eigen::Index j = 0; j < fm.dim(); ++j) out += ",f" + std::to_string(j + 1);
  out += '\n';
  for (Eigen::Index i = 0; i < fm.size(); ++i) {
    out += std::to_string(fm.agent_ids[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < fm.dim(); ++j) out += ',' + detail::format_sig17(fm.rows(i, j));
    out += '\n';
  }
  return out;
}

void write_feature_csv(const FeatureMatrix& fm, const std::filesystem::path& path) {
  detail::write_file(path, format_feature_csv(fm));
}

FeatureMatrix parse_feature_csv(std::string_view text) {
  std::vector<AgentId> ids;
  std::vector<std::vector<double>> rows;
  std::size_t dim = 0;
  bool header = false;
  detail::for_each_line(text, [&](std::string_view raw, std::size_t line) {
    const auto row = detail::trim(raw);
    if (row.empty()) return;
    const auto fields = detail::split(row, ',');
    if (!header) {
      if (fields.empty() || fields[0] != "agent_id") throw ParseError("expected header 'agent_id,f1..fk'", line);
      for (std::size_t j = 1; j < fields.size(); ++j) {
        if (fields[j] != "f" + std::to_string(j)) throw ParseError("bad feature column name", line);
      }
      dim = fields.size() - 1;
      header = true;
      return;
    }
    if (fields.size() != dim + 1) throw ParseError("expected " + std::to_string(dim + 1) + " fields", line);
    const auto id = detail::parse_number<AgentId>(fields[0]);
    if (!id) throw ParseError("cannot parse agent_id '" + std::string(fields[0]) + "'", line);
    std::vector<double> vals;
    for (std::size_t j = 1; j < fields.size(); ++j) {
      const auto v = detail::parse_number<double>(fields[j]);
      if (!v || !std::isfinite(*v)) throw ParseError("bad feature value '" + std::string(fields[j]) + "'", line);
      vals.push_back(*v);
    }
    ids.push_back(*id);
    rows.push_back(std::move(vals));
  });
  if (!header) throw ParseError("empty feature file", 0);
  FeatureMatrix fm{Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim)), ids};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) fm.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return fm;
}

}  // namespace graphrqi
