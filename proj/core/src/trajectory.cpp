#include "graphrqi/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>

#include "file_util.hpp"
#include "graphrqi/errors.hpp"
#include "text_util.hpp"

namespace graphrqi {

void TrajectorySet::add(AgentId agent, Observation obs) {
  if (!std::isfinite(obs.x) || !std::isfinite(obs.y)) {
    throw ArgumentError("non-finite coordinate for agent " + std::to_string(agent));
  }
  auto& track = tracks_[agent];
  const auto it = std::lower_bound(track.begin(), track.end(), obs.frame,
                                   [](const Observation& o, Frame f) { return o.frame < f; });
  if (it != track.end() && it->frame == obs.frame) {
    throw DuplicateError("duplicate observation for agent " + std::to_string(agent) +
                         " at frame " + std::to_string(obs.frame));
  }
  track.insert(it, obs);
}

const TrajectorySet::Track& TrajectorySet::track(AgentId agent) const {
  const auto it = tracks_.find(agent);
  if (it == tracks_.end()) throw ArgumentError("unknown agent " + std::to_string(agent));
  return it->second;
}

Frame TrajectorySet::first_frame() const {
  if (tracks_.empty()) throw ArgumentError("empty trajectory set");
  Frame f = std::numeric_limits<Frame>::max();
  for (const auto& [id, track] : tracks_) f = std::min(f, track.front().frame);
  return f;
}

Frame TrajectorySet::last_frame() const {
  if (tracks_.empty()) throw ArgumentError("empty trajectory set");
  Frame f = std::numeric_limits<Frame>::min();
  for (const auto& [id, track] : tracks_) f = std::max(f, track.back().frame);
  return f;
}

std::map<AgentId, Point> TrajectorySet::positions_at(Frame frame) const {
  std::map<AgentId, Point> out;
  for (const auto& [id, track] : tracks_) {
    const auto it = std::upper_bound(track.begin(), track.end(), frame,
                                     [](Frame f, const Observation& o) { return f < o.frame; });
    if (it == track.begin()) continue;
    const auto& obs = *std::prev(it);
    out.emplace(id, Point{obs.x, obs.y});
  }
  return out;
}

std::vector<AgentId> TrajectorySet::present_at(Frame frame) const {
  std::vector<AgentId> out;
  for (const auto& [id, track] : tracks_) {
    const bool hit = std::binary_search(
        track.begin(), track.end(), Observation{frame, 0, 0},
        [](const Observation& a, const Observation& b) { return a.frame < b.frame; });
    if (hit) out.push_back(id);
  }
  return out;
}

std::optional<TrajectoryFormat> parse_trajectory_format(std::string_view name) {
  if (name == "traf-csv" || name == "traf") return TrajectoryFormat::kTrafCsv;
  if (name == "argoverse-csv" || name == "argoverse") return TrajectoryFormat::kArgoverseCsv;
  return std::nullopt;
}

namespace {

double parse_coordinate(std::string_view field, const char* name, std::size_t line) {
  const auto v = detail::parse_number<double>(field);
  if (!v) throw ParseError(std::string("cannot parse ") + name + " '" + std::string(field) + "'", line);
  if (!std::isfinite(*v)) {
    throw ParseError(std::string("non-finite ") + name + " '" + std::string(field) + "'", line);
  }
  return *v;
}

void add_or_throw(TrajectorySet& set, AgentId agent, Observation obs, std::size_t line) {
  try {
    set.add(agent, obs);
  } catch (const DuplicateError& e) {
    throw DuplicateError("line " + std::to_string(line) + ": " + e.what());
  }
}

}  // namespace

TrajectorySet parse_traf_csv(std::string_view text) {
  TrajectorySet set;
  bool first_content = true;
  detail::for_each_line(text, [&](std::string_view raw, std::size_t line) {
    const auto row = detail::trim(raw);
    if (row.empty()) return;
    const auto fields = detail::split(row, ',');
    if (first_content) {
      first_content = false;
      if (!fields.empty() && fields[0] == "frame") {
        if (fields.size() != 4 || fields[1] != "agent_id" || fields[2] != "x" || fields[3] != "y") {
          throw ParseError("expected header 'frame,agent_id,x,y'", line);
        }
        return;
      }
    }
    if (fields.size() != 4) {
      throw ParseError("expected 4 fields, got " + std::to_string(fields.size()), line);
    }
    const auto frame = detail::parse_number<Frame>(fields[0]);
    if (!frame) throw ParseError("cannot parse frame '" + std::string(fields[0]) + "'", line);
    const auto agent = detail::parse_number<AgentId>(fields[1]);
    if (!agent) throw ParseError("cannot parse agent_id '" + std::string(fields[1]) + "'", line);
    const double x = parse_coordinate(fields[2], "x", line);
    const double y = parse_coordinate(fields[3], "y", line);
    add_or_throw(set, *agent, Observation{*frame, x, y}, line);
  });
  return set;
}

TrajectorySet parse_argoverse_csv(std::string_view text, const ArgoverseOptions& options) {
  if (!(options.frame_rate_hz > 0.0)) throw ArgumentError("frame rate must be positive");

  struct Row {
    double t;
    std::string track;
    double x, y;
    std::size_t line;
  };
  std::vector<Row> rows;
  int col_t = -1, col_id = -1, col_x = -1, col_y = -1;
  std::size_t width = 0;
  bool have_header = false;

  detail::for_each_line(text, [&](std::string_view raw, std::size_t line) {
    const auto row = detail::trim(raw);
    if (row.empty()) return;
    const auto fields = detail::split(row, ',');
    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "TIMESTAMP") col_t = static_cast<int>(i);
        if (fields[i] == "TRACK_ID") col_id = static_cast<int>(i);
        if (fields[i] == "X") col_x = static_cast<int>(i);
        if (fields[i] == "Y") col_y = static_cast<int>(i);
      }
      if (col_t < 0 || col_id < 0 || col_x < 0 || col_y < 0) {
        throw ParseError("header must contain TIMESTAMP, TRACK_ID, X, Y", line);
      }
      width = fields.size();
      have_header = true;
      return;
    }
    if (fields.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, got " +
                           std::to_string(fields.size()),
                       line);
    }
    rows.push_back(Row{parse_coordinate(fields[col_t], "TIMESTAMP", line),
                       std::string(fields[col_id]), parse_coordinate(fields[col_x], "X", line),
                       parse_coordinate(fields[col_y], "Y", line), line});
  });

  TrajectorySet set;
  if (rows.empty()) return set;

  double t0 = rows.front().t;
  for (const auto& r : rows) t0 = std::min(t0, r.t);

  std::unordered_map<std::string, AgentId> ids;
  AgentId next_id = 0;
  bool all_numeric = true;
  for (const auto& r : rows) {
    if (!detail::parse_number<AgentId>(r.track)) {
      all_numeric = false;
      break;
    }
  }
  for (const auto& r : rows) {
    AgentId id;
    if (all_numeric) {
      id = *detail::parse_number<AgentId>(r.track);
    } else {
      const auto [it, inserted] = ids.try_emplace(r.track, next_id);
      if (inserted) ++next_id;
      id = it->second;
    }
    const auto frame = static_cast<Frame>(std::llround((r.t - t0) * options.frame_rate_hz));
    add_or_throw(set, id, Observation{frame, r.x, r.y}, r.line);
  }
  return set;
}

TrajectorySet load_trajectories(const std::filesystem::path& path, TrajectoryFormat format,
                                const ArgoverseOptions& options) {
  const auto text = detail::read_file(path);
  switch (format) {
    case TrajectoryFormat::kTrafCsv:
      return parse_traf_csv(text);
    case TrajectoryFormat::kArgoverseCsv:
      return parse_argoverse_csv(text, options);
  }
  throw ArgumentError("unknown trajectory format");
}

std::string format_traf_csv(const TrajectorySet& set) {
  struct Row {
    Frame frame;
    AgentId agent;
    double x, y;
  };
  std::vector<Row> rows;
  for (const auto& [id, track] : set.tracks()) {
    for (const auto& o : track) rows.push_back({o.frame, id, o.x, o.y});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.agent < b.agent;
  });
  std::string out = "frame,agent_id,x,y\n";
  for (const auto& r : rows) {
    out += std::to_string(r.frame);
    out += ',';
    out += std::to_string(r.agent);
    out += ',';
    out += detail::format_double(r.x);
    out += ',';
    out += detail::format_double(r.y);
    out += '\n';
  }
  return out;
}

void write_traf_csv(const TrajectorySet& set, const std::filesystem::path& path) {
  detail::write_file(path, format_traf_csv(set));
}

}  // namespace graphrqi
