#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

namespace graphrqi {

using AgentId = std::int64_t;
using Frame = std::int64_t;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Observation {
  Frame frame = 0;
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Per-agent timestamped 2D tracks. Frames within a track strictly increase
/// and every coordinate is finite; `add` enforces both.
class TrajectorySet {
 public:
  using Track = std::vector<Observation>;

  /// Inserts an observation, keeping the track sorted by frame.
  /// Throws DuplicateError if the agent already has this frame and
  /// ArgumentError on non-finite coordinates.
  void add(AgentId agent, Observation obs);

  bool empty() const noexcept { return tracks_.empty(); }
  std::size_t agent_count() const noexcept { return tracks_.size(); }
  const std::map<AgentId, Track>& tracks() const noexcept { return tracks_; }
  const Track& track(AgentId agent) const;

  Frame first_frame() const;
  Frame last_frame() const;

  /// Latest known position of every agent whose first observation is at or
  /// before `frame` (agents that have left keep their last position).
  std::map<AgentId, Point> positions_at(Frame frame) const;

  /// Agents with an observation exactly at `frame`.
  std::vector<AgentId> present_at(Frame frame) const;

  friend bool operator==(const TrajectorySet&, const TrajectorySet&) = default;

 private:
  std::map<AgentId, Track> tracks_;
};

enum class TrajectoryFormat { kTrafCsv, kArgoverseCsv };

std::optional<TrajectoryFormat> parse_trajectory_format(std::string_view name);

struct ArgoverseOptions {
  double frame_rate_hz = 10.0;
};

/// Reads `frame,agent_id,x,y` rows. A header line is optional.
TrajectorySet parse_traf_csv(std::string_view text);

/// Reads an Argoverse-style CSV located by the TIMESTAMP, TRACK_ID, X and Y
/// header columns. Timestamps are bucketed to integer frames relative to the
/// earliest timestamp; non-numeric track ids are numbered by first appearance.
TrajectorySet parse_argoverse_csv(std::string_view text, const ArgoverseOptions& options = {});

TrajectorySet load_trajectories(const std::filesystem::path& path, TrajectoryFormat format = TrajectoryFormat::kTrafCsv,
                                const ArgoverseOptions& options = {});

/// Writes traf-csv with a header, rows ordered by (frame, agent).
void write_traf_csv(const TrajectorySet& set, const std::filesystem::path& path);
std::string format_traf_csv(const TrajectorySet& set);

}  // namespace graphrqi
