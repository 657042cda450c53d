#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "graphrqi/classifier.hpp"
#include "graphrqi/trajectory.hpp"

namespace graphrqi {

/// Archetype constants. Speeds are multiples of ScenarioSpec::base_speed.
struct Kinematics {
  double impatient_speed = 1.5;
  double timid_speed = 0.6;
  /// Minimum headway of a cut-in, as a fraction of the standard headway.
  double cut_in_headway = 0.5;
  double standard_headway_s = 2.0;
  double threatening_speed = 1.2;
  double reckless_speed = 1.4;
  /// Frames between lane changes of a weaving agent.
  int weave_period = 20;
  /// Frames a lane change takes.
  int lane_change_frames = 8;
  /// Frames driving against the lane direction, and between such intervals.
  int reverse_frames = 20;
  int forward_frames = 25;
  double crossing_spacing_m = 40.0;
  /// A cautious agent stops this far before a crossing and waits.
  double halt_distance_m = 6.0;
  int halt_frames = 15;
  /// Timid slowdowns: speed factor and duration, every `timid_period` frames.
  double timid_slow_factor = 0.4;
  int timid_slow_frames = 10;
  int timid_period = 30;
};

struct ScenarioSpec {
  int n_agents = 12;
  int duration = 100;  // frames
  double frame_rate_hz = 10.0;
  int lanes = 3;
  double lane_width_m = 3.5;
  double road_length_m = 120.0;
  double base_speed = 8.0;  // m/s
  /// Fractions per class, summing to 1.
  std::map<BehaviorLabel, double> behavior_mix;
  double noise_std = 0.1;
  std::uint64_t seed = 1;
  /// Adds a perpendicular road through the middle of the segment; some
  /// conservative agents use it.
  bool intersection = false;
  Kinematics kinematics;
};

/// Every class with fraction 1/6.
std::map<BehaviorLabel, double> uniform_mix();

/// Throws ArgumentError on an invalid spec.
void validate(const ScenarioSpec& spec);

struct LabeledScenario {
  TrajectorySet trajectories;
  LabelMap labels;
  ScenarioSpec spec;
  /// Classes requested in the mix that got no agents.
  std::vector<BehaviorLabel> dropped;
};

/// Per-class agent counts by largest remainder, ties to the earlier class.
std::map<BehaviorLabel, int> allocate_classes(const std::map<BehaviorLabel, double>& mix, int n);

/// Deterministic given spec.seed. Agent ids are 1..n.
LabeledScenario generate(const ScenarioSpec& spec);

/// `scenes` independent scenarios with seeds derived from spec.seed and
/// disjoint agent ids (scene s uses ids s * 1000 + 1 ...).
std::vector<LabeledScenario> generate_corpus(const ScenarioSpec& spec, int scenes);

/// Writes `trajectories.csv` and `labels.csv` into dir (created if needed).
/// Refuses a non-empty directory unless force is set.
void export_scenario(const LabeledScenario& scenario, const std::filesystem::path& dir, bool force);

inline constexpr const char* kTrajectoriesFile = "trajectories.csv";
inline constexpr const char* kLabelsFile = "labels.csv";

}  // namespace graphrqi
