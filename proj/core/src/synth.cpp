#include "graphrqi/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "file_util.hpp"
#include "graphrqi/errors.hpp"

namespace graphrqi {

std::map<BehaviorLabel, double> uniform_mix() {
  std::map<BehaviorLabel, double> mix;
  for (const auto l : kAllLabels) mix[l] = 1.0 / kNumClasses;
  return mix;
}

void validate(const ScenarioSpec& spec) {
  if (spec.n_agents < 2) throw ArgumentError("scenario needs at least 2 agents");
  if (spec.duration < 2) throw ArgumentError("scenario needs at least 2 frames");
  if (spec.lanes < 1) throw ArgumentError("scenario needs at least one lane");
  if (!(spec.frame_rate_hz > 0.0) || !(spec.lane_width_m > 0.0) || !(spec.road_length_m > 0.0) ||
      !(spec.base_speed > 0.0)) {
    throw ArgumentError("frame rate, lane width, road length and base speed must be positive");
  }
  if (!(spec.noise_std >= 0.0)) throw ArgumentError("noise_std must be non-negative");
  if (spec.behavior_mix.empty()) throw ArgumentError("behavior mix is empty");
  double sum = 0.0;
  for (const auto& [l, f] : spec.behavior_mix) {
    if (!(f >= 0.0)) throw ArgumentError("negative fraction for " + std::string(label_name(l)));
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError("behavior mix fractions must sum to 1");
  const auto& k = spec.kinematics;
  if (k.weave_period < 1 || k.lane_change_frames < 1 || k.reverse_frames < 0 || k.forward_frames < 1 ||
      k.halt_frames < 0 || k.timid_period < 1 || k.timid_slow_frames < 0 || !(k.crossing_spacing_m > 0.0)) {
    throw ArgumentError("invalid kinematic constants");
  }
}

std::map<BehaviorLabel, int> allocate_classes(const std::map<BehaviorLabel, double>& mix, int n) {
  std::map<BehaviorLabel, int> counts;
  std::vector<std::pair<double, BehaviorLabel>> rema;
  int used = 0;
  for (const auto& [l, f] : mix) {
    const double share = f * n;
    const int base = static_cast<int>(std::floor(share + 1e-9));
    counts[l] = base;
    used += base;
    rema.emplace_back(share - base, l);
  }
  // std::map iterates in class order, so stable_sort keeps earlier classes first on ties.
  std::stable_sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) { return a.first > b.first + 1e-12; });
  for (std::size_t i = 0; used < n && i < rema.size(); ++i, ++used) ++counts[rema[i].second];
  return counts;
}

namespace {

struct Agent {
  AgentId id = 0;
  BehaviorLabel label = BehaviorLabel::kCareful;
  double x = 0.0;      // along the road
  double lane = 0.0;   // continuous lane coordinate
  int target_lane = 0;
  double lane_from = 0.0;
  int lane_t = 0;      // frames into the current lane change
  int phase = 0;
  double speed = 0.0;  // current signed speed, m/s
  bool cross_road = false;
  // cautious
  int halt_left = 0;
  double last_crossing = -1e18;
  // threatening
  int target = -1;
};

void start_lane_change(Agent& a, int to) {
  a.lane_from = a.lane;
  a.target_lane = to;
  a.lane_t = 0;
}

void advance_lane(Agent& a, int frames) {
  if (a.lane == a.target_lane) return;
  ++a.lane_t;
  const double s = std::min(1.0, static_cast<double>(a.lane_t) / frames);
  a.lane = a.lane_from + (a.target_lane - a.lane_from) * s;
}

}  // namespace

LabeledScenario generate(const ScenarioSpec& spec) {
  validate(spec);
  const auto& kin = spec.kinematics;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  LabeledScenario out;
  out.spec = spec;
  std::vector<BehaviorLabel> pool;
  for (const auto& [l, c] : allocate_classes(spec.behavior_mix, spec.n_agents)) {
    if (c == 0 && spec.behavior_mix.at(l) > 0.0) out.dropped.push_back(l);
    pool.insert(pool.end(), static_cast<std::size_t>(c), l);
  }
  std::shuffle(pool.begin(), pool.end(), rng);

  const double dt = 1.0 / spec.frame_rate_hz;
  const double v0 = spec.base_speed;
  std::vector<Agent> agents(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    Agent& a = agents[i];
    a.id = static_cast<AgentId>(i + 1);
    a.label = pool[i];
    a.x = unit(rng) * spec.road_length_m;
    a.target_lane = static_cast<int>(unit(rng) * spec.lanes) % spec.lanes;
    a.lane = a.lane_from = a.target_lane;
    a.phase = static_cast<int>(unit(rng) * 1000.0);
    a.cross_road = spec.intersection && superclass_of(a.label) == Superclass::kConservative && unit(rng) < 0.3;
    out.labels[a.id] = a.label;
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  for (int t = 0; t < spec.duration; ++t) {
    for (Agent& a : agents) {
      const int ph = t + a.phase;
      switch (a.label) {
        case BehaviorLabel::kCareful:
          a.speed = v0;
          break;
        case BehaviorLabel::kImpatient: {
          a.speed = kin.impatient_speed * v0;
          // Gap-closing: speed up further when someone is ahead in the lane.
          for (const Agent& b : agents) {
            const double gap = b.x - a.x;
            if (&b != &a && std::abs(b.lane - a.lane) < 0.5 && gap > 0.0 && gap < 3.0 * kin.standard_headway_s * v0) {
              a.speed = (kin.impatient_speed + 0.2) * v0;
            }
          }
          if (ph % kin.weave_period == 0 && spec.lanes > 1) {
            const int cur = a.target_lane;
            int to = cur + (unit(rng) < 0.5 ? -1 : 1);
            if (to < 0 || to >= spec.lanes) to = cur + (cur == 0 ? 1 : -1);
            start_lane_change(a, to);
          }
          break;
        }
        case BehaviorLabel::kReckless: {
          const int cycle = kin.forward_frames + kin.reverse_frames;
          a.speed = (ph % cycle < kin.forward_frames ? 1.0 : -1.0) * kin.reckless_speed * v0;
          break;
        }
        case BehaviorLabel::kThreatening: {
          if (ph % 30 == 0 || a.target < 0) {
            // Sample one of the three nearest agents to cut in front of.
            std::vector<std::pair<double, int>> near;
            for (std::size_t j = 0; j < agents.size(); ++j) {
              if (&agents[j] == &a) continue;
              near.emplace_back(std::hypot(agents[j].x - a.x, (agents[j].lane - a.lane) * spec.lane_width_m),
                                static_cast<int>(j));
            }
            std::sort(near.begin(), near.end());
            const std::size_t pick = std::min<std::size_t>(near.size() - 1, static_cast<std::size_t>(unit(rng) * 3));
            a.target = near[pick].second;
          }
          const Agent& b = agents[static_cast<std::size_t>(a.target)];
          const double headway = kin.cut_in_headway * kin.standard_headway_s * std::max(std::abs(b.speed), 1.0);
          const double want = b.x + headway;
          const double catch_up = (want - a.x) / 1.5;  // close the gap over ~1.5 s
          a.speed = std::clamp(catch_up, kin.threatening_speed * v0, 2.0 * v0);
          const int b_lane = static_cast<int>(std::lround(b.lane));
          if (b_lane != a.target_lane && std::abs(want - a.x) < 15.0) start_lane_change(a, b_lane);
          break;
        }
        case BehaviorLabel::kCautious: {
          a.speed = v0;
          if (a.halt_left > 0) {
            a.speed = 0.0;
            --a.halt_left;
            break;
          }
          const double next = std::ceil(a.x / kin.crossing_spacing_m) * kin.crossing_spacing_m;
          if (next - a.x <= kin.halt_distance_m && next != a.last_crossing) {
            a.last_crossing = next;
            a.halt_left = kin.halt_frames;
            a.speed = 0.0;
          }
          break;
        }
        case BehaviorLabel::kTimid: {
          a.speed = kin.timid_speed * v0;
          if (ph % kin.timid_period < kin.timid_slow_frames) a.speed *= kin.timid_slow_factor;
          break;
        }
      }
    }
    for (Agent& a : agents) {
      a.x += a.speed * dt;
      advance_lane(a, kin.lane_change_frames);
      double px = a.x;
      double py = (a.lane + 0.5) * spec.lane_width_m;
      if (a.cross_road) {
        // Perpendicular road through the middle of the segment.
        px = spec.road_length_m / 2 + (a.lane + 0.5) * spec.lane_width_m;
        py = a.x - spec.road_length_m / 2;
      }
      if (spec.noise_std > 0.0) {
        px += spec.noise_std * noise(rng);
        py += spec.noise_std * noise(rng);
      }
      out.trajectories.add(a.id, Observation{t, px, py});
    }
  }
  return out;
}

std::vector<LabeledScenario> generate_corpus(const ScenarioSpec& spec, int scenes) {
  if (scenes < 1) throw ArgumentError("corpus needs at least one scene");
  std::vector<LabeledScenario> out;
  std::seed_seq seq{spec.seed};
  std::vector<std::uint32_t> seeds(static_cast<std::size_t>(scenes));
  seq.generate(seeds.begin(), seeds.end());
  for (int s = 0; s < scenes; ++s) {
    ScenarioSpec one = spec;
    one.seed = seeds[static_cast<std::size_t>(s)];
    LabeledScenario sc = generate(one);
    LabeledScenario shifted;
    shifted.spec = one;
    shifted.dropped = sc.dropped;
    const AgentId offset = static_cast<AgentId>(s) * 1000;
    for (const auto& [id, track] : sc.trajectories.tracks()) {
      for (const auto& o : track) shifted.trajectories.add(id + offset, o);
      shifted.labels[id + offset] = sc.labels.at(id);
    }
    out.push_back(std::move(shifted));
  }
  return out;
}

void export_scenario(const LabeledScenario& scenario, const std::filesystem::path& dir, bool force) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) throw IoError("not a directory", dir);
    if (!fs::is_empty(dir, ec) && !force) {
      throw IoError("output directory is not empty (use --force to overwrite)", dir);
    }
  } else if (!fs::create_directories(dir, ec)) {
    throw IoError("cannot create directory: " + ec.message(), dir);
  }
  write_traf_csv(scenario.trajectories, dir / kTrajectoriesFile);
  write_labels_csv(scenario.labels, dir / kLabelsFile);
}

}  // namespace graphrqi
