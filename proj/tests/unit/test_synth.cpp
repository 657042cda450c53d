#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "graphrqi/errors.hpp"
#include "graphrqi/synth.hpp"
#include "graphrqi/trajgraph.hpp"

using namespace graphrqi;
namespace fs = std::filesystem;

namespace {

ScenarioSpec uniform_spec(int n, std::uint64_t seed, double noise = 0.1) {
  ScenarioSpec s;
  s.n_agents = n;
  s.seed = seed;
  s.noise_std = noise;
  s.behavior_mix = uniform_mix();
  return s;
}

double mean_speed(const TrajectorySet::Track& t, double hz) {
  double len = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) len += std::hypot(t[i].x - t[i - 1].x, t[i].y - t[i - 1].y);
  return len * hz / static_cast<double>(t.size() - 1);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path = fs::temp_directory_path() / ("graphrqi_synth_" + std::to_string(std::rand()));
  TempDir() { fs::remove_all(path); }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("n=12 uniform mix: two agents per class, replay-identical") {
  const auto a = generate(uniform_spec(12, 7));
  const auto b = generate(uniform_spec(12, 7));
  CHECK(a.trajectories.agent_count() == 12);
  std::map<BehaviorLabel, int> count;
  for (const auto& [id, l] : a.labels) ++count[l];
  for (const auto l : kAllLabels) CHECK(count[l] == 2);
  CHECK(a.dropped.empty());
  CHECK(format_traf_csv(a.trajectories) == format_traf_csv(b.trajectories));
  CHECK(a.labels == b.labels);
  CHECK(format_traf_csv(generate(uniform_spec(12, 8)).trajectories) != format_traf_csv(a.trajectories));
}

TEST_CASE("impatient agents are more than twice as fast as timid ones") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto sc = generate(uniform_spec(24, seed));
    double fast = 0, slow = 0;
    int nf = 0, ns = 0;
    for (const auto& [id, l] : sc.labels) {
      const double v = mean_speed(sc.trajectories.track(id), sc.spec.frame_rate_hz);
      if (l == BehaviorLabel::kImpatient) fast += v, ++nf;
      if (l == BehaviorLabel::kTimid) slow += v, ++ns;
    }
    CHECK(fast / nf > 2.0 * slow / ns);
  }
}

TEST_CASE("noiseless careful agent drives a straight line at constant speed") {
  const auto sc = generate(uniform_spec(12, 3, 0.0));
  int checked = 0;
  for (const auto& [id, l] : sc.labels) {
    if (l != BehaviorLabel::kCareful) continue;
    const auto& t = sc.trajectories.track(id);
    const double step = t[1].x - t[0].x;
    CHECK(step == doctest::Approx(sc.spec.base_speed / sc.spec.frame_rate_hz));
    for (std::size_t i = 1; i < t.size(); ++i) {
      CHECK(t[i].x - t[i - 1].x == doctest::Approx(step).epsilon(1e-9));
      CHECK(t[i].y == t[0].y);
    }
    ++checked;
  }
  CHECK(checked == 2);
}

TEST_CASE("class allocation by largest remainder") {
  using enum BehaviorLabel;
  auto c = allocate_classes({{kCareful, 0.5}, {kTimid, 0.5}}, 7);
  CHECK(c[kCareful] == 4);
  CHECK(c[kTimid] == 3);
  c = allocate_classes(uniform_mix(), 4);
  CHECK(std::accumulate(c.begin(), c.end(), 0, [](int s, const auto& kv) { return s + kv.second; }) == 4);
  CHECK(c[kImpatient] == 1);
  CHECK(c[kTimid] == 0);

  // A class that rounds to zero is dropped with a warning, not an error.
  ScenarioSpec s = uniform_spec(4, 1);
  const auto sc = generate(s);
  CHECK(sc.labels.size() == 4);
  CHECK(sc.dropped.size() == 2);
}

TEST_CASE("invalid specs") {
  auto s = uniform_spec(1, 1);
  CHECK_THROWS_AS(generate(s), ArgumentError);
  s = uniform_spec(12, 1);
  s.duration = 1;
  CHECK_THROWS_AS(generate(s), ArgumentError);
  s = uniform_spec(12, 1);
  s.behavior_mix[BehaviorLabel::kTimid] = 0.5;
  CHECK_THROWS_AS(generate(s), ArgumentError);
  s = uniform_spec(12, 1);
  s.noise_std = -1;
  CHECK_THROWS_AS(generate(s), ArgumentError);
}

TEST_CASE("export round-trips and refuses a non-empty directory") {
  TempDir tmp;
  const auto sc = generate(uniform_spec(12, 2));
  export_scenario(sc, tmp.path, false);
  const auto back = load_trajectories(tmp.path / kTrajectoriesFile);
  REQUIRE(back.agent_count() == sc.trajectories.agent_count());
  for (const auto& [id, track] : sc.trajectories.tracks()) {
    CHECK(back.track(id).size() == track.size());
  }
  const auto labels = load_labels_csv(tmp.path / kLabelsFile);
  CHECK(labels == sc.labels);
  const std::string label_text = slurp(tmp.path / kLabelsFile);
  CHECK(std::count(label_text.begin(), label_text.end(), '\n') == 13);

  const std::string first = slurp(tmp.path / kTrajectoriesFile);
  CHECK_THROWS_AS(export_scenario(sc, tmp.path, false), IoError);
  export_scenario(generate(uniform_spec(12, 2)), tmp.path, true);
  CHECK(slurp(tmp.path / kTrajectoriesFile) == first);
}

TEST_CASE("superclasses separate by a mean-speed threshold at low noise") {
  for (double noise : {0.0, 0.1, 0.2}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto sc = generate(uniform_spec(30, seed, noise));
      double slowest_aggressive = 1e9, fastest_conservative = 0;
      for (const auto& [id, l] : sc.labels) {
        const double v = mean_speed(sc.trajectories.track(id), sc.spec.frame_rate_hz);
        if (superclass_of(l) == Superclass::kAggressive) slowest_aggressive = std::min(slowest_aggressive, v);
        else fastest_conservative = std::max(fastest_conservative, v);
      }
      CHECK_MESSAGE(slowest_aggressive > fastest_conservative, "noise " << noise << " seed " << seed);
    }
  }
}

TEST_CASE("aggressive agents have longer kNN edges on average") {
  double agg = 0, con = 0;
  int na = 0, nc = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto sc = generate(uniform_spec(60, seed));
    for (Frame f = sc.trajectories.first_frame(); f <= sc.trajectories.last_frame(); ++f) {
      const auto pos = sc.trajectories.positions_at(f);
      for (const auto& e : knn_edges(pos, 4)) {
        const double d = std::hypot(pos.at(e.a).x - pos.at(e.b).x, pos.at(e.a).y - pos.at(e.b).y);
        for (const AgentId id : {e.a, e.b}) {
          if (superclass_of(sc.labels.at(id)) == Superclass::kAggressive) agg += d, ++na;
          else con += d, ++nc;
        }
      }
    }
  }
  MESSAGE("mean incident edge length: aggressive " << agg / na << ", conservative " << con / nc);
  CHECK(agg / na > con / nc);
}

TEST_CASE("intersection puts some agents on the crossing road") {
  auto s = uniform_spec(60, 4);
  s.intersection = true;
  const auto sc = generate(s);
  int crossing = 0;
  for (const auto& [id, track] : sc.trajectories.tracks()) {
    if (std::abs(track.back().y - track.front().y) > 20.0) ++crossing;
  }
  CHECK(crossing > 0);
}

TEST_CASE("corpus scenes use disjoint ids") {
  const auto corpus = generate_corpus(uniform_spec(12, 1), 3);
  REQUIRE(corpus.size() == 3);
  std::set<AgentId> ids;
  for (const auto& sc : corpus) {
    for (const auto& [id, l] : sc.labels) CHECK(ids.insert(id).second);
  }
  CHECK(ids.size() == 36);
}
