// graphrqi command-line front end.
//
// Exit codes: 0 ok, 1 unexpected failure, 2 usage, 3 data, 4 solver
// non-convergence or failed correctness gate.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphrqi/bench.hpp"
#include "graphrqi/classifier.hpp"
#include "graphrqi/errors.hpp"
#include "graphrqi/features.hpp"
#include "graphrqi/spectral.hpp"
#include "graphrqi/synth.hpp"
#include "graphrqi/trajectory.hpp"
#include "graphrqi/trajgraph.hpp"

namespace fs = std::filesystem;
using namespace graphrqi;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kData = 3, kSolver = 4 };

// Thrown for usage problems found after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  // shared
  std::uint64_t seed = 1;
  int k = 4;
  int spec_k = 6;
  int T = 100;
  double eps = 1e-10;
  bool weighted = false;
  bool linear = false;
  bool force = false;
  std::string end = "largest";
  std::string aggregation = "final";
  std::string format = "traf-csv";
  double frame_rate = 10.0;

  // paths
  std::string input, labels, features, model, out;

  // synth
  int n_agents = 12;
  int duration = 100;
  double noise = 0.1;
  bool intersection = false;
  std::string mix;
  int scenes = 1;

  // train
  int hidden = 32;
  int epochs = 3000;
  double lr = 0.1;
  double l2 = 0.0;
  bool inverse_frequency = false;
  double train_fraction = 0.7;

  // bench
  std::vector<int> sizes = {25, 50, 100, 200};
  int steps = 20;
  int repeats = 3;
  bool json = false;
  bool inject_fault = false;
  std::string dump_dir;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || !out.flush()) throw IoError("cannot write", path.string());
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("missing --") + what);
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw IoError(std::string(what) + " file not found", path);
}

// Refuses to clobber an existing file unless --force.
void check_output_file(const std::string& path, bool force) {
  if (path.empty()) throw UsageError("missing --out");
  std::error_code ec;
  if (fs::exists(path, ec) && !force) throw IoError("output exists (use --force to overwrite)", path);
}

void prepare_output_dir(const std::string& dir, bool force) {
  if (dir.empty()) throw UsageError("missing --out");
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) throw IoError("not a directory", dir);
    if (!fs::is_empty(dir, ec) && !force) {
      throw IoError("output directory is not empty (use --force to overwrite)", dir);
    }
  } else if (!fs::create_directories(dir, ec)) {
    throw IoError("cannot create directory", dir);
  }
}

TrajectorySet read_trajectories(const Config& c) {
  require_file(c.input, "input");
  const auto fmt = parse_trajectory_format(c.format);
  if (!fmt) throw UsageError("unknown --format '" + c.format + "'");
  return load_trajectories(c.input, *fmt, ArgoverseOptions{c.frame_rate});
}

SolverConfig solver_config(const Config& c) {
  SolverConfig s;
  s.k = c.spec_k;
  s.eps = c.eps;
  s.seed = c.seed;
  if (c.end == "largest") s.end = SpectrumEnd::kLargest;
  else if (c.end == "smallest") s.end = SpectrumEnd::kSmallest;
  else throw UsageError("--end must be 'largest' or 'smallest'");
  return s;
}

GraphOptions graph_options(const Config& c) {
  return GraphOptions{c.weighted ? EdgeWeighting::kExponential : EdgeWeighting::kUnweighted};
}

FeatureOptions feature_options(const Config& c) {
  FeatureOptions f;
  f.knn_k = c.k;
  f.T = c.T;
  f.graph = graph_options(c);
  f.solver = solver_config(c);
  if (c.aggregation == "final") f.aggregation = Aggregation::kFinalStep;
  else if (c.aggregation == "mean") f.aggregation = Aggregation::kMeanOverWindow;
  else throw UsageError("--aggregation must be 'final' or 'mean'");
  return f;
}

TrainOptions train_options(const Config& c) {
  TrainOptions t;
  t.hidden = c.hidden;
  t.linear = c.linear;
  t.epochs = c.epochs;
  t.learning_rate = c.lr;
  t.l2 = c.l2;
  t.seed = c.seed;
  t.inverse_frequency = c.inverse_frequency;
  return t;
}

// Plays every frame through the dynamic graph; calls fn(state, frame) after each step.
template <typename Fn>
void play(const TrajectorySet& set, const Config& c, Fn&& fn) {
  DynamicLaplacian state(graph_options(c));
  for (Frame f = set.first_frame(); f <= set.last_frame(); ++f) {
    const auto present_list = set.present_at(f);
    const std::set<AgentId> present(present_list.begin(), present_list.end());
    std::map<AgentId, Point> positions;
    for (const auto& [id, p] : set.positions_at(f)) {
      if (present.count(id) || state.contains(id)) positions.emplace(id, p);
    }
    if (positions.empty()) continue;
    step(state, positions, c.k, present);
    fn(state, f);
    maybe_reset(state, c.T);
  }
}

std::map<BehaviorLabel, double> parse_mix(const std::string& text) {
  if (text.empty()) return uniform_mix();
  std::map<BehaviorLabel, double> mix;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--mix entries look like 'careful=0.5'");
    const auto label = parse_label(item.substr(0, eq));
    if (!label) throw UsageError("unknown class '" + item.substr(0, eq) + "' in --mix");
    try {
      mix[*label] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("bad fraction in --mix entry '" + item + "'");
    }
  }
  return mix;
}

int cmd_synth(const Config& c) {
  ScenarioSpec spec;
  spec.n_agents = c.n_agents;
  spec.duration = c.duration;
  spec.noise_std = c.noise;
  spec.seed = c.seed;
  spec.intersection = c.intersection;
  spec.behavior_mix = parse_mix(c.mix);
  validate(spec);
  if (c.out.empty()) throw UsageError("missing --out");
  LabeledScenario sc;
  if (c.scenes == 1) {
    sc = generate(spec);
  } else {
    // Scenes share one export; agent ids are already disjoint.
    for (auto& s : generate_corpus(spec, c.scenes)) {
      for (const auto& [id, track] : s.trajectories.tracks())
        for (const auto& o : track) sc.trajectories.add(id, o);
      sc.labels.insert(s.labels.begin(), s.labels.end());
      sc.dropped = s.dropped;
    }
  }
  for (const auto l : sc.dropped) {
    std::cerr << "warning: class '" << label_name(l) << "' rounds to zero agents and was dropped\n";
  }
  export_scenario(sc, c.out, c.force);
  std::cerr << "synth: wrote " << sc.labels.size() << " agents to " << c.out << "\n";
  return kOk;
}

int cmd_graph(const Config& c) {
  const auto set = read_trajectories(c);
  check_output_file(c.out, c.force);
  Eigen::MatrixXd lap;
  play(set, c, [&](const DynamicLaplacian& s, Frame) { lap = s.dense(); });
  write_laplacian(lap, c.out);
  return kOk;
}

int cmd_spectrum(const Config& c) {
  const auto set = read_trajectories(c);
  check_output_file(c.out, c.force);
  IncrementalEigensolver solver(solver_config(c));
  Spectrum last;
  play(set, c, [&](const DynamicLaplacian& s, Frame) {
    last = solver.update(s, std::min<int>(c.spec_k, static_cast<int>(s.size())));
  });
  if (last.empty()) throw DegenerateDataError("no frames with agents");
  write_spectrum(last, c.out);
  return kOk;
}

FeatureMatrix read_features(const Config& c) {
  require_file(c.features, "features");
  std::ifstream in(c.features, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_feature_csv(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(c.features + ": " + e.what(), e.line());
  }
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& x, const std::vector<bool>& keep, bool want) {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < keep.size(); ++i)
    if (keep[i] == want) idx.push_back(static_cast<Eigen::Index>(i));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
  return out;
}

std::vector<BehaviorLabel> select_labels(const std::vector<BehaviorLabel>& y, const std::vector<bool>& keep, bool want) {
  std::vector<BehaviorLabel> out;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (keep[i] == want) out.push_back(y[i]);
  return out;
}

int cmd_train(const Config& c) {
  require_file(c.labels, "labels");
  const auto fm = read_features(c);
  check_output_file(c.out, c.force);
  const auto y = align_labels(fm, load_labels_csv(c.labels));
  const auto result = train(fm.rows, y, train_options(c));
  write_model(result.params, c.out);
  const auto pred = predicted_labels(predict(result.params, fm.rows));
  std::cerr << "train: " << result.loss_history.size() - 1 << " epochs, loss " << result.loss_history.back()
            << ", train weighted accuracy " << weighted_accuracy(pred, y) << "\n";
  return kOk;
}

std::string format_predictions(const FeatureMatrix& fm, const std::vector<Prediction>& preds) {
  std::ostringstream out;
  out << "agent_id,label";
  for (const auto l : kAllLabels) out << ',' << label_name(l);
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    out << fm.agent_ids[i] << ',' << label_name(preds[i].label);
    for (const double s : preds[i].scores) out << ',' << s;
    out << '\n';
  }
  return out.str();
}

int cmd_classify(const Config& c) {
  require_file(c.model, "model");
  const auto params = load_model(c.model);
  const auto fm = read_features(c);
  check_output_file(c.out, c.force);
  write_text(c.out, format_predictions(fm, predict(params, fm.rows)));
  return kOk;
}

nlohmann::json metrics_json(const std::vector<BehaviorLabel>& pred, const std::vector<BehaviorLabel>& truth) {
  nlohmann::json m;
  m["n"] = truth.size();
  m["weighted_accuracy"] = weighted_accuracy(pred, truth);
  m["superclass_accuracy"] = superclass_accuracy(pred, truth);
  const auto recall = per_class_recall(pred, truth);
  nlohmann::json r = nlohmann::json::object();
  for (const auto l : kAllLabels) {
    const double v = recall[static_cast<std::size_t>(class_index(l))];
    r[std::string(label_name(l))] = std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
  }
  m["per_class_recall"] = r;
  const auto cm = confusion_matrix(pred, truth);
  nlohmann::json rows = nlohmann::json::array();
  for (int t = 0; t < kNumClasses; ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (int p = 0; p < kNumClasses; ++p) row.push_back(cm(t, p));
    rows.push_back(row);
  }
  nlohmann::json names = nlohmann::json::array();
  for (const auto l : kAllLabels) names.push_back(std::string(label_name(l)));
  m["confusion_matrix"] = {{"labels", names}, {"rows", rows}};
  return m;
}

int cmd_pipeline(const Config& c) {
  require_file(c.labels, "labels");
  const auto set = read_trajectories(c);
  const auto labels = load_labels_csv(c.labels);
  const auto fopts = feature_options(c);
  const auto topts = train_options(c);
  prepare_output_dir(c.out, c.force);
  const fs::path dir(c.out);

  std::vector<WindowFeatures> windows;
  try {
    windows = extract_features(set, fopts);
  } catch (const NonConvergenceError& e) {
    throw NonConvergenceError(std::string("spectra stage: ") + e.what(), e.best_lambda(), e.best_vector(),
                              e.iterations());
  }
  const FeatureMatrix fm = stack_windows(windows);
  write_feature_csv(fm, dir / "features.csv");

  const auto y = align_labels(fm, labels);
  const auto split = stratified_split(y, c.train_fraction, c.seed);
  const auto xtr = select_rows(fm.rows, split, true);
  const auto ytr = select_labels(y, split, true);
  const auto yte = select_labels(y, split, false);
  if (yte.empty()) throw DegenerateDataError("test split is empty");
  const auto result = train(xtr, ytr, topts);
  write_model(result.params, dir / "model.txt");

  const auto preds = predict(result.params, fm.rows);
  write_text(dir / "predictions.csv", format_predictions(fm, preds));
  const auto all = predicted_labels(preds);

  nlohmann::json metrics = metrics_json(select_labels(all, split, false), yte);
  metrics["train"] = metrics_json(select_labels(all, split, true), ytr);
  metrics["windows"] = windows.size();
  metrics["seed"] = c.seed;
  write_text(dir / "metrics.json", metrics.dump(2) + "\n");

  std::ostringstream rank;
  rank << "window,rank,agent_id,w\n";
  rank.precision(17);
  for (const auto& w : windows) {
    for (std::size_t r = 0; r < w.ranking.size(); ++r) {
      rank << w.window << ',' << r + 1 << ',' << w.ranking[r].agent << ',' << w.ranking[r].w << '\n';
    }
  }
  write_text(dir / "ranking.csv", rank.str());
  std::cerr << "pipeline: test weighted accuracy " << metrics["weighted_accuracy"].get<double>()
            << ", superclass " << metrics["superclass_accuracy"].get<double>() << "\n";
  return kOk;
}

int cmd_bench(const Config& c) {
  BenchOptions b;
  b.sizes = c.sizes;
  b.k = c.spec_k;
  b.steps = c.steps;
  b.repeats = c.repeats;
  b.seed = c.seed;
  b.eps = c.eps;
  b.inject_fault = c.inject_fault;
  b.dump_dir = c.dump_dir;
  for (int d : b.sizes) {
    if (d < b.k) throw UsageError("--spec-k " + std::to_string(b.k) + " exceeds size " + std::to_string(d));
  }
  if (b.repeats < 3) throw UsageError("--repeats must be at least 3");
  check_output_file(c.out, c.force);
  const auto results = run_bench(b);
  report(results, c.out, c.json);
  std::cerr << "bench: synthetic drifting point cloud, kNN k=4; absolute times are hardware-specific\n";
  if (c.sizes.size() >= 2) {
    std::cerr << "bench: log-log slope graphrqi " << loglog_slope(results, kMethodGraphRqi) << ", dense "
              << loglog_slope(results, kMethodDense) << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GraphRQI: incremental spectra of traffic graphs and driver-behavior classification"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value configuration file (flags win)");
  app.set_version_flag("--version", "graphrqi 0.1.0");
  bool dump_config = false;
  app.add_flag("--dump-config", dump_config, "Print the resolved configuration and continue")->configurable(false);

  Config c;
  app.add_option("--seed", c.seed, "Random seed")->capture_default_str();
  app.add_option("--k", c.k, "kNN neighbours per agent")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--spec-k", c.spec_k, "Eigenpairs per step")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--T", c.T, "Reset window in steps")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--eps", c.eps, "RQI tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_flag("--weighted", c.weighted, "exp(-distance) edge weights");
  app.add_flag("--linear", c.linear, "Per-class linear model instead of the MLP");
  app.add_flag("--force", c.force, "Overwrite existing outputs");
  app.add_option("--end", c.end, "Spectrum end: largest|smallest")->capture_default_str();
  app.add_option("--aggregation", c.aggregation, "Window aggregation: final|mean")->capture_default_str();
  app.add_option("--format", c.format, "Trajectory format: traf-csv|argoverse")->capture_default_str();
  app.add_option("--frame-rate", c.frame_rate, "Argoverse frame rate (Hz)")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic scenario");
  synth->add_option("--out", c.out, "Output directory")->required();
  synth->add_option("--n", c.n_agents, "Agents per scene")->capture_default_str();
  synth->add_option("--duration", c.duration, "Frames")->capture_default_str();
  synth->add_option("--noise", c.noise, "Position noise std (m)")->capture_default_str();
  synth->add_option("--mix", c.mix, "Class fractions, e.g. careful=0.5,timid=0.5 (default uniform)");
  synth->add_option("--scenes", c.scenes, "Independent scenes in one export")->capture_default_str();
  synth->add_flag("--intersection", c.intersection, "Add a crossing road");

  auto* graph = app.add_subcommand("graph", "Build the dynamic graph and write the final Laplacian");
  graph->add_option("--input", c.input, "Trajectory file")->required();
  graph->add_option("--out", c.out, "Laplacian output")->required();

  auto* spectrum = app.add_subcommand("spectrum", "Track eigenpairs over all frames and write the last");
  spectrum->add_option("--input", c.input, "Trajectory file")->required();
  spectrum->add_option("--out", c.out, "Spectrum output")->required();

  auto* trn = app.add_subcommand("train", "Train a classifier on a feature CSV");
  trn->add_option("--features", c.features, "Feature CSV")->required();
  trn->add_option("--labels", c.labels, "Labels CSV")->required();
  trn->add_option("--out", c.out, "Model output")->required();

  auto* classify = app.add_subcommand("classify", "Predict labels for a feature CSV");
  classify->add_option("--model", c.model, "Model file")->required();
  classify->add_option("--features", c.features, "Feature CSV")->required();
  classify->add_option("--out", c.out, "Predictions CSV")->required();

  auto* pipeline = app.add_subcommand("pipeline", "Trajectories to metrics, end to end");
  pipeline->add_option("--input", c.input, "Trajectory file")->required();
  pipeline->add_option("--labels", c.labels, "Labels CSV")->required();
  pipeline->add_option("--out", c.out, "Output directory")->required();
  pipeline->add_option("--train-fraction", c.train_fraction, "Stratified train share")->capture_default_str();

  for (auto* sub : {trn, pipeline}) {
    sub->add_option("--hidden", c.hidden, "Hidden units")->capture_default_str();
    sub->add_option("--epochs", c.epochs, "Gradient steps")->capture_default_str();
    sub->add_option("--lr", c.lr, "Initial learning rate")->capture_default_str();
    sub->add_option("--l2", c.l2, "L2 penalty")->capture_default_str();
    sub->add_flag("--inverse-frequency", c.inverse_frequency, "Weight samples by inverse class frequency");
  }

  auto* bench = app.add_subcommand("bench", "Time graphrqi against the baselines");
  bench->add_option("--out", c.out, "Report path")->required();
  bench->add_option("--sizes", c.sizes, "Graph sizes")->delimiter(',')->capture_default_str();
  bench->add_option("--steps", c.steps, "Timed steps per size")->capture_default_str();
  bench->add_option("--repeats", c.repeats, "Repeats (>= 3)")->capture_default_str();
  bench->add_flag("--json", c.json, "Write JSON instead of CSV");
  bench->add_option("--dump-dir", c.dump_dir, "Where to dump a Laplacian that fails the oracle check");
  bench->add_flag("--inject-fault", c.inject_fault, "Test hook: corrupt one result")->group("")->configurable(false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (dump_config) std::cout << app.config_to_str(true, false);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "synth") return cmd_synth(c);
    if (name == "graph") return cmd_graph(c);
    if (name == "spectrum") return cmd_spectrum(c);
    if (name == "train") return cmd_train(c);
    if (name == "classify") return cmd_classify(c);
    if (name == "pipeline") return cmd_pipeline(c);
    if (name == "bench") return cmd_bench(c);
  } catch (const UsageError& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return kUsage;
  } catch (const ArgumentError& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return kUsage;
  } catch (const NonConvergenceError& e) {
    std::cerr << name << ": solver did not converge: " << e.what() << "\n";
    return kSolver;
  } catch (const BenchCorrectnessError& e) {
    std::cerr << name << ": " << e.what();
    if (!e.dump_path().empty()) std::cerr << " (Laplacian written to " << e.dump_path().string() << ")";
    std::cerr << "\n";
    return kSolver;
  } catch (const SingularUpdateError& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return kSolver;
  } catch (const Error& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << name << ": unexpected error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
