#include "graphrqi/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include <json.hpp>

#include "file_util.hpp"
#include "graphrqi/dense_oracle.hpp"
#include "graphrqi/spectral.hpp"
#include "graphrqi/trajgraph.hpp"
#include "text_util.hpp"

namespace graphrqi {

namespace {

using Positions = std::map<AgentId, Point>;

// Agents drift at constant velocity in a box sized for constant density;
// one newcomer every 4 steps, ending at d agents.
std::vector<Positions> bench_sequence(int d, int total_steps, std::uint64_t seed) {
  std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(d));
  const double side = 10.0 * std::sqrt(static_cast<double>(d));
  std::uniform_real_distribution<double> where(0.0, side);
  std::normal_distribution<double> vel(0.0, 0.5);
  const int arrivals = total_steps / 4;
  const int n0 = std::max(d - arrivals, std::min(d, 8));

  struct Mover {
    Point p, v;
  };
  std::vector<Mover> movers;
  auto spawn = [&]() { movers.push_back({{where(rng), where(rng)}, {vel(rng), vel(rng)}}); };
  for (int i = 0; i < n0; ++i) spawn();

  std::vector<Positions> frames;
  for (int s = 0; s < total_steps; ++s) {
    if (s > 0 && s % 4 == 0 && static_cast<int>(movers.size()) < d) spawn();
    Positions pos;
    for (std::size_t i = 0; i < movers.size(); ++i) {
      Mover& m = movers[i];
      if (s > 0) {
        m.p.x += m.v.x;
        m.p.y += m.v.y;
      }
      pos.emplace(static_cast<AgentId>(i + 1), m.p);
    }
    frames.push_back(std::move(pos));
  }
  return frames;
}

struct StepRecord {
  double seconds = 0.0;
  double iters = 0.0;
  double residual = 0.0;
};

struct Reference {
  Eigen::VectorXd top;  // oracle's k largest, ascending
  double scale = 1.0;
};

Eigen::VectorXd top_k(const Spectrum& s, int k) { return s.values.tail(k); }

void gate(const Spectrum& got, const Reference& ref, const Eigen::MatrixXd& lap, const char* method,
          int d, int step, const BenchOptions& options) {
  std::string why;
  const Eigen::VectorXd vals = got.values.tail(ref.top.size());
  for (Eigen::Index j = 0; j < ref.top.size() && why.empty(); ++j) {
    const double tol = 1e-6 * std::max(1.0, std::abs(ref.top[j]));
    if (!(std::abs(vals[j] - ref.top[j]) <= tol)) {
      why = "eigenvalue " + std::to_string(j) + " = " + detail::format_sig17(vals[j]) + ", oracle " +
            detail::format_sig17(ref.top[j]);
    }
  }
  for (Eigen::Index j = 0; j < got.residuals.size() && why.empty(); ++j) {
    if (!(got.residuals[j] <= 1e-8 * ref.scale)) {
      why = "residual " + detail::format_sig17(got.residuals[j]) + " above tolerance";
    }
  }
  if (why.empty()) return;
  std::filesystem::path dump;
  if (!options.dump_dir.empty()) {
    dump = options.dump_dir / ("bench_fail_" + std::string(method) + "_d" + std::to_string(d) + "_step" +
                               std::to_string(step) + ".txt");
    write_laplacian(lap, dump);
  }
  throw BenchCorrectnessError(std::string(method) + " failed the oracle check at d=" + std::to_string(d) +
                                  ", step " + std::to_string(step) + ": " + why,
                              dump);
}

double mean_iterations(const Spectrum& s) {
  if (s.iterations.empty()) return 0.0;
  return std::accumulate(s.iterations.begin(), s.iterations.end(), 0.0) / static_cast<double>(s.iterations.size());
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

BenchResult summarize(const char* method, int d, int k, const std::vector<StepRecord>& steps) {
  BenchResult r;
  r.method = method;
  r.d = d;
  r.k = k;
  std::vector<double> t, it;
  for (const auto& s : steps) {
    t.push_back(s.seconds);
    it.push_back(s.iters);
    r.max_residual = std::max(r.max_residual, s.residual);
  }
  r.samples = static_cast<int>(steps.size());
  if (t.empty()) return r;
  r.median_s = quantile(t, 0.5);
  r.mean_s = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(t.size());
  r.p95_s = quantile(t, 0.95);
  r.med_iters = quantile(it, 0.5);
  return r;
}

template <typename Fn>
double timed(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<BenchResult> run_bench(const BenchOptions& options) {
  if (options.sizes.empty()) throw ArgumentError("no benchmark sizes");
  if (options.k < 1) throw ArgumentError("k must be >= 1");
  if (options.repeats < 3) throw ArgumentError("repeats must be >= 3");
  if (options.steps < 1 || options.warmup < 0) throw ArgumentError("steps must be >= 1, warmup >= 0");
  for (int d : options.sizes) {
    if (d < options.k) {
      throw ArgumentError("size " + std::to_string(d) + " is smaller than k = " + std::to_string(options.k));
    }
  }
  SolverConfig cfg;
  cfg.k = options.k;
  cfg.eps = options.eps;
  validate(cfg);

  std::vector<BenchResult> out;
  for (int d : options.sizes) {
    const int total = options.warmup + options.steps;
    const auto frames = bench_sequence(d, total, options.seed);

    // Untimed reference pass.
    std::vector<Reference> refs;
    std::vector<Eigen::MatrixXd> laps;
    {
      DynamicLaplacian g;
      for (const auto& f : frames) {
        step(g, f, 4);
        laps.push_back(g.dense());
        refs.push_back({top_k(dense_oracle(laps.back()), options.k), std::max(1.0, g.inf_norm())});
      }
    }

    std::vector<StepRecord> rec_g, rec_b, rec_d;
    for (int rep = 0; rep < options.repeats; ++rep) {
      {
        DynamicLaplacian g;
        IncrementalEigensolver solver(cfg);
        for (int s = 0; s < total; ++s) {
          step(g, frames[static_cast<std::size_t>(s)], 4);
          Spectrum spec;
          const double secs = timed([&] { spec = solver.update(g); });
          if (options.inject_fault && s == total - 1) spec.values[spec.k() - 1] += 1.0;
          gate(spec, refs[static_cast<std::size_t>(s)], laps[static_cast<std::size_t>(s)], kMethodGraphRqi, d, s, options);
          if (s >= options.warmup) rec_g.push_back({secs, mean_iterations(spec), spec.residuals.maxCoeff()});
        }
      }
      {
        Spectrum prev;
        for (int s = 0; s < total; ++s) {
          const auto& lap = laps[static_cast<std::size_t>(s)];
          Spectrum spec;
          const double secs = timed([&] { spec = inverse_iteration_baseline(lap, options.k, cfg, prev.empty() ? nullptr : &prev); });
          gate(spec, refs[static_cast<std::size_t>(s)], lap, kMethodBaseline, d, s, options);
          prev = spec;
          if (s >= options.warmup) rec_b.push_back({secs, mean_iterations(spec), spec.residuals.maxCoeff()});
        }
      }
      for (int s = 0; s < total; ++s) {
        const auto& lap = laps[static_cast<std::size_t>(s)];
        Spectrum spec;
        const double secs = timed([&] { spec = dense_oracle(lap); });
        gate(spec, refs[static_cast<std::size_t>(s)], lap, kMethodDense, d, s, options);
        if (s >= options.warmup) rec_d.push_back({secs, 0.0, spec.residuals.tail(options.k).maxCoeff()});
      }
    }
    out.push_back(summarize(kMethodGraphRqi, d, options.k, rec_g));
    out.push_back(summarize(kMethodBaseline, d, options.k, rec_b));
    out.push_back(summarize(kMethodDense, d, options.k, rec_d));
  }
  return out;
}

double loglog_slope(const std::vector<BenchResult>& results, const std::string& method) {
  std::vector<double> xs, ys;
  for (const auto& r : results) {
    if (r.method == method && r.median_s > 0.0) {
      xs.push_back(std::log(static_cast<double>(r.d)));
      ys.push_back(std::log(r.median_s));
    }
  }
  if (xs.size() < 2) throw ArgumentError("need at least two sizes for a slope");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

std::string format_bench_csv(const std::vector<BenchResult>& results) {
  std::string out = std::string("# ") + kBenchNote + "\n";
  out += "method,d,k,median_s,mean_s,p95_s,med_iters,max_residual\n";
  for (const auto& r : results) {
    out += r.method + ',' + std::to_string(r.d) + ',' + std::to_string(r.k) + ',' +
           detail::format_double(r.median_s) + ',' + detail::format_double(r.mean_s) + ',' +
           detail::format_double(r.p95_s) + ',' + detail::format_double(r.med_iters) + ',' +
           detail::format_double(r.max_residual) + '\n';
  }
  return out;
}

std::string format_bench_json(const std::vector<BenchResult>& results) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : results) {
    rows.push_back({{"method", r.method},
                    {"d", r.d},
                    {"k", r.k},
                    {"median_s", r.median_s},
                    {"mean_s", r.mean_s},
                    {"p95_s", r.p95_s},
                    {"med_iters", r.med_iters},
                    {"max_residual", r.max_residual}});
  }
  const nlohmann::json doc = {{"note", kBenchNote}, {"results", rows}};
  return doc.dump(2) + "\n";
}

void report(const std::vector<BenchResult>& results, const std::filesystem::path& path, bool json) {
  if (results.empty()) throw ArgumentError("no benchmark results to report");
  detail::write_file(path, json ? format_bench_json(results) : format_bench_csv(results));
}

}  // namespace graphrqi
