#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "graphrqi/errors.hpp"

namespace graphrqi {

struct BenchResult {
  std::string method;
  int d = 0;
  int k = 0;
  double median_s = 0.0;
  double mean_s = 0.0;
  double p95_s = 0.0;
  /// Median over steps of mean RQI iterations per eigenpair (0 for dense).
  double med_iters = 0.0;
  double max_residual = 0.0;
  /// Timed steps accepted (warm-up excluded).
  int samples = 0;
};

struct BenchOptions {
  std::vector<int> sizes = {25, 50, 100, 200};
  int k = 6;
  int steps = 20;
  int repeats = 3;
  int warmup = 3;
  std::uint64_t seed = 1;
  double eps = 1e-10;
  /// Test hook: corrupts one graphrqi eigenvalue so the correctness gate trips.
  bool inject_fault = false;
  /// Where the offending Laplacian is written if the gate trips (skipped when empty).
  std::filesystem::path dump_dir;
};

inline constexpr const char* kMethodGraphRqi = "graphrqi";
inline constexpr const char* kMethodBaseline = "inverse_iteration";
inline constexpr const char* kMethodDense = "dense_oracle";

/// A step whose spectrum disagreed with the dense oracle.
class BenchCorrectnessError : public Error {
 public:
  BenchCorrectnessError(const std::string& what, std::filesystem::path dump)
      : Error(what), dump_(std::move(dump)) {}
  const std::filesystem::path& dump_path() const noexcept { return dump_; }

 private:
  std::filesystem::path dump_;
};

/// For each size, replays a seeded growing-graph sequence that ends at d
/// agents and times one spectrum update per step for each method, one method
/// at a time. Every step is checked against the dense oracle (eigenvalues
/// within 1e-6 relative, residuals within 1e-8 max(1, ||L||_inf)) before its
/// time is kept. Rows come out size-major in method order graphrqi,
/// inverse_iteration, dense_oracle.
std::vector<BenchResult> run_bench(const BenchOptions& options);

/// Least-squares slope of log(time) against log(d) for one method's rows.
/// First line of every report.
inline constexpr const char* kBenchNote =
    "timings are for comparing methods and scaling slopes on this machine; absolute "
    "milliseconds are not comparable across hardware";

double loglog_slope(const std::vector<BenchResult>& results, const std::string& method);

/// Header `method,d,k,median_s,mean_s,p95_s,med_iters,max_residual`.
std::string format_bench_csv(const std::vector<BenchResult>& results);
std::string format_bench_json(const std::vector<BenchResult>& results);
/// CSV, or JSON when `json` is set. Throws ArgumentError on empty results.
void report(const std::vector<BenchResult>& results, const std::filesystem::path& path, bool json = false);

}  // namespace graphrqi
