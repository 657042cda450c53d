#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "graphrqi/dense_oracle.hpp"
#include "graphrqi/rqi.hpp"
#include "graphrqi/shifted_solve.hpp"
#include "graphrqi/solver_config.hpp"
#include "graphrqi/spectrum.hpp"
#include "graphrqi/trajgraph.hpp"

namespace graphrqi {

struct SolveStats {
  bool refactorized = false;
  bool cold_start = false;
  std::size_t chain_length = 0;
  int repairs = 0;
  int shift_perturbations = 0;
  /// Per eigenpair, in solve order.
  std::vector<RqiResult> pairs;
};

/// Incremental eigensolver for one DynamicLaplacian window.
///
/// Keeps a ShiftedSolveOperator whose base is the last refactorized
/// Laplacian, feeds it the update-log suffix on every call, and warm-starts
/// each eigenpair from the previous step: eigenvector extended with a small
/// random tail, shift refined to its Rayleigh quotient. The base is
/// refactorized on a reset, when the chain exceeds chain_cap, or when a solve
/// fails once.
class IncrementalEigensolver {
 public:
  explicit IncrementalEigensolver(SolverConfig cfg = {});

  /// Spectrum of the state's current Laplacian. `k` overrides cfg.k.
  Spectrum update(const DynamicLaplacian& state, std::optional<int> k = std::nullopt);

  /// Seeds the warm start with an externally supplied previous spectrum
  /// (dimension must be a leading block of the next state's).
  void set_previous(const Spectrum& prev);

  /// Starts from the state's post-reset base with the whole update log as
  /// the chain, instead of factorizing the current Laplacian.
  void prime_from_base(const DynamicLaplacian& state);

  const SolveStats& last_stats() const noexcept { return stats_; }
  const SolverConfig& config() const noexcept { return cfg_; }
  int refactorizations() const noexcept { return refactorizations_; }

 private:
  void refactorize(const DynamicLaplacian& state);
  bool consume_log(const DynamicLaplacian& state);
  std::vector<RqiSeed> warm_seeds(int k);
  std::vector<RqiSeed> base_seeds(int k);
  Spectrum solve(const DynamicLaplacian& state, int k, bool cold);

  SolverConfig cfg_;
  std::mt19937_64 rng_;
  std::optional<ShiftedSolveOperator> op_;
  std::uint64_t epoch_ = 0;
  std::size_t consumed_ = 0;
  Spectrum prev_;
  SolveStats stats_;
  int refactorizations_ = 0;
};

/// One-shot spectrum. Without `prev` the current Laplacian is factorized
/// directly; with `prev` the solve runs from the post-reset base through the
/// update log (refactorizing if the log exceeds chain_cap), warm-started
/// from `prev`. Throws ArgumentError if k > n or n == 0.
Spectrum graphrqi_spectrum(const DynamicLaplacian& state, const Spectrum* prev,
                           const SolverConfig& cfg);

/// The same RQI driver with a fresh dense LU factorization of (L - mu I) at
/// every iteration and no Sherman-Morrison chain. Warm-starts from `prev`
/// when given.
Spectrum inverse_iteration_baseline(const Eigen::MatrixXd& lap, int k, const SolverConfig& cfg,
                                    const Spectrum* prev = nullptr);

}  // namespace graphrqi
