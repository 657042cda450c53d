#pragma once

#include <cstdint>

namespace graphrqi {

/// Which end of the spectrum to compute.
enum class SpectrumEnd { kLargest, kSmallest };

struct SolverConfig {
  int k = 6;
  /// Convergence tolerance on ||x_new - x_old||_2 (sign-aligned).
  double eps = 1e-10;
  int max_iter = 50;
  /// Minimum |lambda - mu| kept between a shift and known eigenvalues.
  double shift_floor = 1e-9;
  /// Rank-1 updates tolerated before the base is refactorized.
  int chain_cap = 64;
  SpectrumEnd end = SpectrumEnd::kLargest;
  /// Seeds random start vectors and warm-start tails.
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
  /// Magnitude of the random tail given to warm-start vectors on new rows.
  double tail_scale = 1e-3;
};

/// Throws ArgumentError unless every field is in range.
void validate(const SolverConfig& cfg);

}  // namespace graphrqi
