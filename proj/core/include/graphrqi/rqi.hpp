#pragma once

#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "graphrqi/shifted_solve.hpp"
#include "graphrqi/solver_config.hpp"

namespace graphrqi {

/// x^T L x / x^T x. Throws ArgumentError for a zero vector.
double rayleigh_quotient(const Eigen::MatrixXd& lap, const Eigen::VectorXd& x);

struct RqiResult {
  double lambda = 0.0;
  /// Unit eigenvector in the system's working coordinates.
  Eigen::VectorXd vector;
  int iterations = 0;
  /// ||x_new - x_old|| after every iteration.
  std::vector<double> steps;
  /// ||L u - lambda u|| at return.
  double residual = 0.0;
  /// Times the shift had to be nudged off a singular point.
  int shift_perturbations = 0;
};

/// One eigenpair by Rayleigh quotient iteration: x <- normalize((L - mu I)^{-1}
/// x), deflated against `locked` (orthonormal, working coordinates), then mu
/// <- x^T L x. The first solve uses `mu0`. Stops when the sign-aligned step
/// ||x_new - x_old|| <= eps or the residual ||L x - mu x|| <= eps *
/// `residual_scale`. A shift that lands on a singular point (a locked
/// eigenvalue, a base eigenvalue, a vanishing Sherman-Morrison denominator) is
/// moved by shift_floor and the solve retried.
///
/// Throws NonConvergenceError carrying the best iterate after max_iter.
RqiResult rqi_eigenpair(ShiftedSystem& system, double mu0, const Eigen::VectorXd& x0,
                        std::span<const Eigen::VectorXd> locked,
                        std::span<const double> locked_values, const SolverConfig& cfg,
                        double residual_scale = 1.0);

/// A starting point for one eigenpair.
struct RqiSeed {
  double mu = 0.0;
  Eigen::VectorXd x;  // working coordinates
};

struct TopKOutcome {
  std::vector<RqiResult> pairs;
  /// Eigenpairs that had to be recovered after the inertia check found a
  /// missing eigenvalue.
  int repairs = 0;
};

/// Runs RQI from each seed in order with deflation, then checks with an
/// inertia count that the pairs found are exactly the k at the requested end
/// of the spectrum. A missing eigenvalue is bracketed by bisection on the
/// inertia count, recovered by RQI, and swapped in for the innermost pair.
TopKOutcome solve_extreme_pairs(ShiftedSystem& system, std::vector<RqiSeed> seeds, int k,
                                const SolverConfig& cfg, double residual_scale, std::mt19937_64& rng);

}  // namespace graphrqi
