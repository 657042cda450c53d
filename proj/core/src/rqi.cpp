#include "graphrqi/rqi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "graphrqi/errors.hpp"

namespace graphrqi {

void validate(const SolverConfig& cfg) {
  if (cfg.k < 1) throw ArgumentError("solver: k must be >= 1");
  if (!(cfg.eps > 0.0)) throw ArgumentError("solver: eps must be positive");
  if (cfg.max_iter < 1) throw ArgumentError("solver: max_iter must be >= 1");
  if (!(cfg.shift_floor > 0.0)) throw ArgumentError("solver: shift_floor must be positive");
  if (cfg.chain_cap < 1) throw ArgumentError("solver: chain_cap must be >= 1");
  if (!(cfg.tail_scale > 0.0)) throw ArgumentError("solver: tail_scale must be positive");
}

double rayleigh_quotient(const Eigen::MatrixXd& lap, const Eigen::VectorXd& x) {
  if (lap.rows() != lap.cols() || lap.cols() != x.size()) {
    throw ArgumentError("rayleigh_quotient: dimension mismatch");
  }
  const double xx = x.squaredNorm();
  if (xx == 0.0) throw ArgumentError("rayleigh_quotient: zero vector");
  return x.dot(lap * x) / xx;
}

namespace {

void deflate(Eigen::VectorXd& x, std::span<const Eigen::VectorXd> locked) {
  // Classical Gram-Schmidt twice keeps orthogonality at working precision.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& v : locked) x -= v.dot(x) * v;
  }
}

Eigen::VectorXd random_unit(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = normal(rng);
  return x.normalized();
}

// Solve with the shift nudged off singular points. Returns the shift used.
Eigen::VectorXd guarded_solve(ShiftedSystem& system, double& mu, const Eigen::VectorXd& x,
                              std::span<const double> locked_values, const SolverConfig& cfg,
                              int& perturbations) {
  const double nudge = cfg.shift_floor * std::max(1.0, std::abs(mu));
  for (double lv : locked_values) {
    if (std::abs(mu - lv) < cfg.shift_floor) {
      mu += nudge;
      ++perturbations;
    }
  }
  constexpr int kAttempts = 8;
  for (int attempt = 0;; ++attempt) {
    try {
      Eigen::VectorXd y = system.solve(mu, x);
      if (y.allFinite()) return y;
      if (attempt >= kAttempts) throw SingularUpdateError("shifted solve produced non-finite values", 0, 0.0);
    } catch (const SingularUpdateError&) {
      if (attempt >= kAttempts) throw;
    }
    mu += nudge * std::ldexp(1.0, attempt);
    ++perturbations;
  }
}

}  // namespace

RqiResult rqi_eigenpair(ShiftedSystem& system, double mu0, const Eigen::VectorXd& x0,
                        std::span<const Eigen::VectorXd> locked,
                        std::span<const double> locked_values, const SolverConfig& cfg,
                        double residual_scale) {
  if (x0.size() != system.dim()) throw ArgumentError("rqi_eigenpair: x0 has wrong dimension");
  const double x0_norm = x0.norm();
  if (x0_norm == 0.0) throw ArgumentError("rqi_eigenpair: x0 is zero");

  Eigen::VectorXd x = x0 / x0_norm;
  deflate(x, locked);
  const double kept = x.norm();
  if (kept < 1e-10) throw ArgumentError("rqi_eigenpair: x0 lies in the locked subspace");
  x /= kept;

  RqiResult out;
  double mu = mu0;
  double best_residual = std::numeric_limits<double>::infinity();
  double best_lambda = mu0;
  Eigen::VectorXd best = x;
  const double tol = cfg.eps * std::max(1.0, residual_scale);

  for (int it = 1; it <= cfg.max_iter; ++it) {
    double shift = mu;
    Eigen::VectorXd y = guarded_solve(system, shift, x, locked_values, cfg, out.shift_perturbations);
    deflate(y, locked);
    const double ny = y.norm();
    if (!(ny > 0.0) || !std::isfinite(ny)) {
      throw NonConvergenceError("rqi_eigenpair: iterate collapsed", best_lambda, best, it);
    }
    Eigen::VectorXd next = y / ny;
    if (next.dot(x) < 0.0) next = -next;
    const double step = (next - x).norm();
    out.steps.push_back(step);
    x = std::move(next);

    const Eigen::VectorXd lx = system.apply(x);
    mu = x.dot(lx);
    const double residual = (lx - mu * x).norm();
    if (residual < best_residual) {
      best_residual = residual;
      best_lambda = mu;
      best = x;
    }
    if (step <= cfg.eps || residual <= tol) {
      out.lambda = mu;
      out.vector = std::move(x);
      out.iterations = it;
      out.residual = residual;
      return out;
    }
  }
  throw NonConvergenceError("rqi_eigenpair: no convergence within max_iter", best_lambda, best,
                            cfg.max_iter);
}

namespace {

struct Finder {
  ShiftedSystem& system;
  SpectrumEnd end;
  double tau;

  // Eigenvalues of L_t strictly beyond `sigma` on the requested side.
  Eigen::Index count_beyond(double& sigma) {
    const double nudge = tau * 0.125;
    for (int attempt = 0;; ++attempt) {
      try {
        const Eigen::Index above = system.count_above(sigma);
        return end == SpectrumEnd::kLargest ? above : system.dim() - above;
      } catch (const SingularUpdateError&) {
        if (attempt >= 16) throw;
        sigma += (end == SpectrumEnd::kLargest ? 1.0 : -1.0) * nudge * (attempt + 1);
      }
    }
  }

  bool beyond(double value, double sigma) const {
    return end == SpectrumEnd::kLargest ? value > sigma : value < sigma;
  }
};

}  // namespace

TopKOutcome solve_extreme_pairs(ShiftedSystem& system, std::vector<RqiSeed> seeds, int k,
                                const SolverConfig& cfg, double residual_scale, std::mt19937_64& rng) {
  const Eigen::Index n = system.dim();
  if (k < 1 || k > n) throw ArgumentError("solve_extreme_pairs: need 1 <= k <= n");
  const bool largest = cfg.end == SpectrumEnd::kLargest;
  const double bound = system.spectral_bound();

  TopKOutcome out;
  std::vector<Eigen::VectorXd> locked;
  std::vector<double> values;

  auto run = [&](double mu0, Eigen::VectorXd x0) {
    if (x0.size() != n || x0.norm() == 0.0) x0 = random_unit(n, rng);
    Eigen::VectorXd probe = x0.normalized();
    deflate(probe, locked);
    if (probe.norm() < 1e-6) x0 = random_unit(n, rng);
    RqiResult r = rqi_eigenpair(system, mu0, x0, locked, values, cfg, residual_scale);
    locked.push_back(r.vector);
    values.push_back(r.lambda);
    out.pairs.push_back(std::move(r));
  };

  for (std::size_t s = 0; s < seeds.size() && static_cast<int>(out.pairs.size()) < k; ++s) {
    run(seeds[s].mu, std::move(seeds[s].x));
  }
  while (static_cast<int>(out.pairs.size()) < k) {
    double mu0 = largest ? bound : -1e-3 * std::max(1.0, bound);
    if (!values.empty()) {
      mu0 = largest ? *std::min_element(values.begin(), values.end())
                    : *std::max_element(values.begin(), values.end());
    }
    run(mu0, Eigen::VectorXd());
  }

  Finder finder{system, cfg.end, 1e-8 * std::max(1.0, residual_scale)};
  const double outer = largest ? bound * 1.01 + 1.0 : -(bound * 1.01 + 1.0);
  const double width = 1e-4 * std::max(1.0, residual_scale);
  const int max_repairs = 2 * k + 4;

  for (int repair = 0;; ++repair) {
    const auto inner_it = largest ? std::min_element(values.begin(), values.end())
                                  : std::max_element(values.begin(), values.end());
    const double inner = *inner_it;
    const auto drop = static_cast<std::size_t>(inner_it - values.begin());
    double sigma = largest ? inner + finder.tau : inner - finder.tau;
    auto unfound = [&](double& at) {
      const Eigen::Index total = finder.count_beyond(at);
      const auto known = std::count_if(values.begin(), values.end(),
                                       [&](double v) { return finder.beyond(v, at); });
      return total - static_cast<Eigen::Index>(known);
    };
    if (unfound(sigma) <= 0) break;
    if (repair >= max_repairs) {
      throw NonConvergenceError("solve_extreme_pairs: could not certify the extreme eigenpairs",
                                inner, out.pairs.back().vector, repair);
    }

    // Bracket the outermost missing eigenvalue between a (missing beyond) and
    // b (nothing missing beyond).
    double a = sigma;
    double b = outer;
    while (std::abs(b - a) > width) {
      double mid = 0.5 * (a + b);
      if (unfound(mid) > 0) {
        a = mid;
      } else {
        b = mid;
      }
    }
    const double mu0 = 0.5 * (a + b);

    // A couple of fixed-shift inverse iterations lock onto the eigenvalue
    // nearest the bracket before the Rayleigh quotient takes over.
    Eigen::VectorXd x = random_unit(n, rng);
    deflate(x, locked);
    x.normalize();
    int perturbations = 0;
    for (int s = 0; s < 2; ++s) {
      double shift = mu0;
      x = guarded_solve(system, shift, x, values, cfg, perturbations);
      deflate(x, locked);
      x.normalize();
    }
    run(mu0, x);
    ++out.repairs;

    values.erase(values.begin() + static_cast<std::ptrdiff_t>(drop));
    locked.erase(locked.begin() + static_cast<std::ptrdiff_t>(drop));
    out.pairs.erase(out.pairs.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  return out;
}

}  // namespace graphrqi
