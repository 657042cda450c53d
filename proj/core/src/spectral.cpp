#include "graphrqi/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "graphrqi/errors.hpp"

namespace graphrqi {

namespace {

constexpr double kResidualFactor = 1e-8;

// Indices of `values` ordered from the requested end inward.
std::vector<Eigen::Index> extreme_order(const Eigen::VectorXd& values, SpectrumEnd end) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return end == SpectrumEnd::kLargest ? values[a] > values[b] : values[a] < values[b];
  });
  return idx;
}

// Pads `x` to `n` rows with a small random tail.
Eigen::VectorXd extend(const Eigen::VectorXd& x, Eigen::Index n, double tail_scale,
                       std::mt19937_64& rng) {
  Eigen::VectorXd out(n);
  out.head(x.size()) = x;
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (Eigen::Index i = x.size(); i < n; ++i) out[i] = tail_scale * uni(rng);
  return out;
}

// Unit-normalizes, sign-normalizes and sorts ascending.
Spectrum assemble(const std::vector<RqiResult>& pairs, const std::vector<Eigen::VectorXd>& vectors,
                  const std::vector<double>& true_residuals) {
  const auto k = static_cast<Eigen::Index>(pairs.size());
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pairs[a].lambda < pairs[b].lambda; });
  Spectrum s;
  const Eigen::Index n = k ? vectors.front().size() : 0;
  s.vectors.resize(n, k);
  s.values.resize(k);
  s.residuals.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto src = order[static_cast<std::size_t>(j)];
    s.values[j] = pairs[src].lambda;
    s.vectors.col(j) = vectors[src];
    s.residuals[j] = true_residuals[src];
    s.iterations.push_back(pairs[src].iterations);
  }
  return s;
}

void check_k(Eigen::Index n, int k) {
  if (n == 0) throw ArgumentError("spectrum of an empty graph");
  if (k < 1) throw ArgumentError("k must be >= 1");
  if (k > n) {
    throw ArgumentError("k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
  }
}

}  // namespace

IncrementalEigensolver::IncrementalEigensolver(SolverConfig cfg) : cfg_(cfg), rng_(cfg.seed) {
  validate(cfg_);
}

void IncrementalEigensolver::set_previous(const Spectrum& prev) { prev_ = prev; }

void IncrementalEigensolver::prime_from_base(const DynamicLaplacian& state) {
  op_.emplace(state.dense_base());
  epoch_ = state.epoch();
  consumed_ = 0;
}

void IncrementalEigensolver::refactorize(const DynamicLaplacian& state) {
  op_.emplace(state.dense());
  epoch_ = state.epoch();
  consumed_ = state.update_log().size();
  ++refactorizations_;
  stats_.refactorized = true;
}

bool IncrementalEigensolver::consume_log(const DynamicLaplacian& state) {
  const auto& log = state.update_log();
  for (std::size_t e = consumed_; e < log.size(); ++e) {
    if (const auto* b = std::get_if<BorderEvent>(&log[e])) {
      if (static_cast<Eigen::Index>(b->index) != op_->dim()) return false;
      op_->border(1);
    } else {
      const auto& edge = std::get<EdgeAddEvent>(log[e]);
      op_->add_edge(static_cast<Eigen::Index>(edge.i), static_cast<Eigen::Index>(edge.j), edge.weight);
    }
  }
  consumed_ = log.size();
  return op_->dim() == static_cast<Eigen::Index>(state.size());
}

std::vector<RqiSeed> IncrementalEigensolver::warm_seeds(int k) {
  const Eigen::Index n = op_->dim();
  const auto m = std::min<Eigen::Index>(prev_.k(), n);
  Eigen::MatrixXd w(n, m);
  for (Eigen::Index j = 0; j < m; ++j)
    w.col(j) = op_->to_working(extend(prev_.vectors.col(j), n, cfg_.tail_scale, rng_));
  // Rayleigh-Ritz on the previous span: eigenvectors inside a cluster rotate
  // after an update, and single-vector quotients then seed the wrong pair.
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(w).householderQ() *
                            Eigen::MatrixXd::Identity(n, m);
  Eigen::MatrixXd aq(n, m);
  for (Eigen::Index j = 0; j < m; ++j) aq.col(j) = op_->apply(q.col(j));
  const Eigen::MatrixXd h = 0.5 * (q.transpose() * aq + aq.transpose() * q);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(h);

  std::vector<RqiSeed> seeds;
  for (Eigen::Index j : extreme_order(ritz.eigenvalues(), cfg_.end)) {
    if (static_cast<int>(seeds.size()) == k) break;
    Eigen::VectorXd x = q * ritz.eigenvectors().col(j);
    x.normalize();
    seeds.push_back(RqiSeed{ritz.eigenvalues()[j], std::move(x)});
  }
  return seeds;
}

std::vector<RqiSeed> IncrementalEigensolver::base_seeds(int k) {
  std::vector<RqiSeed> seeds;
  const Eigen::Index n = op_->dim();
  for (Eigen::Index j : extreme_order(op_->base_values(), cfg_.end)) {
    if (static_cast<int>(seeds.size()) == k) break;
    Eigen::VectorXd w = Eigen::VectorXd::Unit(n, j);
    const double mu = w.dot(op_->apply(w));
    seeds.push_back(RqiSeed{mu, std::move(w)});
  }
  return seeds;
}

Spectrum IncrementalEigensolver::solve(const DynamicLaplacian& state, int k, bool cold) {
  const bool warm = !cold && !prev_.empty() && prev_.n() <= op_->dim();
  std::vector<RqiSeed> seeds = warm ? warm_seeds(k) : base_seeds(k);
  stats_.cold_start = !warm;
  stats_.chain_length = op_->chain_length();

  const double scale = std::max(1.0, state.inf_norm());
  TopKOutcome outcome = solve_extreme_pairs(*op_, std::move(seeds), k, cfg_, scale, rng_);

  std::vector<Eigen::VectorXd> vectors;
  std::vector<double> true_residuals;
  for (const auto& p : outcome.pairs) {
    Eigen::VectorXd u = op_->from_working(p.vector);
    u.normalize();
    normalize_sign(u);
    const double r = (state.apply(u) - p.lambda * u).norm();
    if (!(r <= kResidualFactor * scale)) {
      throw NonConvergenceError("eigenpair residual above tolerance", p.lambda, u, p.iterations);
    }
    true_residuals.push_back(r);
    vectors.push_back(std::move(u));
  }
  stats_.repairs = outcome.repairs;
  for (const auto& p : outcome.pairs) stats_.shift_perturbations += p.shift_perturbations;
  stats_.pairs = outcome.pairs;
  return assemble(outcome.pairs, vectors, true_residuals);
}

Spectrum IncrementalEigensolver::update(const DynamicLaplacian& state, std::optional<int> k_opt) {
  const int k = k_opt.value_or(cfg_.k);
  check_k(static_cast<Eigen::Index>(state.size()), k);
  stats_ = SolveStats{};

  const bool stale = !op_ || epoch_ != state.epoch() || consumed_ > state.update_log().size();
  bool cold = false;
  if (stale) {
    if (op_ && epoch_ != state.epoch()) prev_ = Spectrum{};
    refactorize(state);
    cold = true;
  } else if (!consume_log(state) ||
             op_->chain_length() > static_cast<std::size_t>(cfg_.chain_cap)) {
    refactorize(state);
    cold = true;
  }

  Spectrum result;
  try {
    result = solve(state, k, cold);
  } catch (const Error& e) {
    if (!dynamic_cast<const NonConvergenceError*>(&e) &&
        !dynamic_cast<const SingularUpdateError*>(&e)) {
      throw;
    }
    if (cold && stats_.refactorized) throw;
    refactorize(state);
    try {
      result = solve(state, k, true);
    } catch (const SingularUpdateError& s) {
      throw NonConvergenceError(std::string("solve failed after refactorization: ") + s.what(), 0.0,
                                Eigen::VectorXd(), 0);
    }
  }
  prev_ = result;
  return result;
}

Spectrum graphrqi_spectrum(const DynamicLaplacian& state, const Spectrum* prev,
                           const SolverConfig& cfg) {
  check_k(static_cast<Eigen::Index>(state.size()), cfg.k);
  IncrementalEigensolver solver(cfg);
  if (prev && prev->n() <= static_cast<Eigen::Index>(state.size())) {
    solver.prime_from_base(state);
    solver.set_previous(*prev);
  }
  return solver.update(state);
}

Spectrum inverse_iteration_baseline(const Eigen::MatrixXd& lap, int k, const SolverConfig& cfg,
                                    const Spectrum* prev) {
  validate(cfg);
  check_k(lap.rows(), k);
  std::mt19937_64 rng(cfg.seed);
  DenseShiftedSystem system(lap);
  const Eigen::Index n = lap.rows();

  std::vector<RqiSeed> seeds;
  if (prev && !prev->empty() && prev->n() <= n) {
    for (Eigen::Index j : extreme_order(prev->values, cfg.end)) {
      if (static_cast<int>(seeds.size()) == k) break;
      Eigen::VectorXd x = extend(prev->vectors.col(j), n, cfg.tail_scale, rng).normalized();
      seeds.push_back(RqiSeed{x.dot(lap * x), std::move(x)});
    }
  }
  const double scale = std::max(1.0, gershgorin_bound(lap));
  TopKOutcome outcome = solve_extreme_pairs(system, std::move(seeds), k, cfg, scale, rng);

  std::vector<Eigen::VectorXd> vectors;
  std::vector<double> true_residuals;
  for (const auto& p : outcome.pairs) {
    Eigen::VectorXd u = p.vector.normalized();
    normalize_sign(u);
    true_residuals.push_back((lap * u - p.lambda * u).norm());
    vectors.push_back(std::move(u));
  }
  return assemble(outcome.pairs, vectors, true_residuals);
}

}  // namespace graphrqi
