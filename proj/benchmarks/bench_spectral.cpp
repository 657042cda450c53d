// Per-step microbenchmarks on a growing kNN graph. The end-to-end timing
// report with correctness gating is `graphrqi bench`; these are for profiling.

#include <map>
#include <random>

#include <benchmark/benchmark.h>

#include "graphrqi/dense_oracle.hpp"
#include "graphrqi/shifted_solve.hpp"
#include "graphrqi/spectral.hpp"
#include "graphrqi/trajgraph.hpp"

using namespace graphrqi;

namespace {

// d agents scattered in a box, kNN graph with k = 4.
DynamicLaplacian scattered(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> box(0.0, 10.0 * std::sqrt(static_cast<double>(d)));
  std::map<AgentId, Point> pos;
  for (int i = 0; i < d; ++i) pos[i + 1] = Point{box(rng), box(rng)};
  DynamicLaplacian state;
  step(state, pos, 4);
  return state;
}

// Two agents not yet joined.
Edge absent_edge(const DynamicLaplacian& state, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, state.size() - 1);
  for (;;) {
    const AgentId a = state.agents()[pick(rng)], b = state.agents()[pick(rng)];
    if (a != b && !state.edges().count(Edge::make(a, b))) return Edge::make(a, b);
  }
}

void BM_GraphRqiAfterEdge(benchmark::State& st) {
  std::mt19937_64 rng(1);
  const int d = static_cast<int>(st.range(0));
  for (auto _ : st) {
    st.PauseTiming();
    DynamicLaplacian state = scattered(d, rng);
    IncrementalEigensolver solver;
    solver.update(state);
    const Edge e = absent_edge(state, rng);
    state.add_edge(e.a, e.b);
    st.ResumeTiming();
    benchmark::DoNotOptimize(solver.update(state));
  }
}

void BM_InverseIterationAfterEdge(benchmark::State& st) {
  std::mt19937_64 rng(1);
  const int d = static_cast<int>(st.range(0));
  SolverConfig cfg;
  for (auto _ : st) {
    st.PauseTiming();
    DynamicLaplacian state = scattered(d, rng);
    const Spectrum prev = dense_oracle(state.dense());
    Spectrum top;
    top.vectors = prev.vectors.rightCols(cfg.k);
    top.values = prev.values.tail(cfg.k);
    const Edge e = absent_edge(state, rng);
    state.add_edge(e.a, e.b);
    const Eigen::MatrixXd lap = state.dense();
    st.ResumeTiming();
    benchmark::DoNotOptimize(inverse_iteration_baseline(lap, cfg.k, cfg, &top));
  }
}

void BM_DenseOracle(benchmark::State& st) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd lap = scattered(static_cast<int>(st.range(0)), rng).dense();
  for (auto _ : st) benchmark::DoNotOptimize(dense_oracle(lap));
}

// One shifted solve through a chain of the given length (fresh shift each time).
void BM_ShermanMorrisonSolve(benchmark::State& st) {
  std::mt19937_64 rng(2);
  DynamicLaplacian state = scattered(100, rng);
  ShiftedSolveOperator op(state.dense());
  for (int c = 0; c < st.range(0); ++c) {
    const Edge e = absent_edge(state, rng);
    state.add_edge(e.a, e.b);
    op.add_edge(static_cast<Eigen::Index>(state.index_of(e.a)),
                static_cast<Eigen::Index>(state.index_of(e.b)));
  }
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(op.dim());
  double mu = -0.5;
  for (auto _ : st) {
    mu -= 1e-3;
    benchmark::DoNotOptimize(op.sm_apply(mu, x));
  }
}

}  // namespace

BENCHMARK(BM_GraphRqiAfterEdge)->Arg(25)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_InverseIterationAfterEdge)->Arg(25)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DenseOracle)->Arg(25)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ShermanMorrisonSolve)->Arg(1)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
