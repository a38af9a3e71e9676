// OpenMP kernels against their serial references. The second argument selects the
// implementation: 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "partcolor/graph.hpp"
#include "partcolor/isotropize.hpp"
#include "partcolor/kernels.hpp"
#include "partcolor/rng.hpp"
#include "partcolor/spencer.hpp"

using namespace partcolor;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = normal(gen);
  return m;
}

// Signed incidence matrix of an n×n grid, one row per edge.
kernels::Csr grid_incidence(int side) {
  const WeightedGraph g = gen::grid(side, side);
  std::vector<kernels::Csr::Entry> entries;
  for (int e = 0; e < g.num_edges(); ++e) {
    entries.push_back({e, g.edge(e).u, 1.0});
    entries.push_back({e, g.edge(e).v, -1.0});
  }
  return kernels::Csr::from_entries(g.num_edges(), g.num_vertices(), std::move(entries));
}

void BM_spmv(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  GaussianSource rng(1);
  const SetSystem s = random_set_system(n, n, 0.1, rng);
  const Eigen::VectorXd x = rng.normal_vector(n);
  Eigen::VectorXd y(n);
  const bool parallel = state.range(1) != 0;
  for (auto _ : state) {
    if (parallel)
      kernels::spmv(s.rows(), x.data(), y.data());
    else
      kernels::spmv_serial(s.rows(), x.data(), y.data());
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * s.rows().nnz());
}

void BM_rank_one_apply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int m = 8 * n;
  const Eigen::MatrixXd z = random_matrix(n, m, 2);
  const Eigen::VectorXd coef = random_matrix(m, 1, 3).col(0);
  const Eigen::VectorXd v = random_matrix(n, 1, 4).col(0);
  Eigen::VectorXd out(n);
  const bool parallel = state.range(1) != 0;
  for (auto _ : state) {
    if (parallel)
      kernels::rank_one_apply(z, coef.data(), v.data(), out.data());
    else
      kernels::rank_one_apply_serial(z, coef.data(), v.data(), out.data());
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_rank_one_quadratic(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int m = 8 * n;
  const Eigen::MatrixXd d = random_matrix(n, n, 5);
  const Eigen::MatrixXd z = random_matrix(n, m, 6);
  Eigen::VectorXd out(m);
  const bool parallel = state.range(1) != 0;
  for (auto _ : state) {
    if (parallel)
      kernels::rank_one_quadratic(d, z, out.data());
    else
      kernels::rank_one_quadratic_serial(d, z, out.data());
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_csr_quadratic(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const kernels::Csr b = grid_incidence(side);
  const Eigen::MatrixXd d = random_matrix(b.cols, b.cols, 7);
  Eigen::VectorXd out(b.rows);
  const bool parallel = state.range(1) != 0;
  for (auto _ : state) {
    if (parallel)
      kernels::csr_quadratic(d, b, out.data());
    else
      kernels::csr_quadratic_serial(d, b, out.data());
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_spmv)->ArgsProduct({{1024, 8192}, {0, 1}});
BENCHMARK(BM_rank_one_apply)->ArgsProduct({{128, 512}, {0, 1}});
BENCHMARK(BM_rank_one_quadratic)->ArgsProduct({{64, 256}, {0, 1}});
BENCHMARK(BM_csr_quadratic)->ArgsProduct({{16, 32}, {0, 1}});

BENCHMARK_MAIN();
