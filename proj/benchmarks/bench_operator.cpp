#include "qeo/eigensolver.hpp"
#include "qeo/experiment.hpp"
#include "qeo/pam.hpp"
#include "qeo/spectral_operator.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

Eigen::VectorXcd random_vector(std::size_t M) {
  std::mt19937 rng(1);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd v(M);
  for (std::size_t i = 0; i < M; ++i) v[i] = {nd(rng), nd(rng)};
  return v;
}

// args: example id, N
void BM_Apply(benchmark::State& state) {
  const auto cfg = qeo::builtin_example(static_cast<int>(state.range(0)));
  const auto op = qeo::SpectralOperator::matrix_free(cfg.coefficient, cfg.projection(),
                                                     static_cast<int>(state.range(1)));
  const Eigen::VectorXcd u = random_vector(op.size());
  for (auto _ : state) benchmark::DoNotOptimize(op.apply(u));
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(op.size()));
}
BENCHMARK(BM_Apply)->Args({1, 128})->Args({2, 32})->Args({3, 8})->Args({3, 16})->Unit(benchmark::kMicrosecond);

void BM_DenseMatVec(benchmark::State& state) {
  const auto cfg = qeo::builtin_example(1);
  const auto op = qeo::assemble_dense(cfg.coefficient, cfg.projection(), static_cast<int>(state.range(0)));
  const Eigen::VectorXcd u = random_vector(op.size());
  for (auto _ : state) benchmark::DoNotOptimize(Eigen::VectorXcd(op.matrix() * u));
}
BENCHMARK(BM_DenseMatVec)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_RowNorms(benchmark::State& state) {
  const auto cfg = qeo::builtin_example(static_cast<int>(state.range(0)));
  const auto op = qeo::SpectralOperator::matrix_free(cfg.coefficient, cfg.projection(),
                                                     static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(op.row_norms_squared());
}
BENCHMARK(BM_RowNorms)->Args({1, 64})->Args({3, 8})->Unit(benchmark::kMillisecond);

void BM_FactorizedPreconditioner(benchmark::State& state) {
  const auto cfg = qeo::builtin_example(1);
  const auto op = qeo::SpectralOperator::matrix_free(cfg.coefficient, cfg.projection(),
                                                     static_cast<int>(state.range(0)));
  const qeo::FactorizedPreconditioner M(op);
  Eigen::MatrixXcd R(op.size(), 8);
  for (int c = 0; c < 8; ++c) R.col(c) = random_vector(op.size());
  for (auto _ : state) benchmark::DoNotOptimize(M.apply(R));
}
BENCHMARK(BM_FactorizedPreconditioner)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_SolveIterative(benchmark::State& state) {
  const auto cfg = qeo::builtin_example(1);
  const auto op = qeo::SpectralOperator::matrix_free(cfg.coefficient, cfg.projection(),
                                                     static_cast<int>(state.range(0)));
  qeo::SolveOptions opts;
  opts.pairs = 4;
  const auto M = qeo::build_preconditioner(op);
  for (auto _ : state) benchmark::DoNotOptimize(qeo::solve_iterative(op, M, opts));
}
BENCHMARK(BM_SolveIterative)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_PamSolve(benchmark::State& state) {
  const auto problem = qeo::pam_problem(state.range(0), 16);
  for (auto _ : state) benchmark::DoNotOptimize(qeo::pam_solve(problem, 4));
}
BENCHMARK(BM_PamSolve)->Arg(17)->Arg(72)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
