// Microbenchmarks for the hot paths: model evaluation, derivatives, the
// Newton ascent, and the random-matrix utilities. Run manually:
//   ./lincov_benchmarks --benchmark_min_time=0.5s

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "lincov/estimate.hpp"
#include "lincov/model.hpp"
#include "lincov/rmt.hpp"
#include "lincov/rng.hpp"
#include "lincov/simulate.hpp"
#include "lincov/symmetric_matrix.hpp"
#include "lincov/tracy_widom.hpp"

namespace {

using lincov::LinearCovarianceModel;
using lincov::ParameterVector;
using lincov::SampleCovariance;
using lincov::SymmetricMatrix;

LinearCovarianceModel star_model(int p) {
    return lincov::brownian_tree_model(lincov::star_tree(p));
}

ParameterVector star_point(int p) {
    ParameterVector v(p + 1);
    for (int i = 0; i < p; ++i) v(i) = 1.0 + 0.1 * i;
    v(p) = 0.5;
    return v;
}

SampleCovariance star_sample(int p, long n) {
    const LinearCovarianceModel model = star_model(p);
    return lincov::sample_covariance(lincov::sample_gaussian(
        Eigen::VectorXd::Zero(p), model.sigma_of(star_point(p)), n, 42));
}

void BM_sigma_of(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const LinearCovarianceModel model = star_model(p);
    const ParameterVector v = star_point(p);
    for (auto _ : state) benchmark::DoNotOptimize(model.sigma_of(v));
}
BENCHMARK(BM_sigma_of)->Arg(10)->Arg(50);

void BM_gradient(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const LinearCovarianceModel model = star_model(p);
    const ParameterVector v = star_point(p);
    const SampleCovariance sample = star_sample(p, 4 * p);
    for (auto _ : state) benchmark::DoNotOptimize(lincov::gradient(model, v, sample));
}
BENCHMARK(BM_gradient)->Arg(10)->Arg(30);

void BM_hessian(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const LinearCovarianceModel model = star_model(p);
    const ParameterVector v = star_point(p);
    const SampleCovariance sample = star_sample(p, 4 * p);
    for (auto _ : state) benchmark::DoNotOptimize(lincov::hessian(model, v, sample));
}
BENCHMARK(BM_hessian)->Arg(10)->Arg(30);

void BM_newton_fit(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const LinearCovarianceModel model = star_model(p);
    const SampleCovariance sample = star_sample(p, 10 * p);
    const ParameterVector init = lincov::safe_init(model, sample);
    for (auto _ : state)
        benchmark::DoNotOptimize(lincov::newton_raphson_mle(model, sample, init));
}
BENCHMARK(BM_newton_fit)->Arg(5)->Arg(10)->Arg(20);

void BM_least_squares(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const LinearCovarianceModel model = star_model(p);
    const SampleCovariance sample = star_sample(p, 4 * p);
    for (auto _ : state) benchmark::DoNotOptimize(lincov::least_squares(model, sample));
}
BENCHMARK(BM_least_squares)->Arg(10)->Arg(50);

void BM_tracy_widom_cdf(benchmark::State& state) {
    double x = -10.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(lincov::tracy_widom_cdf(x));
        x += 0.01;
        if (x > 6.0) x = -10.0;
    }
}
BENCHMARK(BM_tracy_widom_cdf);

void BM_min_sample_size(benchmark::State& state) {
    const long p = state.range(0);
    for (auto _ : state) benchmark::DoNotOptimize(lincov::min_sample_size(p));
}
BENCHMARK(BM_min_sample_size)->Arg(10)->Arg(1000);

void BM_wishart_min_eigenvalue(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const long dof = 20L * p;
    lincov::Seed seed = 7;
    for (auto _ : state) {
        const SymmetricMatrix w = lincov::sample_wishart(dof, p, seed++);
        benchmark::DoNotOptimize(w.min_eigenvalue());
    }
}
BENCHMARK(BM_wishart_min_eigenvalue)->Arg(10)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
