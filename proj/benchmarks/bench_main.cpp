#include <benchmark/benchmark.h>

#include "pairdesign/designs.hpp"
#include "pairdesign/estimators.hpp"
#include "pairdesign/matching.hpp"
#include "pairdesign/mse.hpp"
#include "pairdesign/simulation.hpp"

using namespace pairdesign;

namespace {

Eigen::MatrixXd covariates(Index n, Index d, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> z;
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index k = 0; k < x.cols(); ++k) x(i, k) = z(rng);
    }
    return x;
}

void BM_Matching(benchmark::State& state) {
    const auto n = static_cast<Index>(state.range(0));
    const Eigen::MatrixXd d = mahalanobis_distance_matrix(covariates(n, 3, 1));
    for (auto _ : state) benchmark::DoNotOptimize(min_weight_perfect_matching(d));
}
BENCHMARK(BM_Matching)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ExactMse(benchmark::State& state) {
    const auto n = static_cast<Index>(state.range(0));
    const Scenario sc = synthetic_scenario(n, 1, 4.0, 2.0, 1.0, Link::Expit, 1);
    const BlockPartition p = bcrd(n);
    for (auto _ : state) benchmark::DoNotOptimize(exact_mse(sc.model, p));
}
BENCHMARK(BM_ExactMse)->Arg(64)->Arg(1024);

void BM_SampleAllocation(benchmark::State& state) {
    const auto n = static_cast<Index>(state.range(0));
    const std::vector<double> key(n, 0.0);
    const BlockPartition p = sorted_block_partition(key, 8);
    Rng rng(2);
    for (auto _ : state) benchmark::DoNotOptimize(sample_allocation(p, rng));
}
BENCHMARK(BM_SampleAllocation)->Arg(64)->Arg(1024);

void BM_LogisticFit(benchmark::State& state) {
    const auto n = static_cast<Index>(state.range(0));
    const Scenario sc = synthetic_scenario(n, 2, 0.5, 1.0, 1.0, Link::Expit, 3);
    Rng rng(4);
    const Allocation w = sample_allocation(bcrd(n), rng);
    const TrialOutcome o(w, draw_responses(sc.model, w, rng));
    for (auto _ : state) benchmark::DoNotOptimize(logistic_fit(sc.subjects, o));
}
BENCHMARK(BM_LogisticFit)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
