#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <map>
#include <set>

#include "pairdesign/designs.hpp"

using namespace pairdesign;

namespace {

using Blocks = std::vector<std::vector<Index>>;

// Each block sorted, for order-insensitive comparisons.
Blocks normalized(const BlockPartition& p) {
    Blocks out = p.blocks();
    for (auto& b : out) std::sort(b.begin(), b.end());
    return out;
}

}  // namespace

TEST(Bcrd, SingleBlock) {
    EXPECT_EQ(normalized(bcrd(4)), (Blocks{{0, 1, 2, 3}}));
    EXPECT_EQ(bcrd(6).blocks().size(), 1u);
    EXPECT_THROW(bcrd(5), Error);
}

TEST(SortedBlockPartition, SortThenChunk) {
    const std::vector<double> key{0.3, 0.1, 0.4, 0.2};
    EXPECT_EQ(normalized(sorted_block_partition(key, 2)), (Blocks{{1, 3}, {0, 2}}));
}

TEST(SortedBlockPartition, SortedKeyOfEight) {
    const std::vector<double> key{1, 2, 3, 4, 5, 6, 7, 8};
    EXPECT_EQ(normalized(sorted_block_partition(key, 2)), (Blocks{{0, 1, 2, 3}, {4, 5, 6, 7}}));
}

TEST(SortedBlockPartition, TiesKeepIndexOrder) {
    const std::vector<double> key{1, 1, 1, 1};
    EXPECT_EQ(normalized(sorted_block_partition(key, 2)), (Blocks{{0, 1}, {2, 3}}));
}

TEST(SortedBlockPartition, RejectsUnequalOrOddBlocks) {
    const std::vector<double> key{1, 2, 3, 4, 5, 6, 7, 8};
    EXPECT_THROW(sorted_block_partition(key, 3), Error);
    EXPECT_THROW(sorted_block_partition(key, 8), Error);
    EXPECT_NO_THROW(sorted_block_partition(key, 4));
}

TEST(SortedPairMatching, Examples) {
    const std::vector<double> a{3, 1, 2, 4};
    EXPECT_EQ(sorted_pair_matching(a).pairs(), (std::vector<Pair>{{0, 3}, {1, 2}}));
    const std::vector<double> b{1, 2, 3, 4, 5, 6};
    EXPECT_EQ(sorted_pair_matching(b).pairs(), (std::vector<Pair>{{0, 1}, {2, 3}, {4, 5}}));
    const std::vector<double> c{7, 7, 7, 7};
    EXPECT_EQ(sorted_pair_matching(c).pairs(), (std::vector<Pair>{{0, 1}, {2, 3}}));
}

TEST(SampleAllocation, PairsAreOpposite) {
    Rng rng(3);
    BlockPartition pm({{0, 1}, {2, 3}, {4, 5}}, 6);
    for (int r = 0; r < 200; ++r) {
        Allocation w = sample_allocation(pm, rng);
        EXPECT_EQ(w[0], -w[1]);
        EXPECT_EQ(w[2], -w[3]);
        EXPECT_EQ(w[4], -w[5]);
    }
}

TEST(SampleAllocation, BcrdFourIsUniform) {
    Rng rng(11);
    const int draws = 60'000;
    std::map<std::vector<int>, int> counts;
    for (int r = 0; r < draws; ++r) ++counts[sample_allocation(bcrd(4), rng).w()];
    ASSERT_EQ(counts.size(), 6u);
    double chi2 = 0.0;
    const double expected = draws / 6.0;
    for (const auto& [w, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
    // 99.9% quantile of chi-square with 5 degrees of freedom.
    EXPECT_LT(chi2, 20.515);
}

TEST(SampleAllocation, MarginalsAreZero) {
    Rng rng(5);
    const int draws = 100'000;
    BlockPartition p({{0, 1, 2, 3}, {4, 5}}, 6);
    std::array<double, 6> sum{};
    for (int r = 0; r < draws; ++r) {
        Allocation w = sample_allocation(p, rng);
        for (Index i = 0; i < 6; ++i) sum[i] += w[i];
    }
    for (double s : sum) EXPECT_LT(std::abs(s / draws), 4.0 / std::sqrt(draws));
}

TEST(SampleRandomMatching, CoversAllThreeMatchings) {
    Rng rng(2);
    std::map<std::vector<Pair>, int> counts;
    for (int r = 0; r < 3000; ++r) ++counts[sample_random_matching(4, rng).pairs()];
    EXPECT_EQ(counts.size(), 3u);
    for (const auto& [m, c] : counts) EXPECT_NEAR(c, 1000, 150);
}

TEST(CovarianceMatrixClosedForm, BcrdFour) {
    Eigen::MatrixXd s = covariance_matrix(bcrd(4)).matrix();
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) EXPECT_NEAR(s(i, j), i == j ? 1.0 : -1.0 / 3.0, 1e-15);
    }
}

TEST(CovarianceMatrixClosedForm, PairsFour) {
    Eigen::MatrixXd want(4, 4);
    want << 1, -1, 0, 0, -1, 1, 0, 0, 0, 0, 1, -1, 0, 0, -1, 1;
    EXPECT_EQ(covariance_matrix(BlockPartition({{0, 1}, {2, 3}}, 4)).matrix(), want);
}

TEST(CovarianceMatrixClosedForm, TwoBlocksOfFourMatchSupport) {
    BlockPartition p({{0, 1, 2, 3}, {4, 5, 6, 7}}, 8);
    const auto support = enumerate_support(p);
    const Eigen::MatrixXd diff =
        covariance_matrix(p).matrix() - empirical_covariance(support).matrix();
    EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_DOUBLE_EQ(covariance_matrix(p).matrix()(0, 4), 0.0);
}

TEST(SupportSize, Counts) {
    EXPECT_EQ(support_size(BlockPartition({{0, 1}, {2, 3}}, 4)), 4u);
    EXPECT_EQ(support_size(bcrd(4)), 6u);
    EXPECT_EQ(support_size(bcrd(6)), 20u);
    EXPECT_EQ(enumerate_support(bcrd(6)).size(), 20u);
}

TEST(EnumerateSupport, DistinctBalancedVectors) {
    BlockPartition p({{0, 3}, {1, 2, 4, 5}}, 6);
    const auto all = enumerate_support(p);
    std::set<std::vector<int>> seen;
    for (const auto& w : all) {
        EXPECT_EQ(w[0], -w[3]);
        seen.insert(w.w());
    }
    EXPECT_EQ(seen.size(), all.size());
    EXPECT_EQ(all.size(), 12u);
}

TEST(EnumerateSupport, CapThrows) {
    EXPECT_THROW(enumerate_support(bcrd(20), 1000), Error);
}

TEST(EmpiricalCovariance, MatchesClosedForm) {
    for (const auto& p : {bcrd(4), BlockPartition({{0, 1}, {2, 3}}, 4)}) {
        const auto support = enumerate_support(p);
        const Eigen::MatrixXd diff =
            covariance_matrix(p).matrix() - empirical_covariance(support).matrix();
        EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(EmpiricalCovariance, RepeatedAllocationIsZero) {
    std::vector<Allocation> same(5, Allocation({1, -1, 1, -1}));
    EXPECT_EQ(empirical_covariance(same).matrix(), Eigen::MatrixXd::Zero(4, 4));
}

TEST(EnumerateMatchings, DoubleFactorialCounts) {
    EXPECT_EQ(enumerate_matchings(4).size(), 3u);
    EXPECT_EQ(enumerate_matchings(6).size(), 15u);
    EXPECT_EQ(enumerate_matchings(8).size(), 105u);
}

TEST(EnumerateBlockPartitions, EvenSetPartitions) {
    // {1234}, and the three pairings.
    EXPECT_EQ(enumerate_block_partitions(4).size(), 4u);
    // One block, 15 splits 4+2, 15 pairings.
    EXPECT_EQ(enumerate_block_partitions(6).size(), 31u);
}
