#include <gtest/gtest.h>

#include <cmath>

#include "pairdesign/designs.hpp"
#include "pairdesign/matching.hpp"
#include "pairdesign/mse.hpp"

using namespace pairdesign;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

const MatchSet kAdjacent({{0, 1}, {2, 3}});
const MatchSet kCrossed({{0, 2}, {1, 3}});

}  // namespace

TEST(Tau, Examples) {
    Eigen::VectorXd half = Eigen::VectorXd::Constant(4, 0.5);
    EXPECT_DOUBLE_EQ(tau(ResponseModel(half, half)), 0.0);
    EXPECT_DOUBLE_EQ(tau(ResponseModel(Eigen::VectorXd::Ones(4), Eigen::VectorXd::Zero(4))), 1.0);
    EXPECT_NEAR(tau(ResponseModel(vec({.9, .8, .9, .8}), vec({.5, .6, .5, .6}))), 0.3, 1e-15);
}

TEST(QuadraticForm, Examples) {
    EXPECT_NEAR(quadratic_form(vec({0, 0, 0, 2}), covariance_matrix(matchset_to_partition(kAdjacent))),
                4.0, 1e-15);
    EXPECT_NEAR(quadratic_form(vec({0, 0, 2, 2}), covariance_matrix(bcrd(4))), 16.0 / 3.0, 1e-14);
    EXPECT_NEAR(quadratic_form(Eigen::VectorXd::Constant(6, 1.3), covariance_matrix(bcrd(6))), 0.0,
                1e-14);
    EXPECT_THROW(quadratic_form(vec({1, 2}), covariance_matrix(bcrd(4))), Error);
}

TEST(PmQuadraticForm, Examples) {
    EXPECT_DOUBLE_EQ(pm_quadratic_form(vec({0, 0, 0, 2}), kAdjacent), 4.0);
    EXPECT_DOUBLE_EQ(pm_quadratic_form(vec({1, 1, 1, 1}), kAdjacent), 0.0);
    EXPECT_DOUBLE_EQ(pm_quadratic_form(vec({0, 0, 2, 2}), kCrossed), 8.0);
}

TEST(BlockQuadraticForm, Examples) {
    EXPECT_NEAR(block_quadratic_form(vec({0, 0, 2, 2}), bcrd(4)), 16.0 / 3.0, 1e-14);
    EXPECT_NEAR(block_quadratic_form_pairwise(vec({0, 0, 2, 2}), bcrd(4)), 16.0 / 3.0, 1e-14);
    EXPECT_DOUBLE_EQ(block_quadratic_form(vec({0.3, 0.3, 0.3, 0.3}), bcrd(4)), 0.0);
    const Eigen::VectorXd v = vec({0.1, 1.7, 0.4, 0.2, 1.9, 0.6});
    const MatchSet m({{0, 4}, {1, 2}, {3, 5}});
    EXPECT_NEAR(block_quadratic_form(v, matchset_to_partition(m)), pm_quadratic_form(v, m), 1e-14);
}

TEST(BlockQuadraticForm, AgreesWithDenseSigma) {
    Rng rng(9);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    BlockPartition p({{0, 5, 2, 7}, {1, 3}, {4, 6, 8, 9}}, 10);
    for (int r = 0; r < 50; ++r) {
        Eigen::VectorXd v(10);
        for (auto& x : v) x = u(rng);
        const double dense = quadratic_form(v, covariance_matrix(p));
        EXPECT_NEAR(block_quadratic_form(v, p), dense, 1e-12);
        EXPECT_NEAR(block_quadratic_form_pairwise(v, p), dense, 1e-12);
    }
}

TEST(ExactMse, HalfModelIsQuarter) {
    Eigen::VectorXd half = Eigen::VectorXd::Constant(4, 0.5);
    ResponseModel m(half, half);
    for (const auto& p : {bcrd(4), matchset_to_partition(kAdjacent)}) {
        const auto r = exact_mse(m, p);
        EXPECT_NEAR(r.total(), 0.25, 1e-15);
        EXPECT_NEAR(r.design_term, 0.0, 1e-15);
    }
}

TEST(ExactMse, DegenerateModelIsZero) {
    ResponseModel m(Eigen::VectorXd::Ones(4), Eigen::VectorXd::Zero(4));
    const auto r = exact_mse(m, bcrd(4));
    EXPECT_DOUBLE_EQ(r.design_term, 0.0);
    EXPECT_DOUBLE_EQ(r.bernoulli_term, 0.0);
    EXPECT_DOUBLE_EQ(r.total(), 0.0);
}

TEST(ExactMse, PartitionAndSigmaOverloadsAgree) {
    ResponseModel m(vec({.1, .9, .3, .7, .2, .6}), vec({.4, .5, .8, .1, .3, .2}));
    BlockPartition p({{0, 1, 2, 3}, {4, 5}}, 6);
    EXPECT_NEAR(exact_mse(m, p).total(), exact_mse(m, covariance_matrix(p)).total(), 1e-15);
}

TEST(MseGap, Examples) {
    EXPECT_NEAR(mse_gap_bcrd_pm(vec({0, 0, 2, 2}), kAdjacent), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(mse_gap_bcrd_pm(vec({0, 0, 2, 2}), kCrossed), -1.0 / 6.0, 1e-15);
    EXPECT_NEAR(mse_gap_bcrd_pm(vec({1, 1, 1, 1}), kCrossed), 0.0, 1e-15);
    EXPECT_FALSE(bcrd_beats_pm(vec({0, 0, 2, 2}), kAdjacent));
    EXPECT_TRUE(bcrd_beats_pm(vec({0, 0, 2, 2}), kCrossed));
}

TEST(MatchRSquared, Examples) {
    EXPECT_NEAR(match_r_squared(vec({0, 0, 2, 2}), kAdjacent), 1.0, 1e-15);
    EXPECT_NEAR(match_r_squared(vec({0, 0, 2, 2}), kCrossed), 0.0, 1e-15);
    EXPECT_THROW(match_r_squared(vec({1, 1, 1, 1}), kAdjacent), Error);
}

TEST(BcrdExpectedRSquared, Examples) {
    EXPECT_NEAR(bcrd_expected_r_squared(2), 1.0 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(bcrd_expected_r_squared(1), 0.0);
    // 10^6 subjects, i.e. 5 * 10^5 pairs.
    EXPECT_NEAR(bcrd_expected_r_squared(500'000), 0.4999995, 1e-12);
    EXPECT_NEAR(bcrd_expected_r_squared(1'000'000), 0.49999975, 1e-12);
    EXPECT_LT(bcrd_expected_r_squared(100), bcrd_expected_r_squared(101));
}

TEST(CornerMax, PairsFour) {
    const auto c = corner_max_quadratic_form(covariance_matrix(matchset_to_partition(kAdjacent)));
    EXPECT_DOUBLE_EQ(c.value, 4.0);
    EXPECT_EQ(c.corner, vec({0, 0, 0, 2}));
    EXPECT_EQ(c.zeros, 3u);
    EXPECT_EQ(c.values, (std::vector<double>{0, 4, 0, 4, 0}));
}

TEST(CornerMax, BcrdFour) {
    const auto c = corner_max_quadratic_form(covariance_matrix(bcrd(4)));
    EXPECT_NEAR(c.value, 16.0 / 3.0, 1e-14);
    EXPECT_EQ(c.corner, vec({0, 0, 2, 2}));
}

TEST(CornerMax, UnitDiagonalBoundsBelowByFour) {
    for (const auto& p : enumerate_block_partitions(8)) {
        EXPECT_GE(corner_max_quadratic_form(covariance_matrix(p)).value, 4.0 - 1e-12);
    }
}

TEST(StaircaseCorner, Shape) {
    EXPECT_EQ(staircase_corner(4, 1), vec({0, 2, 2, 2}));
    EXPECT_EQ(staircase_corner(4, 4), vec({0, 0, 0, 0}));
}
