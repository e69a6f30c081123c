#include <gtest/gtest.h>

#include "pairdesign/designs.hpp"
#include "pairdesign/matching.hpp"
#include "pairdesign/mse.hpp"
#include "pairdesign/verify.hpp"

using namespace pairdesign;

TEST(BruteForceMse, HalfModelIsQuarter) {
    Eigen::VectorXd half = Eigen::VectorXd::Constant(4, 0.5);
    EXPECT_NEAR(brute_force_mse(ResponseModel(half, half), bcrd(4)), 0.25, 1e-15);
}

TEST(BruteForceMse, EqualsExactOnPairs) {
    Eigen::Vector4d pt(0.1, 0.7, 0.4, 0.95);
    Eigen::Vector4d pc(0.3, 0.2, 0.6, 0.5);
    ResponseModel m(pt, pc);
    BlockPartition pm({{0, 1}, {2, 3}}, 4);
    EXPECT_NEAR(brute_force_mse(m, pm), exact_mse(m, pm).total(), 1e-12);
    EXPECT_LT(check_unbiasedness(m, pm), 1e-14);
}

TEST(BruteForceMse, ConstantVIsDesignIndependent) {
    Eigen::Vector4d pt(0.1, 0.7, 0.4, 0.95);
    Eigen::Vector4d pc = Eigen::Vector4d::Constant(1.0) - pt;
    ResponseModel m(pt, pc);
    EXPECT_NEAR(brute_force_mse(m, bcrd(4)), brute_force_mse(m, BlockPartition({{0, 3}, {1, 2}}, 4)),
                1e-15);
}

TEST(Unbiasedness, NullModelExpectsZero) {
    Eigen::VectorXd p(6);
    p << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
    ResponseModel m(p, p);
    EXPECT_LT(std::abs(exhaustive_bias(m, BlockPartition({{0, 1, 2, 3}, {4, 5}}, 6))), 1e-15);
}

TEST(Theorem1, HoldsAndStrict) {
    Eigen::VectorXd v(8);
    v << 0, 0.1, 0.3, 0.35, 0.9, 1.2, 1.5, 2;
    const auto r = check_theorem1(v, {4, 4});
    EXPECT_TRUE(r.holds);
    EXPECT_TRUE(r.strict);
    EXPECT_EQ(r.chain.size(), 2u);
}

TEST(Theorem1, ConstantVIsEquality) {
    const auto r = check_theorem1(Eigen::VectorXd::Constant(8, 0.7), {2, 6});
    EXPECT_TRUE(r.holds);
    EXPECT_FALSE(r.strict);
    EXPECT_FALSE(r.distinct_values);
    EXPECT_NEAR(r.pm, 0.0, 1e-15);
    EXPECT_NEAR(r.block, 0.0, 1e-15);
}

TEST(Theorem1, DistinctValuesNeedNotBeStrict) {
    Eigen::Vector4d v(0, 0, 0, 1);
    const auto r = check_theorem1(v, {4});
    EXPECT_TRUE(r.holds);
    EXPECT_TRUE(r.distinct_values);
    EXPECT_FALSE(r.strict);
    EXPECT_DOUBLE_EQ(r.pm, 1.0);
}

TEST(Theorem1, RejectsUnsorted) {
    Eigen::Vector4d v(0, 1, 0.5, 2);
    EXPECT_THROW(check_theorem1(v, {4}), Error);
}

TEST(EvenCompositions, Counts) {
    EXPECT_EQ(even_compositions(4), (std::vector<std::vector<Index>>{{2, 2}, {4}}));
    EXPECT_EQ(even_compositions(16).size(), 128u);
}

TEST(Sweeps, DefaultChecksPass) {
    EXPECT_TRUE(theorem1_sweep(8, 200, 1).passed);
    EXPECT_TRUE(check_minimax(4, {}, 1).passed);
    EXPECT_TRUE(check_remark1(6).passed);
    EXPECT_TRUE(check_sigma_oracle(6).passed);
    EXPECT_TRUE(check_mse_oracle(6, 50, 1).passed);
    EXPECT_TRUE(check_remark2(200, 1).passed);
    EXPECT_TRUE(check_matching_oracle(8, 50, 1).passed);
}

TEST(Sweeps, Remark3ForManyConstants) {
    std::vector<CovarianceMatrix> designs;
    for (const auto& p : enumerate_block_partitions(6)) designs.push_back(covariance_matrix(p));
    designs.push_back(random_mixture_covariance(6, 5, 3));
    for (double c : {1.0, 2.0, 0.37}) EXPECT_TRUE(check_remark3(designs, c).passed);
}

TEST(Sweeps, MinimaxMeasuresCornerConstant) {
    const auto r = check_minimax(6, {}, 2);
    double pm_max = 0.0;
    for (const auto& [k, v] : r.measurements) {
        if (k == "pm_corner_max") pm_max = v;
    }
    EXPECT_DOUBLE_EQ(pm_max, 4.0);
}

TEST(RunVerification, OnlyAndSize) {
    VerifyOptions o;
    o.only = {"theorem1"};
    o.n_subjects = 16;
    const auto reports = run_verification(o);
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_EQ(reports[0].name, "theorem1[2n=16]");
    EXPECT_TRUE(reports[0].passed);
}

TEST(RunVerification, InjectedSigmaFailsWithWitness) {
    VerifyOptions o;
    o.only = {"sigma"};
    o.n_subjects = 4;
    o.inject_wrong_sigma = true;
    const auto reports = run_verification(o);
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_FALSE(reports[0].passed);
    EXPECT_GT(reports[0].witness.deviation, 1e-4);
    EXPECT_FALSE(reports[0].witness.blocks.empty());
}

TEST(RunVerification, UnknownCheckIsAnError) {
    VerifyOptions o;
    o.only = {"nonsense"};
    EXPECT_THROW(run_verification(o), Error);
}
