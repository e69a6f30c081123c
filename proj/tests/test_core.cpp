#include <gtest/gtest.h>

#include "pairdesign/core.hpp"

using namespace pairdesign;

TEST(Subjects, DefaultIdsAndShape) {
    Subjects s(Eigen::MatrixXd::Zero(6, 2));
    EXPECT_EQ(s.size(), 6u);
    EXPECT_EQ(s.n_pairs(), 3u);
    EXPECT_EQ(s.dim(), 2u);
    EXPECT_EQ(s.ids().front(), "1");
    EXPECT_EQ(s.ids().back(), "6");
}

TEST(Subjects, ZeroCovariatesAllowed) {
    Subjects s(Eigen::MatrixXd(4, 0));
    EXPECT_EQ(s.dim(), 0u);
}

TEST(Subjects, RejectsOddTooSmallAndDuplicates) {
    EXPECT_THROW(Subjects(Eigen::MatrixXd::Zero(5, 1)), Error);
    EXPECT_THROW(Subjects(Eigen::MatrixXd::Zero(2, 1)), Error);
    EXPECT_THROW(Subjects({"a", "b", "a", "c"}, Eigen::MatrixXd::Zero(4, 1)), Error);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 1);
    x(2, 0) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(Subjects{x}, Error);
}

TEST(Subjects, SubsetKeepsIds) {
    Eigen::MatrixXd x(4, 1);
    x << 1, 2, 3, 4;
    Subjects s({"a", "b", "c", "d"}, x);
    Subjects t = s.subset({3, 0, 1, 2});
    EXPECT_EQ(t.ids()[0], "d");
    EXPECT_EQ(t.x()(0, 0), 4.0);
}

TEST(ResponseModel, ValidatesProbabilities) {
    Eigen::VectorXd p = Eigen::VectorXd::Constant(4, 0.5);
    Eigen::VectorXd bad = p;
    bad[1] = 1.5;
    EXPECT_NO_THROW(ResponseModel(p, p));
    EXPECT_THROW(ResponseModel(p, bad), Error);
    EXPECT_THROW(ResponseModel(p, Eigen::VectorXd::Constant(6, 0.5)), Error);
}

TEST(ResponseModel, BoundaryProbabilitiesAllowed) {
    Eigen::VectorXd zeros = Eigen::VectorXd::Zero(4);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(4);
    ResponseModel m(ones, zeros);
    EXPECT_DOUBLE_EQ(m.v()[0], 1.0);
    EXPECT_DOUBLE_EQ(m.conditional_mean(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(m.conditional_mean(0, -1), 0.0);
}

TEST(Allocation, BalanceIsA1) {
    EXPECT_NO_THROW(Allocation({1, -1, -1, 1}));
    try {
        Allocation({1, 1, 1, -1});
        FAIL();
    } catch (const AssumptionError& e) {
        EXPECT_EQ(e.assumption(), "A1");
    }
    EXPECT_THROW(Allocation({1, 0, -1, 0}), Error);
    EXPECT_EQ(Allocation({1, -1, -1, 1}).treated_count(), 2u);
}

TEST(ValidateDesign, CanonicalPairsValid) {
    EXPECT_TRUE(validate_design_assumptions({{0, 1}, {2, 3}}, 4).valid);
}

TEST(ValidateDesign, OddBlockIsA1) {
    auto r = validate_design_assumptions({{0, 1, 2}, {3}}, 4);
    EXPECT_FALSE(r.valid);
    EXPECT_EQ(r.violated, "A1");
}

TEST(ValidateDesign, DuplicateIndexIsPartitionError) {
    auto r = validate_design_assumptions({{0, 1}, {1, 2}}, 4);
    EXPECT_FALSE(r.valid);
    EXPECT_EQ(r.violated, "partition");
    EXPECT_NE(r.message.find("duplicate index 2"), std::string::npos);
}

TEST(ValidateDesign, MissingIndexIsPartitionError) {
    auto r = validate_design_assumptions({{0, 1}}, 4);
    EXPECT_EQ(r.violated, "partition");
    EXPECT_THROW(BlockPartition({{0, 1}}, 4), AssumptionError);
}

TEST(BlockPartition, PairwiseAndComplete) {
    BlockPartition pm({{0, 1}, {2, 3}}, 4);
    BlockPartition all({{0, 1, 2, 3}}, 4);
    EXPECT_TRUE(pm.is_pairwise());
    EXPECT_TRUE(all.is_complete());
    EXPECT_FALSE(all.is_pairwise());
}

TEST(MatchSet, NormalizesAndValidates) {
    MatchSet m({{3, 2}, {1, 0}});
    EXPECT_EQ(m.pairs()[0], Pair(0, 1));
    EXPECT_EQ(m.pairs()[1], Pair(2, 3));
    EXPECT_EQ(m.partner()[2], 3u);
    EXPECT_THROW(MatchSet({{0, 1}, {1, 2}}), Error);
    EXPECT_THROW(MatchSet({}), Error);
}

TEST(CovarianceMatrix, RejectsAsymmetric) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(4, 4);
    s(0, 1) = 0.5;
    EXPECT_THROW(CovarianceMatrix{s}, Error);
    EXPECT_THROW(CovarianceMatrix{Eigen::MatrixXd::Zero(2, 3)}, Error);
}
