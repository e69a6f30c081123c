#include <gtest/gtest.h>

#include <cmath>

#include "pairdesign/designs.hpp"
#include "pairdesign/matching.hpp"
#include "pairdesign/mse.hpp"
#include "pairdesign/simulation.hpp"

using namespace pairdesign;

namespace {

SimConfig small_config(std::vector<std::string> designs, Index n_sim, unsigned threads = 1) {
    SimConfig c;
    for (const auto& d : designs) c.designs.push_back(DesignSpec::parse(d));
    c.n_sim = n_sim;
    c.threads = threads;
    c.seed = 2024;
    return c;
}

void expect_same(const SimResult& a, const SimResult& b) {
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        EXPECT_EQ(a.rows[k].design, b.rows[k].design);
        EXPECT_EQ(a.rows[k].estimator, b.rows[k].estimator);
        EXPECT_EQ(a.rows[k].mean_estimate, b.rows[k].mean_estimate);
        EXPECT_EQ(a.rows[k].mse, b.rows[k].mse);
        EXPECT_EQ(a.rows[k].mc_se, b.rows[k].mc_se);
        EXPECT_EQ(a.rows[k].excluded, b.rows[k].excluded);
    }
}

}  // namespace

TEST(DesignSpec, ParseAndId) {
    EXPECT_EQ(DesignSpec::parse("block:8").id(), "block8");
    EXPECT_EQ(DesignSpec::parse("bl4").blocks, 4u);
    EXPECT_EQ(DesignSpec::parse("pm").kind, DesignKind::PairMatching);
    EXPECT_EQ(DesignSpec::parse("random_pm").id(), "random_pm");
    EXPECT_THROW(DesignSpec::parse("block:0"), Error);
    EXPECT_THROW(DesignSpec::parse("latin"), Error);
    EXPECT_EQ(parse_estimator("rd"), EstimatorKind::RiskDifference);
    EXPECT_THROW(parse_estimator("median"), Error);
}

TEST(LogisticQuantileGrid, Endpoints) {
    const Eigen::VectorXd g = logistic_quantile_grid(64);
    EXPECT_NEAR(g[0], -std::log(199.0), 1e-12);
    EXPECT_NEAR(g[63], std::log(199.0), 1e-12);
    EXPECT_NEAR(g[63], 5.2933, 1e-4);
    for (Eigen::Index i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
    EXPECT_NEAR(logistic_quantile_grid(5)[2], 0.0, 1e-15);
}

TEST(BlockHomogeneousCovariates, SingleCovariateIsTheGrid) {
    Rng rng(1);
    const Subjects s = block_homogeneous_covariates(64, 1, rng);
    Eigen::VectorXd x = s.x().col(0);
    std::sort(x.begin(), x.end());
    EXPECT_LT((x - logistic_quantile_grid(64)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BlockHomogeneousCovariates, EightCellsOfEight) {
    for (Index d : {2u, 5u}) {
        Rng rng(d);
        const Subjects s = block_homogeneous_covariates(64, d, rng);
        EXPECT_EQ(s.dim(), d);
        const BlockPartition p = design_partition(DesignSpec::parse("block:8"), s.x(), SimConfig{});
        ASSERT_EQ(p.blocks().size(), 8u) << "d=" << d;
        for (const auto& b : p.blocks()) EXPECT_EQ(b.size(), 8u);
    }
    EXPECT_EQ(block_levels_for(8, 2), (std::vector<Index>{4, 2}));
    EXPECT_EQ(block_levels_for(8, 5), (std::vector<Index>{2, 2, 2}));
}

TEST(DrawResponses, DegenerateModels) {
    Rng rng(3);
    const Allocation w({1, -1, -1, 1});
    const ResponseModel ones(Eigen::VectorXd::Ones(4), Eigen::VectorXd::Ones(4));
    EXPECT_EQ(draw_responses(ones, w, rng), (std::vector<int>{1, 1, 1, 1}));
    const ResponseModel split(Eigen::VectorXd::Ones(4), Eigen::VectorXd::Zero(4));
    EXPECT_EQ(draw_responses(split, w, rng), (std::vector<int>{1, 0, 0, 1}));
}

TEST(DrawResponses, EmpiricalMeans) {
    Rng rng(7);
    Eigen::Vector4d pt(0.2, 0.9, 0.5, 0.05);
    Eigen::Vector4d pc(0.6, 0.1, 0.3, 0.5);
    const ResponseModel m(pt, pc);
    const Allocation w({1, -1, 1, -1});
    const int draws = 100'000;
    std::vector<double> sum(4, 0.0);
    for (int r = 0; r < draws; ++r) {
        const auto y = draw_responses(m, w, rng);
        for (int i = 0; i < 4; ++i) sum[i] += y[i];
    }
    for (int i = 0; i < 4; ++i) {
        const double p = w[i] > 0 ? pt[i] : pc[i];
        EXPECT_NEAR(sum[i] / draws, p, 4.0 * std::sqrt(p * (1 - p) / draws));
    }
}

TEST(RunMonteCarlo, NullEffectHasZeroMean) {
    const Scenario sc = synthetic_scenario(16, 1, 0.0, 1.0, 0.0, Link::Expit, 5);
    SimConfig c = small_config({"bcrd", "pm"}, 20'000);
    c.estimators = {EstimatorKind::RiskDifference};
    const SimResult r = run_monte_carlo(sc, c);
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.target, 0.0);
        EXPECT_LT(std::abs(row.mean_estimate), 4.0 * std::sqrt(row.mse / c.n_sim));
    }
}

TEST(RunMonteCarlo, MatchesExactMse) {
    const Scenario sc = synthetic_scenario(16, 1, 0.5, 1.5, 1.0, Link::Expit, 9);
    SimConfig c = small_config({"bcrd", "block:4", "pm"}, 40'000);
    c.estimators = {EstimatorKind::RiskDifference};
    const SimResult r = run_monte_carlo(sc, c);
    const std::vector<double> key(sc.subjects.x().col(0).begin(), sc.subjects.x().col(0).end());
    const double exact[] = {
        exact_mse(sc.model, bcrd(16)).total(),
        exact_mse(sc.model, sorted_block_partition(key, 4)).total(),
        exact_mse(sc.model, matchset_to_partition(sorted_pair_matching(key))).total(),
    };
    const char* ids[] = {"bcrd", "block4", "pm"};
    for (int k = 0; k < 3; ++k) {
        const auto& row = r.at(ids[k], "risk_difference");
        EXPECT_LT(std::abs(row.mse - exact[k]), 4.0 * row.mc_se) << ids[k];
    }
}

TEST(RunMonteCarlo, DeterministicAcrossThreads) {
    const Scenario sc = synthetic_scenario(32, 2, 1.0, 1.0, 1.0, Link::Expit, 3);
    const auto one = run_monte_carlo(sc, small_config({"bcrd", "block:8", "pm", "random_pm"}, 3000, 1));
    const auto three = run_monte_carlo(sc, small_config({"bcrd", "block:8", "pm", "random_pm"}, 3000, 3));
    expect_same(one, three);
}

TEST(RunMonteCarlo, SingleReplicateHasInfiniteSe) {
    const Scenario sc = synthetic_scenario(8, 1, 0.0, 1.0, 1.0, Link::Expit, 3);
    SimConfig c = small_config({"pm"}, 1);
    c.estimators = {EstimatorKind::RiskDifference};
    const SimResult r = run_monte_carlo(sc, c);
    EXPECT_TRUE(std::isinf(r.at("pm", "risk_difference").mc_se));
    EXPECT_TRUE(std::isfinite(r.at("pm", "risk_difference").mse));
}

TEST(RunMonteCarlo, LogOddsRatioTargets) {
    const Scenario sc = synthetic_scenario(16, 1, 0.0, 1.0, 0.5, Link::Expit, 3);
    SimConfig c = small_config({"pm"}, 10);
    c.estimators = {EstimatorKind::LogOddsRatio};
    const SimResult r = run_monte_carlo(sc, c);
    EXPECT_DOUBLE_EQ(r.at("pm", "log_odds_ratio").target, 1.0);
    EXPECT_DOUBLE_EQ(r.at("pm", "log_odds_ratio_vs_beta_t").target, 0.5);
}

TEST(ParametricBootstrap, FullSizeReducesToMonteCarlo) {
    const Scenario sc = synthetic_scenario(24, 1, 0.0, 1.0, 0.0, Link::Expit, 1);
    LogisticModelSpec fitted{0.2, Eigen::VectorXd::Constant(1, 0.9), 1.0, Link::Expit};
    SimConfig c = small_config({"bcrd", "pm"}, 2000);
    const SimResult boot = parametric_bootstrap(sc.subjects, fitted, c);
    const Scenario direct{sc.subjects, response_model(fitted, sc.subjects), 1.0};
    expect_same(boot, run_monte_carlo(direct, c));
}

TEST(ParametricBootstrap, SubsampleTargetIsRecomputed) {
    const Scenario sc = synthetic_scenario(64, 1, 0.0, 1.0, 0.0, Link::Expit, 1);
    LogisticModelSpec fitted{0.0, Eigen::VectorXd::Constant(1, 1.0), 1.0, Link::Expit};
    SimConfig c = small_config({"pm"}, 500);
    c.subsample = 16;
    c.estimators = {EstimatorKind::RiskDifference};
    const auto& row = parametric_bootstrap(sc.subjects, fitted, c).at("pm", "risk_difference");
    EXPECT_EQ(row.n_subjects, 16u);
    EXPECT_GT(row.target, 0.0);
    EXPECT_NE(row.target, tau(response_model(fitted, sc.subjects)));
}
