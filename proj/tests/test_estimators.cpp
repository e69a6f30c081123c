#include <gtest/gtest.h>

#include <cmath>

#include "pairdesign/designs.hpp"
#include "pairdesign/estimators.hpp"

using namespace pairdesign;

namespace {

TrialOutcome outcome(std::vector<int> w, std::vector<int> y) {
    return TrialOutcome(Allocation(std::move(w)), std::move(y));
}

}  // namespace

TEST(TrialOutcome, Validates) {
    EXPECT_THROW(outcome({1, -1, 1, -1}, {1, 0, 1}), Error);
    EXPECT_THROW(outcome({1, -1, 1, -1}, {1, 0, 2, 0}), Error);
}

TEST(DiffInMeans, Examples) {
    EXPECT_DOUBLE_EQ(diff_in_means(outcome({1, -1, 1, -1}, {1, 0, 1, 0})), 1.0);
    EXPECT_DOUBLE_EQ(diff_in_means(outcome({1, -1, 1, -1}, {1, 1, 1, 1})), 0.0);
    EXPECT_DOUBLE_EQ(diff_in_means(outcome({1, 1, -1, -1}, {1, 0, 1, 1})), -0.5);
}

TEST(LogOddsRatio, Examples) {
    EXPECT_NEAR(log_odds_ratio(outcome({1, 1, -1, -1}, {1, 1, 0, 0})), std::log(25.0), 1e-12);
    EXPECT_NEAR(log_odds_ratio(outcome({1, 1, -1, -1}, {1, 1, 0, 0})), 3.2189, 1e-4);
    EXPECT_DOUBLE_EQ(log_odds_ratio(outcome({1, -1, 1, -1, 1, -1, 1, -1}, {1, 1, 0, 0, 1, 1, 0, 0})),
                     0.0);
}

TEST(LogOddsRatio, Antisymmetric) {
    const std::vector<int> w{1, 1, 1, -1, -1, -1};
    const std::vector<int> y{1, 1, 0, 0, 1, 0};
    const std::vector<int> flipped{-1, -1, -1, 1, 1, 1};
    EXPECT_NEAR(log_odds_ratio(outcome(w, y)), -log_odds_ratio(outcome(flipped, y)), 1e-15);
}

TEST(InverseLink, Examples) {
    LogisticModelSpec spec{4.0, Eigen::VectorXd::Constant(1, 2.0), 1.0, Link::Expit};
    EXPECT_NEAR(link_eval(spec, Eigen::VectorXd::Zero(1), 1), 0.993307, 1e-6);
    EXPECT_DOUBLE_EQ(inverse_link(Link::Probit, 0.0), 0.5);
    EXPECT_NEAR(inverse_link(Link::InverseCloglog, 0.0), 1.0 - std::exp(-1.0), 1e-15);
    EXPECT_EQ(parse_link("probit"), Link::Probit);
    EXPECT_THROW(parse_link("identity"), Error);
    EXPECT_THROW(link_eval(spec, Eigen::VectorXd::Zero(2), 1), Error);
}

TEST(ResponseModelFromSpec, ArmsDifferByTreatment) {
    Eigen::MatrixXd x(4, 1);
    x << -1, 0, 1, 2;
    LogisticModelSpec spec{0.0, Eigen::VectorXd::Constant(1, 1.0), 0.5, Link::Expit};
    const ResponseModel m = response_model(spec, Subjects(x));
    EXPECT_NEAR(m.p_t()[1], 1.0 / (1.0 + std::exp(-0.5)), 1e-15);
    EXPECT_NEAR(m.p_c()[1], 1.0 / (1.0 + std::exp(0.5)), 1e-15);
}

TEST(LogisticFit, TreatmentOnlyIsHalfTheLogOddsRatio) {
    const TrialOutcome o = outcome({1, 1, 1, 1, -1, -1, -1, -1}, {1, 1, 1, 0, 1, 0, 0, 0});
    const LogisticFit fit = logistic_fit(Eigen::MatrixXd(8, 0), o);
    ASSERT_TRUE(fit.ok());
    EXPECT_NEAR(2.0 * fit.beta_t, log_odds_ratio(o), 1e-8);
    EXPECT_NEAR(fit.beta_t, std::log(9.0) / 2.0, 1e-8);
    EXPECT_LT(fit.max_score, 1e-6);
}

TEST(LogisticFit, ScoreVanishesWithCovariates) {
    Rng rng(41);
    std::normal_distribution<double> z;
    const Index n = 200;
    Eigen::MatrixXd x(n, 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) << z(rng), z(rng);
    Subjects s(x);
    LogisticModelSpec spec{0.3, Eigen::Vector2d(0.8, -0.5), 0.7, Link::Expit};
    const ResponseModel m = response_model(spec, s);
    std::vector<int> w(n);
    for (Index i = 0; i < n; ++i) w[i] = i % 2 ? -1 : 1;
    std::vector<int> y(n);
    std::uniform_real_distribution<double> u;
    for (Index i = 0; i < n; ++i) {
        const auto e = static_cast<Eigen::Index>(i);
        y[i] = u(rng) < (w[i] > 0 ? m.p_t()[e] : m.p_c()[e]) ? 1 : 0;
    }
    const LogisticFit fit = logistic_fit(s, outcome(w, y));
    ASSERT_TRUE(fit.ok());
    EXPECT_LT(fit.max_score, 1e-6);
    EXPECT_GT(fit.beta_t_se, 0.0);
}

TEST(LogisticFit, NullEffectRecovered) {
    Rng rng(43);
    std::normal_distribution<double> z;
    const Index n = 2000;
    Eigen::MatrixXd x(n, 1);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 0) = z(rng);
    Subjects s(x);
    LogisticModelSpec spec{0.0, Eigen::VectorXd::Constant(1, 1.0), 0.0, Link::Expit};
    const ResponseModel m = response_model(spec, s);
    const Allocation w = sample_allocation(bcrd(n), rng);
    std::vector<int> y(n);
    std::uniform_real_distribution<double> u;
    for (Index i = 0; i < n; ++i) y[i] = u(rng) < m.p_c()[static_cast<Eigen::Index>(i)] ? 1 : 0;
    const LogisticFit fit = logistic_fit(s, TrialOutcome(w, y));
    ASSERT_TRUE(fit.ok());
    EXPECT_LT(std::abs(fit.beta_t), 3.0 * fit.beta_t_se);
}

TEST(LogisticFit, SeparationFlagged) {
    const TrialOutcome o = outcome({1, -1, 1, -1, 1, -1}, {1, 0, 1, 0, 1, 0});
    const LogisticFit fit = logistic_fit(Eigen::MatrixXd(6, 0), o);
    EXPECT_TRUE(fit.separation);
    EXPECT_FALSE(fit.ok());
}

TEST(LogisticFit, RankDeficientThrows) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(4, 1, 2.0);
    EXPECT_THROW(logistic_fit(x, outcome({1, -1, 1, -1}, {1, 0, 0, 1})), Error);
    Eigen::MatrixXd wx(4, 1);
    wx << 1, -1, 1, -1;
    EXPECT_THROW(logistic_fit(wx, outcome({1, -1, 1, -1}, {1, 0, 0, 1})), Error);
}
