#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pairdesign/core.hpp"
#include "pairdesign/estimators.hpp"
#include "pairdesign/random.hpp"

namespace pairdesign {

enum class DesignKind { Bcrd, Block, PairMatching, RandomPairs };

/// A design to compare: "bcrd", "block:B", "pm" or "random_pm" (pairs drawn
/// uniformly at random for every replicate).
struct DesignSpec {
    DesignKind kind = DesignKind::Bcrd;
    Index blocks = 0;

    static DesignSpec parse(std::string_view text);
    /// Stable label used in output and in seed derivation, e.g. "block8".
    std::string id() const;
};

enum class MatchMethod {
    /// Sorted on the single covariate when d = 1, Mahalanobis otherwise.
    Auto,
    Sorted,
    Mahalanobis,
};

MatchMethod parse_match_method(std::string_view text);

enum class EstimatorKind { RiskDifference, LogOddsRatio, Logistic };

EstimatorKind parse_estimator(std::string_view text);

struct SimConfig {
    std::vector<DesignSpec> designs;
    std::vector<EstimatorKind> estimators{EstimatorKind::RiskDifference,
                                          EstimatorKind::LogOddsRatio, EstimatorKind::Logistic};
    Index n_sim = 100'000;
    std::uint64_t seed = 1;
    /// Worker threads; 0 uses the hardware concurrency.
    unsigned threads = 0;
    MatchMethod match = MatchMethod::Auto;
    /// Levels per blocking covariate for block designs; empty picks a default
    /// (see block_levels_for).
    std::vector<Index> block_levels;
    /// Subsample size for the parametric bootstrap; 0 uses every subject.
    Index subsample = 0;
};

/// One output row: a (design, estimator, target) combination.
struct SimSummary {
    std::string design;
    std::string estimator;
    Index n_subjects = 0;
    Index dim = 0;
    /// Mean of the per-replicate true parameter.
    double target = 0.0;
    double mean_estimate = 0.0;
    double mse = 0.0;
    /// Monte Carlo standard error of `mse`.
    double mc_se = 0.0;
    Index used = 0;
    Index excluded = 0;
};

struct SimResult {
    std::vector<SimSummary> rows;

    const SimSummary& at(std::string_view design, std::string_view estimator) const;
};

/// Fixed subjects with their response model; beta_t is the regression target.
struct Scenario {
    Subjects subjects;
    ResponseModel model;
    double beta_t = 0.0;
};

/// Logistic quantiles log(p/(1-p)) at p evenly spaced over [0.005, 0.995].
Eigen::VectorXd logistic_quantile_grid(Index n_subjects);

/// Covariates whose blocking cells (by rank of the blocking covariates) all
/// have equal size: d = 1 gives 8 blocks on x1, d = 2 gives 4 x 2 on (x1, x2),
/// d = 5 gives 2 x 2 x 2 on (x1, x2, x3) with x4 and x5 unblocked.
Subjects block_homogeneous_covariates(Index n_subjects, Index dim, Rng& rng);

/// Levels per blocking covariate used for `n_blocks` blocks in dimension `dim`.
std::vector<Index> block_levels_for(Index n_blocks, Index dim);

/// Blocks are the nonempty cells of the cross-classification of covariates
/// 1..levels.size() cut at equal-count rank boundaries.
BlockPartition cross_block_partition(const Eigen::MatrixXd& x, const std::vector<Index>& levels);

/// Match structure used by the PM design for these covariates.
MatchSet design_matching(const Eigen::MatrixXd& x, MatchMethod method);

/// Block partition for a non-random design on these covariates.
BlockPartition design_partition(const DesignSpec& design, const Eigen::MatrixXd& x,
                                const SimConfig& config);

/// Independent Bernoulli responses with success probability p_T or p_C by arm.
std::vector<int> draw_responses(const ResponseModel& model, const Allocation& w, Rng& rng);

/// Monte Carlo comparison of designs on a fixed scenario.
SimResult run_monte_carlo(const Scenario& scenario, const SimConfig& config);

/// Same engine with responses from a fitted model over real covariates and,
/// when config.subsample is below the data size, a fresh subsample drawn
/// without replacement for each replicate.
SimResult parametric_bootstrap(const Subjects& subjects, const LogisticModelSpec& fitted,
                               const SimConfig& config);

/// Synthetic scenario: block-homogeneous covariates, beta = beta_1 * 1_d.
Scenario synthetic_scenario(Index n_subjects, Index dim, double beta0, double beta1,
                            double beta_t, Link link, std::uint64_t covariate_seed);

}  // namespace pairdesign
