#pragma once

#include <vector>

#include "pairdesign/core.hpp"

namespace pairdesign {

/// Sample average treatment effect: mean(p_T) - mean(p_C).
double tau(const ResponseModel& model);

/// v' Sigma v. Throws on dimension mismatch.
double quadratic_form(const Eigen::VectorXd& v, const CovarianceMatrix& sigma);

/// sum_k (v_{i_k} - v_{j_k})^2, the quadratic form under the pairwise design.
double pm_quadratic_form(const Eigen::VectorXd& v, const MatchSet& matches);

/// sum_b n_b/(n_b - 1) ||v_b - mean(v_b)||^2, the quadratic form of a block
/// design without building Sigma.
double block_quadratic_form(const Eigen::VectorXd& v, const BlockPartition& partition);

/// Same value through the pairwise-difference identity
/// ||u||^2 = (1/m) sum_{i<j} (u_i - u_j)^2 for mean-zero u of length m.
double block_quadratic_form_pairwise(const Eigen::VectorXd& v, const BlockPartition& partition);

struct MseBreakdown {
    /// v' Sigma v / (4 n^2), the only part a design can change.
    double design_term = 0.0;
    /// 2 (p_T'(1 - p_T) + p_C'(1 - p_C)) / (4 n^2).
    double bernoulli_term = 0.0;
    /// Raw quadratic form v' Sigma v.
    double quadratic_form = 0.0;
    double total() const { return design_term + bernoulli_term; }
};

/// Exact MSE of the difference-in-means estimator under a block design.
MseBreakdown exact_mse(const ResponseModel& model, const BlockPartition& partition);

/// Exact MSE under any design given its covariance matrix.
MseBreakdown exact_mse(const ResponseModel& model, const CovarianceMatrix& sigma);

/// MSE(BCRD) - MSE(PM) for the given match set; positive when PM is better.
double mse_gap_bcrd_pm(const Eigen::VectorXd& v, const MatchSet& matches);

/// True when BCRD strictly outperforms the match set, i.e. the average
/// squared distance over all pairs is below the average over matched pairs.
bool bcrd_beats_pm(const Eigen::VectorXd& v, const MatchSet& matches);

/// ANOVA R^2 of v on the match-set factor. Throws when v is constant.
double match_r_squared(const Eigen::VectorXd& v, const MatchSet& matches);

/// Expected match R^2 under random pairing, (n - 1)/(2n - 1).
double bcrd_expected_r_squared(Index n_pairs);

struct CornerMax {
    double value = 0.0;
    /// Staircase corner (0,...,0,2,...,2) attaining the maximum.
    Eigen::VectorXd corner;
    /// Number of leading zeros in `corner`.
    Index zeros = 0;
    /// Quadratic form at each of the 2n+1 corners, indexed by leading zeros.
    std::vector<double> values;
};

/// Maximum of v' Sigma v over the corners of {0 <= v_1 <= ... <= v_2n <= 2}.
/// Ties resolve to the corner with the most leading zeros.
CornerMax corner_max_quadratic_form(const CovarianceMatrix& sigma);

/// Staircase corner with `zeros` leading zeros followed by 2's.
Eigen::VectorXd staircase_corner(Index size, Index zeros);

}  // namespace pairdesign
