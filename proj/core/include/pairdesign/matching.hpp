#pragma once

#include "pairdesign/core.hpp"

namespace pairdesign {

/// Sample covariance of the rows of `x` with the 1/(m - 1) normalizer.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x);

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix; eigenvalues at or
/// below `rel_cutoff` times the largest are treated as zero.
Eigen::MatrixXd pseudo_inverse_psd(const Eigen::MatrixXd& s, double rel_cutoff = 1e-10);

/// D_ij = (x_i - x_j)' S^+ (x_i - x_j) with S the sample covariance of the rows.
/// Throws when x has no columns.
Eigen::MatrixXd mahalanobis_distance_matrix(const Eigen::MatrixXd& x);
Eigen::MatrixXd mahalanobis_distance_matrix(const Subjects& subjects);

/// Sum of D over the matched pairs.
double matching_weight(const Eigen::MatrixXd& distances, const MatchSet& matches);

/// Exact minimum-weight perfect matching on the complete graph over the rows
/// of the symmetric matrix `distances` (upper triangle is read). Among optimal
/// matchings the lexicographically smallest sorted pair list is returned.
///
/// Distances are quantized to 2^-40 of their range before solving, so
/// matchings whose totals differ by less than that are treated as ties.
MatchSet min_weight_perfect_matching(const Eigen::MatrixXd& distances);

struct MatchingStats {
    /// Blossom solves performed, including the tie-breaking pass.
    int solves = 0;
    /// The dual certificate of the first solve checked out.
    bool certified = false;
};

MatchSet min_weight_perfect_matching(const Eigen::MatrixXd& distances, MatchingStats& stats);

inline constexpr Index kBruteForceMatchingCap = 12;

/// Exhaustive search over all (2n-1)!! perfect matchings; totals within a
/// relative 1e-9 of the minimum count as ties, resolved lexicographically.
MatchSet brute_force_matching(const Eigen::MatrixXd& distances);

/// Greedy baseline: repeatedly pairs the closest unmatched subjects. Not
/// optimal in general.
MatchSet greedy_matching(const Eigen::MatrixXd& distances);

/// One block per matched pair.
BlockPartition matchset_to_partition(const MatchSet& matches);

}  // namespace pairdesign
