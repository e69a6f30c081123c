#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pairdesign/core.hpp"

namespace pairdesign {

/// Exact MSE of the difference-in-means estimator by the law of total
/// variance over the enumerated allocation support.
double brute_force_mse(const ResponseModel& model, const BlockPartition& partition);

/// Expected estimate over the enumerated support minus tau.
double exhaustive_bias(const ResponseModel& model, const BlockPartition& partition);

/// |exhaustive_bias|.
double check_unbiasedness(const ResponseModel& model, const BlockPartition& partition);

/// Worst case found by a check.
struct Witness {
    Eigen::VectorXd v;
    std::vector<std::vector<Index>> blocks;
    double deviation = 0.0;
    std::string note;
};

/// Machine-readable outcome of one check.
struct CheckReport {
    std::string name;
    bool passed = true;
    Index cases = 0;
    Index failures = 0;
    /// Largest deviation seen (meaning depends on the check).
    double worst = 0.0;
    double tolerance = 0.0;
    /// Seed of the check's generator, when it draws random instances.
    std::optional<std::uint64_t> seed;
    Witness witness;
    std::vector<std::pair<std::string, double>> measurements;
    std::string error;
};

/// One term of the per-block chain: the block's share of the block-design
/// quadratic form against the matched pairs that fall inside it.
struct BlockInequality {
    Index first = 0;
    Index size = 0;
    double block_term = 0.0;
    double pm_term = 0.0;
};

struct Theorem1Report {
    double pm = 0.0;
    double block = 0.0;
    bool holds = false;
    /// pm is below block by more than the tolerance.
    bool strict = false;
    /// Some block holds two different values of v.
    bool distinct_values = false;
    std::vector<BlockInequality> chain;
};

/// Compares adjacent-pair matching of sorted v with the block design cutting
/// v into consecutive runs of `block_sizes`. Rejects unsorted v.
Theorem1Report check_theorem1(const Eigen::VectorXd& v, const std::vector<Index>& block_sizes,
                              double tolerance = 1e-12);

/// Theorem 1 over `n_vectors` random sorted v of length n_subjects and every
/// even-block design with fewer than n_subjects/2 blocks: all set partitions
/// when n_subjects <= 8, consecutive runs of the sorted order above that.
CheckReport theorem1_sweep(Index n_subjects, Index n_vectors, std::uint64_t seed);

/// Compositions of `total` into even parts, in lexicographic order.
std::vector<std::vector<Index>> even_compositions(Index total);

/// Design covariance of the uniform mixture over k random balanced
/// allocations and their negations.
CovarianceMatrix random_mixture_covariance(Index n_subjects, Index k, std::uint64_t seed);

/// Corner-max of adjacent pairs against every enumerated block design,
/// `n_mixtures` random mixture designs and `extra`; plus a dense random-v
/// search against the corner bound.
CheckReport check_minimax(Index n_subjects, const std::vector<CovarianceMatrix>& extra,
                          std::uint64_t seed, Index n_mixtures = 100, Index n_random_v = 10'000);

/// Largest entrywise gap between the mean pairwise covariance over all
/// matchings and the BCRD covariance.
CheckReport check_remark1(Index n_subjects);

/// Largest |quadratic_form(c 1, Sigma)| over the supplied designs.
CheckReport check_remark3(const std::vector<CovarianceMatrix>& designs, double constant);

/// Closed-form covariance against the enumerated support for every block
/// partition of n_subjects. `perturb` is added to one off-diagonal entry of
/// the closed form (failure-path test hook).
CheckReport check_sigma_oracle(Index n_subjects, double perturb = 0.0);

/// exact_mse against brute_force_mse on random models and random block
/// partitions. The unbiasedness sweep reports exhaustive bias on the same draws.
CheckReport check_mse_oracle(Index n_subjects, Index n_instances, std::uint64_t seed);
CheckReport check_unbiasedness_sweep(Index n_subjects, Index n_instances, std::uint64_t seed);

/// Sign agreement of mse_gap_bcrd_pm, bcrd_beats_pm, the R^2 threshold and
/// the difference of exact MSEs on random (v, matching) instances. Sizes are
/// drawn from 4..20 unless `n_subjects` is given.
CheckReport check_remark2(Index n_instances, std::uint64_t seed,
                          std::optional<Index> n_subjects = std::nullopt);

/// Blossom matching against exhaustive search, plus invariance under
/// positive rescaling of the distances.
CheckReport check_matching_oracle(Index n_subjects, Index n_instances, std::uint64_t seed);

struct VerifyOptions {
    std::uint64_t seed = 1;
    /// Check names to run; empty runs all.
    std::vector<std::string> only;
    /// Single subject count replacing each check's default sizes.
    std::optional<Index> n_subjects;
    /// Perturbs the closed-form covariance in the sigma check.
    bool inject_wrong_sigma = false;
};

/// Names accepted by VerifyOptions::only.
const std::vector<std::string>& verify_check_names();

/// Runs the selected checks; a check that throws is reported as failed.
std::vector<CheckReport> run_verification(const VerifyOptions& options);

}  // namespace pairdesign
