#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pairdesign/core.hpp"
#include "pairdesign/random.hpp"

namespace pairdesign {

/// Balanced complete randomization: one block holding every subject.
BlockPartition bcrd(Index n_subjects);

/// Consecutive runs of the stable sort order of `sort_key`, B equal blocks.
BlockPartition sorted_block_partition(std::span<const double> sort_key, Index n_blocks);

/// Consecutive runs of the stable sort order with the given (even) sizes.
BlockPartition sorted_block_partition_sizes(std::span<const double> sort_key,
                                            const std::vector<Index>& sizes);

/// Adjacent pairs of the stable sort order of `sort_key`.
MatchSet sorted_pair_matching(std::span<const double> sort_key);

/// Stable ascending order of `key` (ties by index).
std::vector<Index> stable_order(std::span<const double> key);

/// Uniform draw from the design: each block gets a uniformly shuffled
/// half-and-half sign multiset, blocks independently.
Allocation sample_allocation(const BlockPartition& partition, Rng& rng);

/// Uniformly random perfect matching of n_subjects indices.
MatchSet sample_random_matching(Index n_subjects, Rng& rng);

/// Closed-form design covariance: block diagonal, 1 on the diagonal and
/// -1/(n_b - 1) off the diagonal inside block b.
CovarianceMatrix covariance_matrix(const BlockPartition& partition);

inline constexpr std::uint64_t kDefaultSupportCap = 1'000'000;

/// Number of allocations in the support, prod_b C(n_b, n_b/2). Saturates at
/// UINT64_MAX.
std::uint64_t support_size(const BlockPartition& partition);

/// Every allocation in the support exactly once. Throws when the support is
/// larger than `cap`.
std::vector<Allocation> enumerate_support(const BlockPartition& partition,
                                          std::uint64_t cap = kDefaultSupportCap);

/// (1/m) sum w w' minus the outer product of the mean allocation.
CovarianceMatrix empirical_covariance(std::span<const Allocation> allocations);

/// All perfect matchings of n_subjects indices, (2n-1)!! of them.
std::vector<MatchSet> enumerate_matchings(Index n_subjects);

/// All set partitions of {0..n_subjects-1} into blocks of even size.
std::vector<BlockPartition> enumerate_block_partitions(Index n_subjects);

}  // namespace pairdesign
