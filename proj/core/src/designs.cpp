#include "pairdesign/designs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace pairdesign {

namespace {

std::uint64_t binomial(Index n, Index k) {
    std::uint64_t r = 1;
    for (Index i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// All balanced sign patterns of length m, lexicographic in the positions of
/// the +1 entries.
std::vector<std::vector<int>> balanced_patterns(Index m) {
    std::vector<std::vector<int>> out;
    std::vector<bool> chosen(m, false);
    std::fill(chosen.begin(), chosen.begin() + static_cast<std::ptrdiff_t>(m / 2), true);
    do {
        std::vector<int> p(m);
        for (Index i = 0; i < m; ++i) p[i] = chosen[i] ? 1 : -1;
        out.push_back(std::move(p));
    } while (std::prev_permutation(chosen.begin(), chosen.end()));
    return out;
}

void check_key(std::span<const double> key, const char* what) {
    for (double k : key) {
        if (!std::isfinite(k)) throw Error(std::string(what) + ": sort key must be finite");
    }
}

}  // namespace

std::vector<Index> stable_order(std::span<const double> key) {
    std::vector<Index> order(key.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return key[a] < key[b]; });
    return order;
}

BlockPartition bcrd(Index n_subjects) {
    if (n_subjects % 2 != 0 || n_subjects < kMinSubjects) {
        throw AssumptionError("A1", "bcrd: need an even number of subjects >= 4, got " +
                                        std::to_string(n_subjects));
    }
    std::vector<Index> all(n_subjects);
    std::iota(all.begin(), all.end(), Index{0});
    return BlockPartition({std::move(all)}, n_subjects);
}

BlockPartition sorted_block_partition(std::span<const double> sort_key, Index n_blocks) {
    const Index n = sort_key.size();
    if (n_blocks == 0 || n % n_blocks != 0) {
        throw Error("sorted_block_partition: " + std::to_string(n) +
                    " subjects do not divide into " + std::to_string(n_blocks) + " blocks");
    }
    if ((n / n_blocks) % 2 != 0) {
        throw AssumptionError("A1", "sorted_block_partition: block size " +
                                        std::to_string(n / n_blocks) + " is odd");
    }
    return sorted_block_partition_sizes(sort_key, std::vector<Index>(n_blocks, n / n_blocks));
}

BlockPartition sorted_block_partition_sizes(std::span<const double> sort_key,
                                            const std::vector<Index>& sizes) {
    check_key(sort_key, "sorted_block_partition");
    const Index total = std::accumulate(sizes.begin(), sizes.end(), Index{0});
    if (total != sort_key.size()) {
        throw Error("sorted_block_partition: block sizes sum to " + std::to_string(total) +
                    ", expected " + std::to_string(sort_key.size()));
    }
    const auto order = stable_order(sort_key);
    std::vector<std::vector<Index>> blocks;
    Index pos = 0;
    for (Index s : sizes) {
        std::vector<Index> block(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                 order.begin() + static_cast<std::ptrdiff_t>(pos + s));
        std::sort(block.begin(), block.end());
        blocks.push_back(std::move(block));
        pos += s;
    }
    return BlockPartition(std::move(blocks), sort_key.size());
}

MatchSet sorted_pair_matching(std::span<const double> sort_key) {
    check_key(sort_key, "sorted_pair_matching");
    if (sort_key.empty() || sort_key.size() % 2 != 0) {
        throw Error("sorted_pair_matching: need an even, nonzero number of subjects");
    }
    const auto order = stable_order(sort_key);
    std::vector<Pair> pairs;
    for (Index k = 0; k + 1 < order.size(); k += 2) pairs.emplace_back(order[k], order[k + 1]);
    return MatchSet(std::move(pairs));
}

Allocation sample_allocation(const BlockPartition& partition, Rng& rng) {
    std::vector<int> w(partition.n_subjects());
    std::vector<int> signs;
    for (const auto& block : partition.blocks()) {
        const Index m = block.size();
        signs.assign(m, -1);
        std::fill(signs.begin(), signs.begin() + static_cast<std::ptrdiff_t>(m / 2), 1);
        std::shuffle(signs.begin(), signs.end(), rng);
        for (Index k = 0; k < m; ++k) w[block[k]] = signs[k];
    }
    return Allocation(std::move(w));
}

MatchSet sample_random_matching(Index n_subjects, Rng& rng) {
    if (n_subjects == 0 || n_subjects % 2 != 0) {
        throw Error("sample_random_matching: need an even, nonzero number of subjects");
    }
    std::vector<Index> perm(n_subjects);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Pair> pairs;
    for (Index k = 0; k < n_subjects; k += 2) pairs.emplace_back(perm[k], perm[k + 1]);
    return MatchSet(std::move(pairs));
}

CovarianceMatrix covariance_matrix(const BlockPartition& partition) {
    const auto n = static_cast<Eigen::Index>(partition.n_subjects());
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(n, n);
    for (const auto& block : partition.blocks()) {
        const double off = -1.0 / (static_cast<double>(block.size()) - 1.0);
        for (Index a : block) {
            for (Index b : block) {
                sigma(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    a == b ? 1.0 : off;
            }
        }
    }
    return CovarianceMatrix(std::move(sigma));
}

std::uint64_t support_size(const BlockPartition& partition) {
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t total = 1;
    for (const auto& block : partition.blocks()) {
        // C(n, n/2) overflows 64 bits past n = 66.
        if (block.size() > 66) return kMax;
        const auto c = binomial(block.size(), block.size() / 2);
        if (total > kMax / c) return kMax;
        total *= c;
    }
    return total;
}

std::vector<Allocation> enumerate_support(const BlockPartition& partition, std::uint64_t cap) {
    const auto count = support_size(partition);
    if (count > cap) {
        throw Error("enumerate_support: support has " + std::to_string(count) +
                    " allocations, above the cap of " + std::to_string(cap));
    }
    std::vector<std::vector<std::vector<int>>> per_block;
    for (const auto& block : partition.blocks()) per_block.push_back(balanced_patterns(block.size()));

    std::vector<Allocation> out;
    out.reserve(count);
    std::vector<Index> digit(per_block.size(), 0);
    std::vector<int> w(partition.n_subjects());
    while (true) {
        for (Index b = 0; b < per_block.size(); ++b) {
            const auto& block = partition.blocks()[b];
            const auto& pattern = per_block[b][digit[b]];
            for (Index k = 0; k < block.size(); ++k) w[block[k]] = pattern[k];
        }
        out.emplace_back(w);
        // odometer, last block fastest
        Index b = per_block.size();
        while (b > 0) {
            --b;
            if (++digit[b] < per_block[b].size()) break;
            digit[b] = 0;
            if (b == 0) return out;
        }
        if (per_block.empty()) return out;
    }
}

CovarianceMatrix empirical_covariance(std::span<const Allocation> allocations) {
    if (allocations.empty()) throw Error("empirical_covariance: no allocations");
    const auto n = static_cast<Eigen::Index>(allocations.front().size());
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    for (const auto& a : allocations) {
        if (static_cast<Eigen::Index>(a.size()) != n) {
            throw Error("empirical_covariance: allocations have different lengths");
        }
        const Eigen::VectorXd w = a.as_vector();
        second.selfadjointView<Eigen::Lower>().rankUpdate(w);
        mean += w;
    }
    const double m = static_cast<double>(allocations.size());
    second = second.selfadjointView<Eigen::Lower>();
    second /= m;
    mean /= m;
    return CovarianceMatrix(second - mean * mean.transpose());
}

std::vector<MatchSet> enumerate_matchings(Index n_subjects) {
    if (n_subjects == 0 || n_subjects % 2 != 0) {
        throw Error("enumerate_matchings: need an even, nonzero number of subjects");
    }
    std::vector<MatchSet> out;
    std::vector<Pair> current;
    std::vector<bool> used(n_subjects, false);
    auto recurse = [&](auto&& self) -> void {
        Index first = 0;
        while (first < n_subjects && used[first]) ++first;
        if (first == n_subjects) {
            out.emplace_back(current);
            return;
        }
        used[first] = true;
        for (Index j = first + 1; j < n_subjects; ++j) {
            if (used[j]) continue;
            used[j] = true;
            current.emplace_back(first, j);
            self(self);
            current.pop_back();
            used[j] = false;
        }
        used[first] = false;
    };
    recurse(recurse);
    return out;
}

std::vector<BlockPartition> enumerate_block_partitions(Index n_subjects) {
    if (n_subjects % 2 != 0 || n_subjects < kMinSubjects) {
        throw Error("enumerate_block_partitions: need an even number of subjects >= 4");
    }
    std::vector<BlockPartition> out;
    std::vector<std::vector<Index>> blocks;
    std::vector<bool> used(n_subjects, false);

    // Each block is grown from the smallest unused index by adding an odd
    // number of larger unused indices.
    auto recurse = [&](auto&& self) -> void {
        Index first = 0;
        while (first < n_subjects && used[first]) ++first;
        if (first == n_subjects) {
            out.emplace_back(blocks, n_subjects);
            return;
        }
        std::vector<Index> rest;
        for (Index j = first + 1; j < n_subjects; ++j) {
            if (!used[j]) rest.push_back(j);
        }
        const Index r = rest.size();
        for (Index extra = 1; extra <= r; extra += 2) {
            std::vector<bool> pick(r, false);
            std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(extra), true);
            do {
                std::vector<Index> block{first};
                for (Index k = 0; k < r; ++k) {
                    if (pick[k]) block.push_back(rest[k]);
                }
                for (Index i : block) used[i] = true;
                blocks.push_back(block);
                self(self);
                blocks.pop_back();
                for (Index i : block) used[i] = false;
            } while (std::prev_permutation(pick.begin(), pick.end()));
        }
    };
    recurse(recurse);
    return out;
}

}  // namespace pairdesign
