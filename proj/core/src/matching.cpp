#include "pairdesign/matching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "blossom.hpp"

namespace pairdesign {

namespace {

using detail::BlossomMatcher;
using detail::WeightedEdge;

constexpr double kQuantum = 1099511627776.0;  // 2^40

void check_distance_matrix(const Eigen::MatrixXd& d, const char* what) {
    if (d.rows() != d.cols()) throw Error(std::string(what) + ": distance matrix is not square");
    if (d.rows() == 0 || d.rows() % 2 != 0) {
        throw Error(std::string(what) + ": need an even, nonzero number of subjects, got " +
                    std::to_string(d.rows()));
    }
    if (!d.allFinite()) throw Error(std::string(what) + ": distance matrix has non-finite entries");
}

double entry(const Eigen::MatrixXd& d, Index i, Index j) {
    if (i > j) std::swap(i, j);
    return d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

/// Integer edge costs on the upper triangle, scaled to [0, 2^40].
std::vector<std::vector<std::int64_t>> quantize(const Eigen::MatrixXd& d) {
    const Index n = static_cast<Index>(d.rows());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            lo = std::min(lo, entry(d, i, j));
            hi = std::max(hi, entry(d, i, j));
        }
    }
    std::vector<std::vector<std::int64_t>> q(n, std::vector<std::int64_t>(n, 0));
    const double range = hi - lo;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            const double scaled = range > 0.0 ? (entry(d, i, j) - lo) / range * kQuantum : 0.0;
            q[i][j] = q[j][i] = std::llround(scaled);
        }
    }
    return q;
}

struct SubSolution {
    std::vector<Index> mate;  // indexed by global vertex; only members of the subset are set
    std::int64_t cost = 0;
};

/// Minimum-cost perfect matching restricted to `vertices` (sorted, even count).
SubSolution solve_subset(const std::vector<std::vector<std::int64_t>>& cost,
                         const std::vector<Index>& vertices, int& solves,
                         std::vector<std::int64_t>* slack_out = nullptr,
                         bool* certified = nullptr) {
    SubSolution out;
    out.mate.assign(cost.size(), 0);
    const int m = static_cast<int>(vertices.size());
    if (m == 0) return out;
    const std::int64_t top = static_cast<std::int64_t>(kQuantum) + 1;
    std::vector<WeightedEdge> edges;
    edges.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(m - 1) / 2);
    for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) {
            edges.push_back({a, b, top - cost[vertices[a]][vertices[b]]});
        }
    }
    ++solves;
    BlossomMatcher matcher(m, std::move(edges), /*max_cardinality=*/true);
    const auto& mate = matcher.mate();
    for (int a = 0; a < m; ++a) {
        if (mate[a] < 0) throw Error("min_weight_perfect_matching: solver left a vertex unmatched");
        out.mate[vertices[a]] = vertices[static_cast<Index>(mate[a])];
        if (a < mate[a]) out.cost += cost[vertices[a]][vertices[static_cast<Index>(mate[a])]];
    }
    if (slack_out != nullptr) {
        slack_out->assign(matcher.edges().size(), 0);
        for (int k = 0; k < static_cast<int>(matcher.edges().size()); ++k) {
            (*slack_out)[static_cast<Index>(k)] = matcher.slack_with_blossoms(k);
        }
    }
    if (certified != nullptr) *certified = matcher.verify_optimum();
    return out;
}

MatchSet to_match_set(const std::vector<Index>& mate) {
    std::vector<Pair> pairs;
    for (Index i = 0; i < mate.size(); ++i) {
        if (i < mate[i]) pairs.emplace_back(i, mate[i]);
    }
    return MatchSet(std::move(pairs));
}

}  // namespace

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x) {
    if (x.rows() < 2) throw Error("sample_covariance: need at least two rows");
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    return centered.transpose() * centered / static_cast<double>(x.rows() - 1);
}

Eigen::MatrixXd pseudo_inverse_psd(const Eigen::MatrixXd& s, double rel_cutoff) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    if (eig.info() != Eigen::Success) throw Error("pseudo_inverse_psd: eigendecomposition failed");
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double largest = lambda.size() > 0 ? lambda.maxCoeff() : 0.0;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        if (largest > 0.0 && lambda[k] > rel_cutoff * largest) inv[k] = 1.0 / lambda[k];
    }
    return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::MatrixXd mahalanobis_distance_matrix(const Eigen::MatrixXd& x) {
    if (x.cols() == 0) throw Error("mahalanobis_distance_matrix: no covariates to match on");
    if (!x.allFinite()) throw Error("mahalanobis_distance_matrix: covariates must be finite");
    const Eigen::MatrixXd s = sample_covariance(x);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    if (eig.info() != Eigen::Success) {
        throw Error("mahalanobis_distance_matrix: eigendecomposition failed");
    }
    // S^+ = L L' with L = V diag(1/sqrt(lambda)) on the retained eigenvalues,
    // so D_ij is a squared Euclidean distance between rows of X L.
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double largest = lambda.maxCoeff();
    Eigen::VectorXd scale = Eigen::VectorXd::Zero(lambda.size());
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        if (largest > 0.0 && lambda[k] > 1e-10 * largest) scale[k] = 1.0 / std::sqrt(lambda[k]);
    }
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    const Eigen::MatrixXd y = centered * eig.eigenvectors() * scale.asDiagonal();
    const Eigen::Index m = x.rows();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i + 1; j < m; ++j) {
            d(i, j) = d(j, i) = (y.row(i) - y.row(j)).squaredNorm();
        }
    }
    return d;
}

Eigen::MatrixXd mahalanobis_distance_matrix(const Subjects& subjects) {
    return mahalanobis_distance_matrix(subjects.x());
}

double matching_weight(const Eigen::MatrixXd& distances, const MatchSet& matches) {
    if (static_cast<Index>(distances.rows()) != matches.n_subjects()) {
        throw Error("matching_weight: dimension mismatch");
    }
    double total = 0.0;
    for (auto [a, b] : matches.pairs()) total += entry(distances, a, b);
    return total;
}

MatchSet min_weight_perfect_matching(const Eigen::MatrixXd& distances) {
    MatchingStats stats;
    return min_weight_perfect_matching(distances, stats);
}

MatchSet min_weight_perfect_matching(const Eigen::MatrixXd& distances, MatchingStats& stats) {
    check_distance_matrix(distances, "min_weight_perfect_matching");
    const Index n = static_cast<Index>(distances.rows());
    const auto cost = quantize(distances);

    std::vector<Index> all(n);
    for (Index i = 0; i < n; ++i) all[i] = i;
    std::vector<std::int64_t> slack;
    SubSolution current = solve_subset(cost, all, stats.solves, &slack, &stats.certified);

    // Rounding to integers can separate matchings whose real costs tie by up
    // to half a unit per pair, so ties are judged within n/2 units.
    const std::int64_t tie = static_cast<std::int64_t>(n / 2);
    const std::int64_t optimum = current.cost;

    // A matching within `tie` of the optimum only uses edges whose reduced
    // cost under the first solve's duals is at most `tie` (slack is twice the
    // reduced cost), so only those can displace a partner.
    auto edge_index = [n](Index a, Index b) {
        if (a > b) std::swap(a, b);
        return a * (2 * n - a - 1) / 2 + (b - a - 1);
    };
    auto candidate = [&](Index a, Index b) { return slack[edge_index(a, b)] <= 2 * tie; };

    std::vector<bool> fixed(n, false);
    std::int64_t fixed_cost = 0;
    std::vector<Index> final_mate(n);
    for (Index i = 0; i < n; ++i) {
        if (fixed[i]) continue;
        for (Index j = i + 1; j < current.mate[i]; ++j) {
            if (fixed[j] || !candidate(i, j)) continue;
            std::vector<Index> rest;
            for (Index k = 0; k < n; ++k) {
                if (!fixed[k] && k != i && k != j) rest.push_back(k);
            }
            SubSolution alt = solve_subset(cost, rest, stats.solves);
            if (fixed_cost + cost[i][j] + alt.cost <= optimum + tie) {
                for (Index k : rest) current.mate[k] = alt.mate[k];
                current.mate[i] = j;
                current.mate[j] = i;
                break;
            }
        }
        const Index partner = current.mate[i];
        fixed[i] = fixed[partner] = true;
        final_mate[i] = partner;
        final_mate[partner] = i;
        fixed_cost += cost[i][partner];
    }
    return to_match_set(final_mate);
}

MatchSet brute_force_matching(const Eigen::MatrixXd& distances) {
    check_distance_matrix(distances, "brute_force_matching");
    const Index n = static_cast<Index>(distances.rows());
    if (n > kBruteForceMatchingCap) {
        throw Error("brute_force_matching: " + std::to_string(n) + " subjects exceed the cap of " +
                    std::to_string(kBruteForceMatchingCap));
    }
    // Depth-first in lexicographic order of the sorted pair list.
    std::vector<std::pair<double, std::vector<Index>>> all;
    std::vector<Index> mate(n, n);
    auto recurse = [&](auto&& self, double total) -> void {
        Index first = 0;
        while (first < n && mate[first] != n) ++first;
        if (first == n) {
            all.emplace_back(total, mate);
            return;
        }
        for (Index j = first + 1; j < n; ++j) {
            if (mate[j] != n) continue;
            mate[first] = j;
            mate[j] = first;
            self(self, total + entry(distances, first, j));
            mate[first] = mate[j] = n;
        }
    };
    recurse(recurse, 0.0);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [total, m] : all) best = std::min(best, total);
    const double tol = 1e-9 * std::max(1.0, std::abs(best));
    for (const auto& [total, m] : all) {
        if (total <= best + tol) return to_match_set(m);
    }
    throw Error("brute_force_matching: no matching found");
}

MatchSet greedy_matching(const Eigen::MatrixXd& distances) {
    check_distance_matrix(distances, "greedy_matching");
    const Index n = static_cast<Index>(distances.rows());
    std::vector<std::pair<double, Pair>> candidates;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) candidates.push_back({entry(distances, i, j), {i, j}});
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<bool> used(n, false);
    std::vector<Pair> pairs;
    for (const auto& [d, p] : candidates) {
        if (used[p.first] || used[p.second]) continue;
        used[p.first] = used[p.second] = true;
        pairs.push_back(p);
    }
    return MatchSet(std::move(pairs));
}

BlockPartition matchset_to_partition(const MatchSet& matches) {
    std::vector<std::vector<Index>> blocks;
    blocks.reserve(matches.pairs().size());
    for (auto [a, b] : matches.pairs()) blocks.push_back({a, b});
    return BlockPartition(std::move(blocks), matches.n_subjects());
}

}  // namespace pairdesign
