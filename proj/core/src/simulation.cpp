#include "pairdesign/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "pairdesign/designs.hpp"
#include "pairdesign/matching.hpp"
#include "pairdesign/mse.hpp"

namespace pairdesign {

namespace {

constexpr Index kChunk = 1024;

/// Output rows contributed by each estimator kind.
struct Channel {
    EstimatorKind kind;
    std::string name;
};

std::vector<Channel> channels_for(const std::vector<EstimatorKind>& kinds) {
    std::vector<Channel> out;
    for (auto k : kinds) {
        switch (k) {
            case EstimatorKind::RiskDifference:
                out.push_back({k, "risk_difference"});
                break;
            case EstimatorKind::LogOddsRatio:
                // The two-arm table estimates 2 beta_t under +/-1 coding;
                // both targets are reported.
                out.push_back({k, "log_odds_ratio"});
                out.push_back({k, "log_odds_ratio_vs_beta_t"});
                break;
            case EstimatorKind::Logistic:
                out.push_back({k, "logistic_beta_t"});
                break;
        }
    }
    return out;
}

struct Accumulator {
    double sum_estimate = 0.0;
    double sum_target = 0.0;
    double sum_sq = 0.0;
    double sum_sq2 = 0.0;
    Index used = 0;
    Index excluded = 0;

    void add(double estimate, double target) {
        const double err = estimate - target;
        const double sq = err * err;
        sum_estimate += estimate;
        sum_target += target;
        sum_sq += sq;
        sum_sq2 += sq * sq;
        ++used;
    }
    void merge(const Accumulator& o) {
        sum_estimate += o.sum_estimate;
        sum_target += o.sum_target;
        sum_sq += o.sum_sq;
        sum_sq2 += o.sum_sq2;
        used += o.used;
        excluded += o.excluded;
    }
};

/// What one replicate produced before scoring.
struct Draw {
    const Eigen::MatrixXd* x_ref = nullptr;
    std::optional<TrialOutcome> outcome;
    double tau = 0.0;
};

void score(const std::vector<Channel>& channels, const Draw& draw, double beta_t,
           std::vector<Accumulator>& acc) {
    const TrialOutcome& outcome = *draw.outcome;
    double lor = 0.0;
    bool lor_done = false;
    for (Index c = 0; c < channels.size(); ++c) {
        const auto& ch = channels[c];
        switch (ch.kind) {
            case EstimatorKind::RiskDifference:
                acc[c].add(diff_in_means(outcome), draw.tau);
                break;
            case EstimatorKind::LogOddsRatio:
                if (!lor_done) {
                    lor = log_odds_ratio(outcome);
                    lor_done = true;
                }
                acc[c].add(lor, ch.name == "log_odds_ratio" ? 2.0 * beta_t : beta_t);
                break;
            case EstimatorKind::Logistic:
                try {
                    const auto fit = logistic_fit(*draw.x_ref, outcome);
                    if (fit.ok()) {
                        acc[c].add(fit.beta_t, beta_t);
                    } else {
                        ++acc[c].excluded;
                    }
                } catch (const Error&) {
                    ++acc[c].excluded;
                }
                break;
        }
    }
}

/// Runs `n_sim` replicates in fixed chunks across `threads` workers; each
/// chunk is reduced serially and chunks are merged in index order, so the
/// result does not depend on the thread count.
template <class Replicate>
std::vector<Accumulator> run_chunks(Index n_sim, unsigned threads, Index n_channels,
                                    const Replicate& replicate) {
    const Index n_chunks = (n_sim + kChunk - 1) / kChunk;
    std::vector<std::vector<Accumulator>> partial(n_chunks, std::vector<Accumulator>(n_channels));
    std::atomic<Index> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (true) {
            const Index c = next.fetch_add(1);
            if (c >= n_chunks) return;
            try {
                const Index end = std::min(n_sim, (c + 1) * kChunk);
                for (Index r = c * kChunk; r < end; ++r) replicate(r, partial[c]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n_chunks);
                return;
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<Index>(threads, std::max<Index>(n_chunks, 1)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    std::vector<Accumulator> total(n_channels);
    for (const auto& chunk : partial) {
        for (Index k = 0; k < n_channels; ++k) total[k].merge(chunk[k]);
    }
    return total;
}

SimSummary summarize(const std::string& design, const Channel& ch, const Accumulator& a,
                     Index n_subjects, Index dim) {
    SimSummary s;
    s.design = design;
    s.estimator = ch.name;
    s.n_subjects = n_subjects;
    s.dim = dim;
    s.used = a.used;
    s.excluded = a.excluded;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (a.used == 0) {
        s.target = s.mean_estimate = s.mse = s.mc_se = nan;
        return s;
    }
    const double k = static_cast<double>(a.used);
    s.target = a.sum_target / k;
    s.mean_estimate = a.sum_estimate / k;
    s.mse = a.sum_sq / k;
    if (a.used < 2) {
        s.mc_se = std::numeric_limits<double>::infinity();
    } else {
        const double var = std::max(0.0, (a.sum_sq2 - k * s.mse * s.mse) / (k - 1.0));
        s.mc_se = std::sqrt(var / k);
    }
    return s;
}

void check_config(const SimConfig& config) {
    if (config.n_sim < 1) throw Error("simulation: n_sim must be at least 1");
    if (config.designs.empty()) throw Error("simulation: no designs to compare");
    if (config.estimators.empty()) throw Error("simulation: no estimators requested");
}

}  // namespace

DesignSpec DesignSpec::parse(std::string_view text) {
    if (text == "bcrd") return {DesignKind::Bcrd, 0};
    if (text == "pm") return {DesignKind::PairMatching, 0};
    if (text == "random_pm") return {DesignKind::RandomPairs, 0};
    for (std::string_view prefix : {"block:", "block", "bl"}) {
        if (text.substr(0, prefix.size()) == prefix && text.size() > prefix.size()) {
            const auto digits = text.substr(prefix.size());
            if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
                break;
            }
            const Index b = std::stoul(std::string(digits));
            if (b == 0) break;
            return {DesignKind::Block, b};
        }
    }
    throw Error("unknown design '" + std::string(text) +
                "' (expected bcrd, block:B, pm or random_pm)");
}

std::string DesignSpec::id() const {
    switch (kind) {
        case DesignKind::Bcrd:
            return "bcrd";
        case DesignKind::Block:
            return "block" + std::to_string(blocks);
        case DesignKind::PairMatching:
            return "pm";
        case DesignKind::RandomPairs:
            return "random_pm";
    }
    return "bcrd";
}

MatchMethod parse_match_method(std::string_view text) {
    if (text == "auto") return MatchMethod::Auto;
    if (text == "sorted") return MatchMethod::Sorted;
    if (text == "mahalanobis") return MatchMethod::Mahalanobis;
    throw Error("unknown match method '" + std::string(text) +
                "' (expected auto, sorted or mahalanobis)");
}

EstimatorKind parse_estimator(std::string_view text) {
    if (text == "risk_difference" || text == "rd") return EstimatorKind::RiskDifference;
    if (text == "log_odds_ratio" || text == "lor") return EstimatorKind::LogOddsRatio;
    if (text == "logistic" || text == "logistic_beta_t") return EstimatorKind::Logistic;
    throw Error("unknown estimator '" + std::string(text) +
                "' (expected risk_difference, log_odds_ratio or logistic)");
}

const SimSummary& SimResult::at(std::string_view design, std::string_view estimator) const {
    for (const auto& r : rows) {
        if (r.design == design && r.estimator == estimator) return r;
    }
    throw Error("SimResult: no row for " + std::string(design) + "/" + std::string(estimator));
}

Eigen::VectorXd logistic_quantile_grid(Index n_subjects) {
    if (n_subjects < 2) throw Error("logistic_quantile_grid: need at least two points");
    Eigen::VectorXd x(static_cast<Eigen::Index>(n_subjects));
    const double step = 0.99 / static_cast<double>(n_subjects - 1);
    for (Index i = 0; i < n_subjects; ++i) {
        const double p = i + 1 == n_subjects ? 0.995 : 0.005 + step * static_cast<double>(i);
        x[static_cast<Eigen::Index>(i)] = std::log(p / (1.0 - p));
    }
    return x;
}

std::vector<Index> block_levels_for(Index n_blocks, Index dim) {
    if (n_blocks == 8 && dim == 2) return {4, 2};
    if (n_blocks == 8 && dim >= 3) return {2, 2, 2};
    return {n_blocks};
}

Subjects block_homogeneous_covariates(Index n_subjects, Index dim, Rng& rng) {
    if (dim != 1 && dim != 2 && dim != 5) {
        throw Error("block_homogeneous_covariates: dimension must be 1, 2 or 5, got " +
                    std::to_string(dim));
    }
    if (n_subjects % 8 != 0 || n_subjects < 8) {
        throw Error("block_homogeneous_covariates: subject count must be a positive multiple of 8");
    }
    const auto m = static_cast<Eigen::Index>(n_subjects);
    const Eigen::VectorXd grid = logistic_quantile_grid(n_subjects);
    Eigen::MatrixXd x(m, static_cast<Eigen::Index>(dim));
    x.col(0) = grid;
    const std::vector<Index> levels = block_levels_for(8, dim);

    // cell[i] is subject i's combined level over the covariates placed so far.
    std::vector<Index> cell(n_subjects);
    for (Index i = 0; i < n_subjects; ++i) cell[i] = i * levels[0] / n_subjects;
    Index n_cells = levels[0];

    for (Index k = 1; k < levels.size(); ++k) {
        const Index lk = levels[k];
        std::vector<Index> level(n_subjects);
        // Within every existing cell, hand out the lk levels in equal counts.
        for (Index c = 0; c < n_cells; ++c) {
            std::vector<Index> members;
            for (Index i = 0; i < n_subjects; ++i) {
                if (cell[i] == c) members.push_back(i);
            }
            std::vector<Index> labels(members.size());
            for (Index t = 0; t < members.size(); ++t) labels[t] = t * lk / members.size();
            std::shuffle(labels.begin(), labels.end(), rng);
            for (Index t = 0; t < members.size(); ++t) level[members[t]] = labels[t];
        }
        // Level l receives the l-th run of the sorted grid, in shuffled order.
        const Index run = n_subjects / lk;
        for (Index l = 0; l < lk; ++l) {
            std::vector<double> values(grid.data() + l * run, grid.data() + (l + 1) * run);
            std::shuffle(values.begin(), values.end(), rng);
            Index t = 0;
            for (Index i = 0; i < n_subjects; ++i) {
                if (level[i] == l) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = values[t++];
            }
        }
        for (Index i = 0; i < n_subjects; ++i) cell[i] = cell[i] * lk + level[i];
        n_cells *= lk;
    }
    for (Index k = levels.size(); k < dim; ++k) {
        std::vector<double> values(grid.data(), grid.data() + m);
        std::shuffle(values.begin(), values.end(), rng);
        for (Index i = 0; i < n_subjects; ++i) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = values[i];
        }
    }
    return Subjects(std::move(x));
}

BlockPartition cross_block_partition(const Eigen::MatrixXd& x, const std::vector<Index>& levels) {
    const Index m = static_cast<Index>(x.rows());
    if (levels.empty() || levels.size() > static_cast<Index>(x.cols())) {
        throw Error("cross_block_partition: need between 1 and d blocking covariates");
    }
    std::vector<Index> cell(m, 0);
    Index n_cells = 1;
    for (Index k = 0; k < levels.size(); ++k) {
        if (levels[k] == 0 || levels[k] > m) throw Error("cross_block_partition: bad level count");
        const Eigen::VectorXd col = x.col(static_cast<Eigen::Index>(k));
        const auto order = stable_order(std::span<const double>(col.data(), m));
        for (Index rank = 0; rank < m; ++rank) {
            cell[order[rank]] = cell[order[rank]] * levels[k] + rank * levels[k] / m;
        }
        n_cells *= levels[k];
    }
    std::vector<std::vector<Index>> blocks(n_cells);
    for (Index i = 0; i < m; ++i) blocks[cell[i]].push_back(i);
    std::erase_if(blocks, [](const auto& b) { return b.empty(); });
    return BlockPartition(std::move(blocks), m);
}

MatchSet design_matching(const Eigen::MatrixXd& x, MatchMethod method) {
    if (method == MatchMethod::Auto) {
        method = x.cols() == 1 ? MatchMethod::Sorted : MatchMethod::Mahalanobis;
    }
    if (method == MatchMethod::Sorted) {
        if (x.cols() < 1) throw Error("design_matching: sorted matching needs a covariate");
        const Eigen::VectorXd key = x.col(0);
        return sorted_pair_matching(std::span<const double>(key.data(), static_cast<Index>(key.size())));
    }
    return min_weight_perfect_matching(mahalanobis_distance_matrix(x));
}

BlockPartition design_partition(const DesignSpec& design, const Eigen::MatrixXd& x,
                                const SimConfig& config) {
    const Index m = static_cast<Index>(x.rows());
    switch (design.kind) {
        case DesignKind::Bcrd:
            return bcrd(m);
        case DesignKind::PairMatching:
            return matchset_to_partition(design_matching(x, config.match));
        case DesignKind::Block: {
            if (x.cols() < 1) throw Error("design_partition: block design needs a covariate");
            auto levels = config.block_levels.empty()
                              ? block_levels_for(design.blocks, static_cast<Index>(x.cols()))
                              : config.block_levels;
            const Index product =
                std::accumulate(levels.begin(), levels.end(), Index{1}, std::multiplies<>());
            if (product != design.blocks) {
                throw Error("design_partition: block levels multiply to " + std::to_string(product) +
                            ", not " + std::to_string(design.blocks));
            }
            if (levels.size() > static_cast<Index>(x.cols())) levels = {design.blocks};
            return cross_block_partition(x, levels);
        }
        case DesignKind::RandomPairs:
            throw Error("design_partition: random_pm has no fixed partition");
    }
    throw Error("design_partition: unknown design");
}

std::vector<int> draw_responses(const ResponseModel& model, const Allocation& w, Rng& rng) {
    if (model.size() != w.size()) throw Error("draw_responses: dimension mismatch");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<int> y(w.size());
    for (Index i = 0; i < w.size(); ++i) {
        y[i] = unif(rng) < model.conditional_mean(i, w[i]) ? 1 : 0;
    }
    return y;
}

SimResult run_monte_carlo(const Scenario& scenario, const SimConfig& config) {
    check_config(config);
    const auto channels = channels_for(config.estimators);
    const Index m = scenario.subjects.size();
    const double true_tau = tau(scenario.model);
    SimResult result;
    for (const auto& design : config.designs) {
        const std::uint64_t stream = stream_id(design.id());
        std::optional<BlockPartition> partition;
        if (design.kind != DesignKind::RandomPairs) {
            partition = design_partition(design, scenario.subjects.x(), config);
        }
        auto replicate = [&](Index r, std::vector<Accumulator>& acc) {
            Rng rng(derive_seed(config.seed, stream, r));
            Allocation w = partition ? sample_allocation(*partition, rng)
                                     : sample_allocation(matchset_to_partition(
                                                             sample_random_matching(m, rng)),
                                                         rng);
            Draw draw;
            auto y = draw_responses(scenario.model, w, rng);
            draw.outcome.emplace(std::move(w), std::move(y));
            draw.tau = true_tau;
            draw.x_ref = &scenario.subjects.x();
            score(channels, draw, scenario.beta_t, acc);
        };
        const auto totals = run_chunks(config.n_sim, config.threads, channels.size(), replicate);
        for (Index c = 0; c < channels.size(); ++c) {
            result.rows.push_back(
                summarize(design.id(), channels[c], totals[c], m, scenario.subjects.dim()));
        }
    }
    return result;
}

SimResult parametric_bootstrap(const Subjects& subjects, const LogisticModelSpec& fitted,
                               const SimConfig& config) {
    check_config(config);
    const Index full = subjects.size();
    const Index size = config.subsample == 0 ? full : config.subsample;
    if (size > full) {
        throw Error("parametric_bootstrap: subsample of " + std::to_string(size) +
                    " exceeds the " + std::to_string(full) + " available subjects");
    }
    if (size % 2 != 0 || size < kMinSubjects) {
        throw Error("parametric_bootstrap: subsample size must be even and >= 4");
    }
    const ResponseModel model = response_model(fitted, subjects);
    if (size == full) {
        return run_monte_carlo(Scenario{subjects, model, fitted.beta_t}, config);
    }

    const auto channels = channels_for(config.estimators);
    SimResult result;
    for (const auto& design : config.designs) {
        const std::uint64_t stream = stream_id(design.id());
        auto replicate = [&](Index r, std::vector<Accumulator>& acc) {
            Rng rng(derive_seed(config.seed, stream, r));
            std::vector<Index> rows(full);
            std::iota(rows.begin(), rows.end(), Index{0});
            // Partial Fisher-Yates: the first `size` entries are a uniform
            // sample without replacement.
            for (Index k = 0; k < size; ++k) {
                std::uniform_int_distribution<Index> pick(k, full - 1);
                std::swap(rows[k], rows[pick(rng)]);
            }
            rows.resize(size);
            std::sort(rows.begin(), rows.end());
            const ResponseModel sub_model = model.subset(rows);
            Eigen::MatrixXd sub_x(static_cast<Eigen::Index>(size), subjects.x().cols());
            for (Index k = 0; k < size; ++k) {
                sub_x.row(static_cast<Eigen::Index>(k)) =
                    subjects.x().row(static_cast<Eigen::Index>(rows[k]));
            }
            const BlockPartition partition =
                design.kind == DesignKind::RandomPairs
                    ? matchset_to_partition(sample_random_matching(size, rng))
                    : design_partition(design, sub_x, config);
            Allocation w = sample_allocation(partition, rng);
            Draw draw;
            auto y = draw_responses(sub_model, w, rng);
            draw.outcome.emplace(std::move(w), std::move(y));
            draw.tau = tau(sub_model);
            draw.x_ref = &sub_x;
            score(channels, draw, fitted.beta_t, acc);
        };
        const auto totals = run_chunks(config.n_sim, config.threads, channels.size(), replicate);
        for (Index c = 0; c < channels.size(); ++c) {
            result.rows.push_back(summarize(design.id(), channels[c], totals[c], size, subjects.dim()));
        }
    }
    return result;
}

Scenario synthetic_scenario(Index n_subjects, Index dim, double beta0, double beta1,
                            double beta_t, Link link, std::uint64_t covariate_seed) {
    Rng rng(covariate_seed);
    Subjects subjects = block_homogeneous_covariates(n_subjects, dim, rng);
    LogisticModelSpec spec;
    spec.beta0 = beta0;
    spec.beta = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), beta1);
    spec.beta_t = beta_t;
    spec.link = link;
    ResponseModel model = response_model(spec, subjects);
    return Scenario{std::move(subjects), std::move(model), beta_t};
}

}  // namespace pairdesign
