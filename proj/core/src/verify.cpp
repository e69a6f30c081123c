#include "pairdesign/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pairdesign/designs.hpp"
#include "pairdesign/matching.hpp"
#include "pairdesign/mse.hpp"
#include "pairdesign/random.hpp"

namespace pairdesign {

namespace {

constexpr double kOracleTolerance = 1e-12;
constexpr double kBiasTolerance = 1e-14;
constexpr double kStatedCornerConstant = 2.0;

Eigen::VectorXd uniform_vector(Index size, double lo, double hi, Rng& rng) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::VectorXd v(static_cast<Eigen::Index>(size));
    for (auto& x : v) x = u(rng);
    return v;
}

Eigen::VectorXd sorted_uniform_vector(Index size, double lo, double hi, Rng& rng) {
    Eigen::VectorXd v = uniform_vector(size, lo, hi, rng);
    std::sort(v.begin(), v.end());
    return v;
}

ResponseModel random_model(Index size, Rng& rng) {
    return ResponseModel(uniform_vector(size, 0.0, 1.0, rng), uniform_vector(size, 0.0, 1.0, rng));
}

/// Records a case; the witness keeps the largest deviation.
void record(CheckReport& report, double deviation, bool failed, const Eigen::VectorXd& v,
            const std::vector<std::vector<Index>>& blocks, std::string note = {}) {
    ++report.cases;
    if (failed) ++report.failures;
    if (report.cases == 1 || deviation > report.worst) {
        report.worst = deviation;
        report.witness = Witness{v, blocks, deviation, std::move(note)};
    }
}

void finish(CheckReport& report) { report.passed = report.failures == 0 && report.error.empty(); }

std::vector<std::vector<Index>> consecutive_blocks(const std::vector<Index>& sizes) {
    std::vector<std::vector<Index>> blocks;
    Index start = 0;
    for (Index s : sizes) {
        std::vector<Index> b(s);
        for (Index k = 0; k < s; ++k) b[k] = start + k;
        blocks.push_back(std::move(b));
        start += s;
    }
    return blocks;
}

MatchSet adjacent_pairs(Index n_subjects) {
    std::vector<Pair> pairs;
    for (Index i = 0; i + 1 < n_subjects; i += 2) pairs.emplace_back(i, i + 1);
    return MatchSet(std::move(pairs));
}

std::vector<std::vector<Index>> pair_blocks(const MatchSet& m) {
    std::vector<std::vector<Index>> out;
    for (auto [a, b] : m.pairs()) out.push_back({a, b});
    return out;
}

double sum_sq_diffs(const Eigen::VectorXd& v, const std::vector<Index>& members) {
    double s = 0.0;
    for (Index a = 0; a < members.size(); ++a) {
        for (Index b = a + 1; b < members.size(); ++b) {
            const double d = v[static_cast<Eigen::Index>(members[a])] -
                             v[static_cast<Eigen::Index>(members[b])];
            s += d * d;
        }
    }
    return s;
}

bool has_distinct_values(const Eigen::VectorXd& v, const std::vector<std::vector<Index>>& blocks) {
    for (const auto& b : blocks) {
        for (Index k = 1; k < b.size(); ++k) {
            if (v[static_cast<Eigen::Index>(b[k])] != v[static_cast<Eigen::Index>(b[0])]) return true;
        }
    }
    return false;
}

}  // namespace

double brute_force_mse(const ResponseModel& model, const BlockPartition& partition) {
    if (model.size() != partition.n_subjects()) throw Error("brute_force_mse: dimension mismatch");
    const auto support = enumerate_support(partition);
    const Index m = model.size();
    const long double n = static_cast<long double>(m) / 2.0L;
    long double tau_sum = 0.0L;
    for (Index i = 0; i < m; ++i) tau_sum += static_cast<long double>(model.p_t()[static_cast<Eigen::Index>(i)]) -
                                            model.p_c()[static_cast<Eigen::Index>(i)];
    const long double t = tau_sum / static_cast<long double>(m);
    long double within = 0.0L;
    long double between = 0.0L;
    for (const auto& w : support) {
        long double mean = 0.0L;
        long double var = 0.0L;
        for (Index i = 0; i < m; ++i) {
            const long double pi = model.conditional_mean(i, w[i]);
            mean += w[i] * pi;
            var += pi * (1.0L - pi);
        }
        mean /= n;
        var /= n * n;
        within += var;
        between += (mean - t) * (mean - t);
    }
    const auto k = static_cast<long double>(support.size());
    return static_cast<double>(within / k + between / k);
}

double exhaustive_bias(const ResponseModel& model, const BlockPartition& partition) {
    if (model.size() != partition.n_subjects()) throw Error("exhaustive_bias: dimension mismatch");
    const auto support = enumerate_support(partition);
    const Index m = model.size();
    const long double n = static_cast<long double>(m) / 2.0L;
    long double total = 0.0L;
    for (const auto& w : support) {
        long double s = 0.0L;
        for (Index i = 0; i < m; ++i) s += w[i] * static_cast<long double>(model.conditional_mean(i, w[i]));
        total += s / n;
    }
    long double tau_sum = 0.0L;
    for (Index i = 0; i < m; ++i) tau_sum += static_cast<long double>(model.p_t()[static_cast<Eigen::Index>(i)]) -
                                            model.p_c()[static_cast<Eigen::Index>(i)];
    return static_cast<double>(total / static_cast<long double>(support.size()) -
                               tau_sum / static_cast<long double>(m));
}

double check_unbiasedness(const ResponseModel& model, const BlockPartition& partition) {
    return std::abs(exhaustive_bias(model, partition));
}

Theorem1Report check_theorem1(const Eigen::VectorXd& v, const std::vector<Index>& block_sizes,
                              double tolerance) {
    const Index m = static_cast<Index>(v.size());
    if (!std::is_sorted(v.begin(), v.end())) throw Error("check_theorem1: v must be sorted ascending");
    const BlockPartition partition(consecutive_blocks(block_sizes), m);
    const MatchSet pm = adjacent_pairs(m);

    Theorem1Report r;
    r.pm = pm_quadratic_form(v, pm);
    r.block = block_quadratic_form(v, partition);
    r.holds = r.pm <= r.block + tolerance;
    r.strict = r.block - r.pm > tolerance;
    r.distinct_values = has_distinct_values(v, partition.blocks());
    Index start = 0;
    for (Index s : block_sizes) {
        BlockInequality link;
        link.first = start;
        link.size = s;
        link.block_term = sum_sq_diffs(v, partition.blocks()[r.chain.size()]) / static_cast<double>(s - 1);
        for (Index i = start; i < start + s; i += 2) {
            const double d = v[static_cast<Eigen::Index>(i + 1)] - v[static_cast<Eigen::Index>(i)];
            link.pm_term += d * d;
        }
        r.chain.push_back(link);
        start += s;
    }
    return r;
}

std::vector<std::vector<Index>> even_compositions(Index total) {
    std::vector<std::vector<Index>> out;
    std::vector<Index> current;
    auto recurse = [&](auto&& self, Index left) -> void {
        if (left == 0) {
            out.push_back(current);
            return;
        }
        for (Index part = 2; part <= left; part += 2) {
            current.push_back(part);
            self(self, left - part);
            current.pop_back();
        }
    };
    if (total % 2 == 0) recurse(recurse, total);
    return out;
}

CheckReport theorem1_sweep(Index n_subjects, Index n_vectors, std::uint64_t seed) {
    CheckReport report;
    report.name = "theorem1";
    report.tolerance = kOracleTolerance;
    report.seed = seed;
    const Index n_pairs = n_subjects / 2;

    std::vector<BlockPartition> designs;
    if (n_subjects <= 8) {
        for (auto& p : enumerate_block_partitions(n_subjects)) {
            if (p.n_blocks() < n_pairs) designs.push_back(std::move(p));
        }
    } else {
        for (const auto& sizes : even_compositions(n_subjects)) {
            if (sizes.size() < n_pairs) designs.emplace_back(consecutive_blocks(sizes), n_subjects);
        }
    }
    const MatchSet pm = adjacent_pairs(n_subjects);
    Rng rng(seed);
    Index violations = 0;
    Index not_strict = 0;
    for (Index k = 0; k < n_vectors; ++k) {
        const Eigen::VectorXd v = sorted_uniform_vector(n_subjects, 0.0, 2.0, rng);
        const double pm_value = pm_quadratic_form(v, pm);
        for (const auto& design : designs) {
            const double block_value = block_quadratic_form(v, design);
            const bool violated = pm_value > block_value + kOracleTolerance;
            const bool weak = has_distinct_values(v, design.blocks()) &&
                              !(block_value - pm_value > kOracleTolerance);
            violations += violated ? 1 : 0;
            not_strict += weak ? 1 : 0;
            record(report, pm_value - block_value, violated || weak, v, design.blocks(),
                   "pm minus block quadratic form");
        }
    }
    report.measurements = {{"designs", static_cast<double>(designs.size())},
                           {"violations", static_cast<double>(violations)},
                           {"not_strict", static_cast<double>(not_strict)}};
    finish(report);
    return report;
}

CovarianceMatrix random_mixture_covariance(Index n_subjects, Index k, std::uint64_t seed) {
    if (k == 0) throw Error("random_mixture_covariance: need at least one allocation");
    Rng rng(seed);
    const BlockPartition whole = bcrd(n_subjects);
    const auto m = static_cast<Eigen::Index>(n_subjects);
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(m, m);
    for (Index j = 0; j < k; ++j) {
        const Eigen::VectorXd w = sample_allocation(whole, rng).as_vector();
        // w and -w contribute the same outer product; the pair's mean is 0.
        sigma.noalias() += w * w.transpose();
    }
    return CovarianceMatrix(sigma / static_cast<double>(k));
}

CheckReport check_minimax(Index n_subjects, const std::vector<CovarianceMatrix>& extra,
                          std::uint64_t seed, Index n_mixtures, Index n_random_v) {
    CheckReport report;
    report.name = "minimax";
    report.tolerance = kOracleTolerance;
    report.seed = seed;

    const MatchSet pm = adjacent_pairs(n_subjects);
    const CovarianceMatrix sigma_pm = covariance_matrix(matchset_to_partition(pm));
    const CornerMax pm_max = corner_max_quadratic_form(sigma_pm);
    const Eigen::VectorXd pm_corner = pm_max.corner;

    double competitor_min = std::numeric_limits<double>::infinity();
    auto compare = [&](const CovarianceMatrix& sigma, const std::vector<std::vector<Index>>& blocks,
                       const std::string& label) {
        const double other = corner_max_quadratic_form(sigma).value;
        competitor_min = std::min(competitor_min, other);
        record(report, pm_max.value - other, pm_max.value > other + kOracleTolerance, pm_corner,
               blocks, label);
    };
    for (const auto& p : enumerate_block_partitions(n_subjects)) {
        compare(covariance_matrix(p), p.blocks(), "block design");
    }
    Rng rng(seed);
    std::uniform_int_distribution<Index> pick_k(1, 2 * n_subjects);
    for (Index j = 0; j < n_mixtures; ++j) {
        const Index k = pick_k(rng);
        compare(random_mixture_covariance(n_subjects, k, rng()), {},
                "mixture of " + std::to_string(k) + " allocations");
    }
    for (const auto& sigma : extra) compare(sigma, {}, "supplied design");

    // Convexity: no point of V exceeds the corner maximum.
    const CovarianceMatrix sigma_bcrd = covariance_matrix(bcrd(n_subjects));
    const double bcrd_max = corner_max_quadratic_form(sigma_bcrd).value;
    double random_v_max_ratio = 0.0;
    for (Index j = 0; j < n_random_v; ++j) {
        const Eigen::VectorXd v = sorted_uniform_vector(n_subjects, 0.0, 2.0, rng);
        const double q_pm = quadratic_form(v, sigma_pm);
        const double q_bcrd = quadratic_form(v, sigma_bcrd);
        random_v_max_ratio = std::max(random_v_max_ratio, q_pm / pm_max.value);
        const bool exceeded = q_pm > pm_max.value + kOracleTolerance ||
                              q_bcrd > bcrd_max + kOracleTolerance;
        if (exceeded) record(report, q_pm - pm_max.value, true, v, pair_blocks(pm), "random v above corner max");
    }

    report.measurements = {{"pm_corner_max", pm_max.value},
                           {"pm_corner_zeros", static_cast<double>(pm_max.zeros)},
                           {"stated_constant", kStatedCornerConstant},
                           {"min_competitor_corner_max", competitor_min},
                           {"bcrd_corner_max", bcrd_max},
                           {"random_v_max_fraction_of_pm_max", random_v_max_ratio}};
    finish(report);
    return report;
}

CheckReport check_remark1(Index n_subjects) {
    CheckReport report;
    report.name = "remark1";
    report.tolerance = kOracleTolerance;
    const auto matchings = enumerate_matchings(n_subjects);
    const auto m = static_cast<Eigen::Index>(n_subjects);
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(m, m);
    for (const auto& match : matchings) mean += covariance_matrix(matchset_to_partition(match)).matrix();
    mean /= static_cast<double>(matchings.size());
    const Eigen::MatrixXd gap = (mean - covariance_matrix(bcrd(n_subjects)).matrix()).cwiseAbs();
    Eigen::Index i = 0;
    Eigen::Index j = 0;
    const double worst = gap.maxCoeff(&i, &j);
    std::ostringstream note;
    note << "entry (" << i << "," << j << ")";
    record(report, worst, worst > kOracleTolerance, Eigen::VectorXd(), {}, note.str());
    report.measurements = {{"matchings", static_cast<double>(matchings.size())},
                           {"mean_off_diagonal", m > 1 ? mean(0, 1) : 0.0}};
    finish(report);
    return report;
}

CheckReport check_remark3(const std::vector<CovarianceMatrix>& designs, double constant) {
    CheckReport report;
    report.name = "remark3";
    report.tolerance = kOracleTolerance;
    for (const auto& sigma : designs) {
        const Eigen::VectorXd v = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(sigma.size()), constant);
        const double q = std::abs(quadratic_form(v, sigma));
        record(report, q, q > kOracleTolerance, v, {});
    }
    report.measurements = {{"constant", constant}};
    finish(report);
    return report;
}

CheckReport check_sigma_oracle(Index n_subjects, double perturb) {
    CheckReport report;
    report.name = "sigma";
    report.tolerance = kOracleTolerance;
    for (const auto& p : enumerate_block_partitions(n_subjects)) {
        Eigen::MatrixXd closed = covariance_matrix(p).matrix();
        if (perturb != 0.0) {
            closed(0, 1) += perturb;
            closed(1, 0) += perturb;
        }
        const auto support = enumerate_support(p);
        const Eigen::MatrixXd empirical = empirical_covariance(support).matrix();
        const double dev = (closed - empirical).cwiseAbs().maxCoeff();
        record(report, dev, dev > kOracleTolerance, Eigen::VectorXd(), p.blocks());
    }
    finish(report);
    return report;
}

CheckReport check_mse_oracle(Index n_subjects, Index n_instances, std::uint64_t seed) {
    CheckReport report;
    report.name = "eq4";
    report.tolerance = kOracleTolerance;
    report.seed = seed;
    const auto partitions = enumerate_block_partitions(n_subjects);
    Rng rng(seed);
    std::uniform_int_distribution<Index> pick(0, partitions.size() - 1);
    for (Index k = 0; k < n_instances; ++k) {
        const auto& p = partitions[pick(rng)];
        const ResponseModel model = random_model(n_subjects, rng);
        const double dev = std::abs(exact_mse(model, p).total() - brute_force_mse(model, p));
        record(report, dev, dev > kOracleTolerance, model.v(), p.blocks());
    }
    finish(report);
    return report;
}

CheckReport check_unbiasedness_sweep(Index n_subjects, Index n_instances, std::uint64_t seed) {
    CheckReport report;
    report.name = "unbiasedness";
    report.tolerance = kBiasTolerance;
    report.seed = seed;
    const auto partitions = enumerate_block_partitions(n_subjects);
    Rng rng(seed);
    std::uniform_int_distribution<Index> pick(0, partitions.size() - 1);
    for (Index k = 0; k < n_instances; ++k) {
        const auto& p = partitions[pick(rng)];
        const ResponseModel model = random_model(n_subjects, rng);
        const double bias = check_unbiasedness(model, p);
        record(report, bias, !(bias < kBiasTolerance), model.v(), p.blocks());
    }
    finish(report);
    return report;
}

CheckReport check_remark2(Index n_instances, std::uint64_t seed, std::optional<Index> fixed_size) {
    CheckReport report;
    report.name = "remark2";
    report.seed = seed;
    Rng rng(seed);
    std::uniform_int_distribution<Index> pick_pairs(2, 10);
    Index near_ties = 0;
    for (Index k = 0; k < n_instances; ++k) {
        const Index size = fixed_size ? *fixed_size : 2 * pick_pairs(rng);
        const Index n_pairs = size / 2;
        const Eigen::VectorXd v = uniform_vector(size, 0.0, 2.0, rng);
        const MatchSet match = sample_random_matching(size, rng);
        const double direct = quadratic_form(v, covariance_matrix(bcrd(size))) -
                              quadratic_form(v, covariance_matrix(matchset_to_partition(match)));
        if (std::abs(direct) <= kOracleTolerance) {
            ++near_ties;
            continue;
        }
        const bool pm_better = direct > 0.0;
        const bool by_gap = mse_gap_bcrd_pm(v, match) > 0.0;
        const bool by_eq6 = !bcrd_beats_pm(v, match);
        const bool by_r2 = match_r_squared(v, match) > bcrd_expected_r_squared(n_pairs);
        const bool disagree = by_gap != pm_better || by_eq6 != pm_better || by_r2 != pm_better;
        record(report, disagree ? 1.0 : 0.0, disagree, v, pair_blocks(match),
               disagree ? "sign disagreement" : "");
    }
    report.measurements = {{"near_ties_skipped", static_cast<double>(near_ties)}};
    finish(report);
    return report;
}

CheckReport check_matching_oracle(Index n_subjects, Index n_instances, std::uint64_t seed) {
    CheckReport report;
    report.name = "matching";
    report.seed = seed;
    const auto m = static_cast<Eigen::Index>(n_subjects);
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> small(0, 3);
    Index scale_failures = 0;
    for (Index k = 0; k < n_instances; ++k) {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, m);
        std::string kind;
        switch (k % 4) {
            case 0:
                kind = "uniform weights";
                for (Eigen::Index i = 0; i < m; ++i) {
                    for (Eigen::Index j = i + 1; j < m; ++j) d(i, j) = d(j, i) = u(rng);
                }
                break;
            case 1: {
                kind = "squared euclidean";
                Eigen::MatrixXd pts(m, 2);
                for (auto& x : pts.reshaped()) x = u(rng);
                for (Eigen::Index i = 0; i < m; ++i) {
                    for (Eigen::Index j = i + 1; j < m; ++j) {
                        d(i, j) = d(j, i) = (pts.row(i) - pts.row(j)).squaredNorm();
                    }
                }
                break;
            }
            case 2: {
                kind = "mahalanobis";
                Eigen::MatrixXd x(m, 3);
                for (auto& e : x.reshaped()) e = u(rng);
                d = mahalanobis_distance_matrix(x);
                break;
            }
            default:
                kind = "small integer weights with ties";
                for (Eigen::Index i = 0; i < m; ++i) {
                    for (Eigen::Index j = i + 1; j < m; ++j) d(i, j) = d(j, i) = small(rng);
                }
                break;
        }
        const MatchSet blossom = min_weight_perfect_matching(d);
        const MatchSet exact = brute_force_matching(d);
        const double dev = std::abs(matching_weight(d, blossom) - matching_weight(d, exact));
        bool failed = !(blossom == exact);
        for (double c : {1e-3, 3.7, 1e6}) {
            if (!(min_weight_perfect_matching(d * c) == blossom)) {
                ++scale_failures;
                failed = true;
            }
        }
        record(report, failed ? std::max(dev, 1.0) : dev, failed, Eigen::VectorXd(),
               pair_blocks(blossom), kind);
    }
    report.measurements = {{"scale_failures", static_cast<double>(scale_failures)}};
    finish(report);
    return report;
}

const std::vector<std::string>& verify_check_names() {
    static const std::vector<std::string> names{"sigma",   "eq4",     "unbiasedness",
                                                "theorem1", "minimax", "remark1",
                                                "remark2",  "remark3", "matching"};
    return names;
}

std::vector<CheckReport> run_verification(const VerifyOptions& options) {
    for (const auto& name : options.only) {
        const auto& names = verify_check_names();
        if (std::find(names.begin(), names.end(), name) == names.end()) {
            throw Error("unknown check '" + name + "'");
        }
    }
    auto selected = [&](const std::string& name) {
        return options.only.empty() ||
               std::find(options.only.begin(), options.only.end(), name) != options.only.end();
    };
    auto sizes = [&](std::vector<Index> defaults) {
        return options.n_subjects ? std::vector<Index>{*options.n_subjects} : defaults;
    };
    auto seed_for = [&](const std::string& name, Index size) {
        return derive_seed(options.seed, stream_id(name), size);
    };

    std::vector<CheckReport> reports;
    auto run = [&](const std::string& name, Index size, auto&& body) {
        CheckReport r;
        try {
            r = body();
        } catch (const std::exception& e) {
            r = CheckReport{};
            r.error = e.what();
            r.passed = false;
        }
        r.name = name + "[2n=" + std::to_string(size) + "]";
        reports.push_back(std::move(r));
    };

    if (selected("sigma")) {
        for (Index s : sizes({4, 6, 8, 10})) {
            run("sigma", s, [&] { return check_sigma_oracle(s, options.inject_wrong_sigma ? 1e-3 : 0.0); });
        }
    }
    if (selected("eq4")) {
        for (Index s : sizes({4, 6, 8})) run("eq4", s, [&] { return check_mse_oracle(s, 200, seed_for("eq4", s)); });
    }
    if (selected("unbiasedness")) {
        for (Index s : sizes({4, 6, 8})) {
            run("unbiasedness", s, [&] { return check_unbiasedness_sweep(s, 200, seed_for("unbiasedness", s)); });
        }
    }
    if (selected("theorem1")) {
        for (Index s : sizes({8, 12, 16})) {
            run("theorem1", s, [&] { return theorem1_sweep(s, 1000, seed_for("theorem1", s)); });
        }
    }
    if (selected("minimax")) {
        for (Index s : sizes({4, 6, 8})) {
            run("minimax", s, [&] { return check_minimax(s, {}, seed_for("minimax", s)); });
        }
    }
    if (selected("remark1")) {
        for (Index s : sizes({4, 6, 8})) run("remark1", s, [&] { return check_remark1(s); });
    }
    if (selected("remark2")) {
        const Index s = options.n_subjects.value_or(0);
        CheckReport r;
        try {
            r = check_remark2(1000, seed_for("remark2", s), options.n_subjects);
        } catch (const std::exception& e) {
            r.error = e.what();
            r.passed = false;
        }
        r.name = options.n_subjects ? "remark2[2n=" + std::to_string(s) + "]" : "remark2[2n=4..20]";
        reports.push_back(std::move(r));
    }
    if (selected("remark3")) {
        for (Index s : sizes({4, 6, 8})) {
            run("remark3", s, [&] {
                std::vector<CovarianceMatrix> designs;
                for (const auto& p : enumerate_block_partitions(s)) designs.push_back(covariance_matrix(p));
                for (Index j = 0; j < 20; ++j) {
                    designs.push_back(random_mixture_covariance(s, j + 1, seed_for("remark3", s) + j));
                }
                CheckReport worst = check_remark3(designs, 1.0);
                for (double c : {0.3, 2.0}) {
                    CheckReport r = check_remark3(designs, c);
                    if (r.worst > worst.worst || !r.passed) worst = r;
                }
                return worst;
            });
        }
    }
    if (selected("matching")) {
        for (Index s : sizes({6, 8, 10})) {
            run("matching", s, [&] { return check_matching_oracle(s, 500, seed_for("matching", s)); });
        }
    }
    return reports;
}

}  // namespace pairdesign
