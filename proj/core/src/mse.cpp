#include "pairdesign/mse.hpp"

#include <string>

namespace pairdesign {

namespace {

void check_length(const Eigen::VectorXd& v, Index expected, const char* what) {
    if (static_cast<Index>(v.size()) != expected) {
        throw Error(std::string(what) + ": vector has length " + std::to_string(v.size()) +
                    ", expected " + std::to_string(expected));
    }
}

double at(const Eigen::VectorXd& v, Index i) { return v[static_cast<Eigen::Index>(i)]; }

double bernoulli_sum(const ResponseModel& model) {
    const auto& pt = model.p_t().array();
    const auto& pc = model.p_c().array();
    return 2.0 * ((pt * (1.0 - pt)).sum() + (pc * (1.0 - pc)).sum());
}

}  // namespace

double tau(const ResponseModel& model) {
    return (model.p_t() - model.p_c()).mean();
}

double quadratic_form(const Eigen::VectorXd& v, const CovarianceMatrix& sigma) {
    check_length(v, sigma.size(), "quadratic_form");
    return v.dot(sigma.matrix() * v);
}

double pm_quadratic_form(const Eigen::VectorXd& v, const MatchSet& matches) {
    check_length(v, matches.n_subjects(), "pm_quadratic_form");
    double sum = 0.0;
    for (auto [a, b] : matches.pairs()) {
        const double d = at(v, a) - at(v, b);
        sum += d * d;
    }
    return sum;
}

double block_quadratic_form(const Eigen::VectorXd& v, const BlockPartition& partition) {
    check_length(v, partition.n_subjects(), "block_quadratic_form");
    double total = 0.0;
    for (const auto& block : partition.blocks()) {
        const double m = static_cast<double>(block.size());
        double mean = 0.0;
        for (Index i : block) mean += at(v, i);
        mean /= m;
        double ss = 0.0;
        for (Index i : block) ss += (at(v, i) - mean) * (at(v, i) - mean);
        total += m / (m - 1.0) * ss;
    }
    return total;
}

double block_quadratic_form_pairwise(const Eigen::VectorXd& v, const BlockPartition& partition) {
    check_length(v, partition.n_subjects(), "block_quadratic_form_pairwise");
    double total = 0.0;
    for (const auto& block : partition.blocks()) {
        double pair_sum = 0.0;
        for (Index a = 0; a < block.size(); ++a) {
            for (Index b = a + 1; b < block.size(); ++b) {
                const double d = at(v, block[a]) - at(v, block[b]);
                pair_sum += d * d;
            }
        }
        total += pair_sum / (static_cast<double>(block.size()) - 1.0);
    }
    return total;
}

MseBreakdown exact_mse(const ResponseModel& model, const BlockPartition& partition) {
    check_length(model.p_t(), partition.n_subjects(), "exact_mse");
    const double n = static_cast<double>(partition.n_subjects()) / 2.0;
    MseBreakdown out;
    out.quadratic_form = block_quadratic_form(model.v(), partition);
    out.design_term = out.quadratic_form / (4.0 * n * n);
    out.bernoulli_term = bernoulli_sum(model) / (4.0 * n * n);
    return out;
}

MseBreakdown exact_mse(const ResponseModel& model, const CovarianceMatrix& sigma) {
    check_length(model.p_t(), sigma.size(), "exact_mse");
    const double n = static_cast<double>(sigma.size()) / 2.0;
    MseBreakdown out;
    out.quadratic_form = quadratic_form(model.v(), sigma);
    out.design_term = out.quadratic_form / (4.0 * n * n);
    out.bernoulli_term = bernoulli_sum(model) / (4.0 * n * n);
    return out;
}

namespace {

/// sum_{i<j} (v_i - v_j)^2 = 2n * sum_i (v_i - vbar)^2.
double all_pairs_sum(const Eigen::VectorXd& v) {
    const double mean = v.mean();
    return static_cast<double>(v.size()) * (v.array() - mean).square().sum();
}

}  // namespace

double mse_gap_bcrd_pm(const Eigen::VectorXd& v, const MatchSet& matches) {
    check_length(v, matches.n_subjects(), "mse_gap_bcrd_pm");
    const double two_n = static_cast<double>(v.size());
    const double n = two_n / 2.0;
    return (all_pairs_sum(v) / (two_n - 1.0) - pm_quadratic_form(v, matches)) / (4.0 * n * n);
}

bool bcrd_beats_pm(const Eigen::VectorXd& v, const MatchSet& matches) {
    check_length(v, matches.n_subjects(), "bcrd_beats_pm");
    const double two_n = static_cast<double>(v.size());
    const double n = two_n / 2.0;
    return all_pairs_sum(v) / (n * (two_n - 1.0)) < pm_quadratic_form(v, matches) / n;
}

double match_r_squared(const Eigen::VectorXd& v, const MatchSet& matches) {
    check_length(v, matches.n_subjects(), "match_r_squared");
    const double total_ss = (v.array() - v.mean()).square().sum();
    if (!(total_ss > 0.0)) {
        throw Error("match_r_squared: v is constant, R^2 is undefined");
    }
    return 1.0 - 0.5 * pm_quadratic_form(v, matches) / total_ss;
}

double bcrd_expected_r_squared(Index n_pairs) {
    if (n_pairs < 1) throw Error("bcrd_expected_r_squared: need n >= 1");
    const double n = static_cast<double>(n_pairs);
    return (n - 1.0) / (2.0 * n - 1.0);
}

Eigen::VectorXd staircase_corner(Index size, Index zeros) {
    if (zeros > size) throw Error("staircase_corner: more zeros than entries");
    Eigen::VectorXd c = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(size), 2.0);
    c.head(static_cast<Eigen::Index>(zeros)).setZero();
    return c;
}

CornerMax corner_max_quadratic_form(const CovarianceMatrix& sigma) {
    const Index size = sigma.size();
    CornerMax out;
    out.values.reserve(size + 1);
    for (Index zeros = 0; zeros <= size; ++zeros) {
        const double value = quadratic_form(staircase_corner(size, zeros), sigma);
        out.values.push_back(value);
        if (zeros == 0 || value >= out.value) {
            out.value = value;
            out.zeros = zeros;
        }
    }
    out.corner = staircase_corner(size, out.zeros);
    return out;
}

}  // namespace pairdesign
