#include "pairdesign/core.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace pairdesign {

namespace {

void check_subject_count(Index n, const char* what) {
    if (n % 2 != 0 || n < kMinSubjects) {
        throw Error(std::string(what) + ": need an even number of subjects >= 4, got " +
                    std::to_string(n));
    }
}

std::vector<std::string> default_ids(Index n) {
    std::vector<std::string> ids(n);
    for (Index i = 0; i < n; ++i) ids[i] = std::to_string(i + 1);
    return ids;
}

}  // namespace

Subjects::Subjects(std::vector<std::string> ids, Eigen::MatrixXd x)
    : ids_(std::move(ids)), x_(std::move(x)) {
    if (static_cast<Index>(x_.rows()) != ids_.size()) {
        throw Error("Subjects: " + std::to_string(ids_.size()) + " ids but " +
                    std::to_string(x_.rows()) + " covariate rows");
    }
    check_subject_count(ids_.size(), "Subjects");
    std::set<std::string> seen;
    for (const auto& id : ids_) {
        if (!seen.insert(id).second) throw Error("Subjects: duplicate id '" + id + "'");
    }
    if (!x_.allFinite()) throw Error("Subjects: covariates must be finite");
}

Subjects::Subjects(Eigen::MatrixXd x) : ids_(default_ids(static_cast<Index>(x.rows()))), x_(std::move(x)) {
    check_subject_count(ids_.size(), "Subjects");
    if (!x_.allFinite()) throw Error("Subjects: covariates must be finite");
}

Subjects Subjects::subset(const std::vector<Index>& rows) const {
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), x_.cols());
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (Index r = 0; r < rows.size(); ++r) {
        sub.row(static_cast<Eigen::Index>(r)) = x_.row(static_cast<Eigen::Index>(rows[r]));
        ids.push_back(ids_.at(rows[r]));
    }
    return Subjects(std::move(ids), std::move(sub));
}

ResponseModel::ResponseModel(Eigen::VectorXd p_t, Eigen::VectorXd p_c)
    : p_t_(std::move(p_t)), p_c_(std::move(p_c)) {
    if (p_t_.size() != p_c_.size()) {
        throw Error("ResponseModel: p_T and p_C lengths differ");
    }
    check_subject_count(static_cast<Index>(p_t_.size()), "ResponseModel");
    auto in_unit = [](const Eigen::VectorXd& p) {
        return std::all_of(p.begin(), p.end(), [](double q) { return q >= 0.0 && q <= 1.0; });
    };
    if (!in_unit(p_t_) || !in_unit(p_c_)) {
        throw Error("ResponseModel: probabilities must lie in [0, 1]");
    }
}

ResponseModel ResponseModel::subset(const std::vector<Index>& rows) const {
    Eigen::VectorXd pt(static_cast<Eigen::Index>(rows.size()));
    Eigen::VectorXd pc(static_cast<Eigen::Index>(rows.size()));
    for (Index r = 0; r < rows.size(); ++r) {
        pt[static_cast<Eigen::Index>(r)] = p_t_[static_cast<Eigen::Index>(rows[r])];
        pc[static_cast<Eigen::Index>(r)] = p_c_[static_cast<Eigen::Index>(rows[r])];
    }
    return ResponseModel(std::move(pt), std::move(pc));
}

Allocation::Allocation(std::vector<int> w) : w_(std::move(w)) {
    if (w_.empty()) throw AssumptionError("A1", "Allocation: empty assignment vector");
    long sum = 0;
    for (int wi : w_) {
        if (wi != 1 && wi != -1) throw Error("Allocation: entries must be +1 or -1");
        sum += wi;
    }
    if (sum != 0) {
        throw AssumptionError("A1", "Allocation: arms are unbalanced (w'1 = " +
                                        std::to_string(sum) + ")");
    }
}

Index Allocation::treated_count() const {
    return static_cast<Index>(std::count(w_.begin(), w_.end(), 1));
}

Eigen::VectorXd Allocation::as_vector() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(w_.size()));
    for (Index i = 0; i < w_.size(); ++i) v[static_cast<Eigen::Index>(i)] = w_[i];
    return v;
}

ValidationReport validate_design_assumptions(const std::vector<std::vector<Index>>& blocks,
                                             Index n_subjects) {
    ValidationReport report;
    auto fail = [&](std::string which, std::string msg) {
        report.valid = false;
        report.violated = std::move(which);
        report.message = std::move(msg);
        return report;
    };
    if (n_subjects % 2 != 0 || n_subjects < kMinSubjects) {
        return fail("A1", "number of subjects must be even and >= 4, got " +
                              std::to_string(n_subjects));
    }
    std::vector<int> seen(n_subjects, 0);
    for (const auto& block : blocks) {
        for (Index i : block) {
            if (i >= n_subjects) {
                return fail("partition", "index " + std::to_string(i + 1) + " out of range 1.." +
                                             std::to_string(n_subjects));
            }
            if (seen[i]++ > 0) {
                return fail("partition", "duplicate index " + std::to_string(i + 1));
            }
        }
    }
    for (Index i = 0; i < n_subjects; ++i) {
        if (seen[i] == 0) return fail("partition", "missing index " + std::to_string(i + 1));
    }
    for (const auto& block : blocks) {
        if (block.empty() || block.size() % 2 != 0) {
            return fail("A1", "block of odd size " + std::to_string(block.size()) +
                                  " cannot be split evenly between arms");
        }
    }
    return report;
}

BlockPartition::BlockPartition(std::vector<std::vector<Index>> blocks, Index n_subjects)
    : blocks_(std::move(blocks)), n_subjects_(n_subjects) {
    auto report = validate_design_assumptions(blocks_, n_subjects_);
    if (!report.valid) throw AssumptionError(report.violated, "BlockPartition: " + report.message);
}

std::vector<Index> BlockPartition::sizes() const {
    std::vector<Index> s;
    s.reserve(blocks_.size());
    for (const auto& b : blocks_) s.push_back(b.size());
    return s;
}

MatchSet::MatchSet(std::vector<Pair> pairs) : pairs_(std::move(pairs)) {
    if (pairs_.empty()) throw Error("MatchSet: no pairs");
    const Index n = 2 * pairs_.size();
    std::vector<int> seen(n, 0);
    for (auto& [a, b] : pairs_) {
        if (a > b) std::swap(a, b);
        if (b >= n) throw Error("MatchSet: index " + std::to_string(b + 1) + " out of range");
        if (a == b) throw Error("MatchSet: subject paired with itself");
        if (seen[a]++ > 0 || seen[b]++ > 0) {
            throw Error("MatchSet: pairs overlap");
        }
    }
    std::sort(pairs_.begin(), pairs_.end());
}

std::vector<Index> MatchSet::partner() const {
    std::vector<Index> p(n_subjects());
    for (auto [a, b] : pairs_) {
        p[a] = b;
        p[b] = a;
    }
    return p;
}

CovarianceMatrix::CovarianceMatrix(Eigen::MatrixXd sigma) : sigma_(std::move(sigma)) {
    if (sigma_.rows() != sigma_.cols()) throw Error("CovarianceMatrix: not square");
    if (!sigma_.allFinite()) throw Error("CovarianceMatrix: non-finite entries");
    const double tol = 1e-12;
    if (!sigma_.isApprox(sigma_.transpose(), tol) &&
        (sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > tol) {
        throw Error("CovarianceMatrix: not symmetric");
    }
}

}  // namespace pairdesign
