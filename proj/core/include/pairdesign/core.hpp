#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pairdesign {

using Index = std::size_t;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// A structural assumption on designs was violated. `assumption` is "A1",
/// "A2" or "partition" (overlapping / missing / out-of-range indices).
class AssumptionError : public Error {
   public:
    AssumptionError(std::string assumption, const std::string& what)
        : Error(what), assumption_(std::move(assumption)) {}
    const std::string& assumption() const { return assumption_; }

   private:
    std::string assumption_;
};

/// Fixed covariates for 2n subjects. d = 0 is allowed.
class Subjects {
   public:
    Subjects(std::vector<std::string> ids, Eigen::MatrixXd x);
    /// Ids "1".."2n".
    explicit Subjects(Eigen::MatrixXd x);

    const std::vector<std::string>& ids() const { return ids_; }
    const Eigen::MatrixXd& x() const { return x_; }
    Index size() const { return ids_.size(); }
    Index n_pairs() const { return ids_.size() / 2; }
    Index dim() const { return static_cast<Index>(x_.cols()); }

    /// Rows `rows` (0-based) in the given order.
    Subjects subset(const std::vector<Index>& rows) const;

   private:
    std::vector<std::string> ids_;
    Eigen::MatrixXd x_;
};

/// Per-subject success probabilities under treatment and control.
class ResponseModel {
   public:
    ResponseModel(Eigen::VectorXd p_t, Eigen::VectorXd p_c);

    const Eigen::VectorXd& p_t() const { return p_t_; }
    const Eigen::VectorXd& p_c() const { return p_c_; }
    /// v = p_T + p_C, the only design-relevant summary of the model.
    Eigen::VectorXd v() const { return p_t_ + p_c_; }
    Index size() const { return static_cast<Index>(p_t_.size()); }

    /// Success probability of subject i given its arm (+1 / -1).
    double conditional_mean(Index i, int arm) const {
        return arm > 0 ? p_t_[static_cast<Eigen::Index>(i)]
                       : p_c_[static_cast<Eigen::Index>(i)];
    }

    ResponseModel subset(const std::vector<Index>& rows) const;

   private:
    Eigen::VectorXd p_t_;
    Eigen::VectorXd p_c_;
};

/// A balanced assignment vector w in {-1,+1}^{2n} with w'1 = 0.
class Allocation {
   public:
    explicit Allocation(std::vector<int> w);

    const std::vector<int>& w() const { return w_; }
    int operator[](Index i) const { return w_[i]; }
    Index size() const { return w_.size(); }
    Index treated_count() const;
    Eigen::VectorXd as_vector() const;

    friend bool operator==(const Allocation&, const Allocation&) = default;

   private:
    std::vector<int> w_;
};

/// Disjoint blocks (0-based indices) covering {0, ..., 2n-1}, every block of
/// even size. One block is BCRD, n blocks of two is PM.
class BlockPartition {
   public:
    BlockPartition(std::vector<std::vector<Index>> blocks, Index n_subjects);

    const std::vector<std::vector<Index>>& blocks() const { return blocks_; }
    Index n_subjects() const { return n_subjects_; }
    Index n_blocks() const { return blocks_.size(); }
    std::vector<Index> sizes() const;
    bool is_pairwise() const { return 2 * blocks_.size() == n_subjects_; }
    bool is_complete() const { return blocks_.size() == 1; }

    friend bool operator==(const BlockPartition&, const BlockPartition&) = default;

   private:
    std::vector<std::vector<Index>> blocks_;
    Index n_subjects_;
};

using Pair = std::pair<Index, Index>;

/// n disjoint index pairs covering {0, ..., 2n-1}. Pairs are stored with
/// first < second and sorted by first element.
class MatchSet {
   public:
    explicit MatchSet(std::vector<Pair> pairs);

    const std::vector<Pair>& pairs() const { return pairs_; }
    Index n_subjects() const { return 2 * pairs_.size(); }
    /// partner()[i] is the index matched with i.
    std::vector<Index> partner() const;

    friend bool operator==(const MatchSet&, const MatchSet&) = default;

   private:
    std::vector<Pair> pairs_;
};

/// Variance-covariance matrix of a design's allocation vector.
class CovarianceMatrix {
   public:
    explicit CovarianceMatrix(Eigen::MatrixXd sigma);

    const Eigen::MatrixXd& matrix() const { return sigma_; }
    Index size() const { return static_cast<Index>(sigma_.rows()); }
    double operator()(Index i, Index j) const {
        return sigma_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

   private:
    Eigen::MatrixXd sigma_;
};

struct ValidationReport {
    bool valid = true;
    /// Empty when valid, otherwise "A1" or "partition".
    std::string violated;
    std::string message;
};

/// Checks that `blocks` partitions {0..n_subjects-1} into even-sized blocks.
ValidationReport validate_design_assumptions(
    const std::vector<std::vector<Index>>& blocks, Index n_subjects);

/// Smallest admissible trial size.
inline constexpr Index kMinSubjects = 4;

}  // namespace pairdesign
