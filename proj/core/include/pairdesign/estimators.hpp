#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pairdesign/core.hpp"

namespace pairdesign {

/// A realized trial: allocation and binary responses.
class TrialOutcome {
   public:
    TrialOutcome(Allocation w, std::vector<int> y);

    const Allocation& w() const { return w_; }
    const std::vector<int>& y() const { return y_; }
    Index size() const { return y_.size(); }

   private:
    Allocation w_;
    std::vector<int> y_;
};

enum class Link { Expit, Probit, InverseCloglog };

Link parse_link(std::string_view name);
std::string_view link_name(Link link);

/// Inverse link: maps a linear predictor to a probability.
double inverse_link(Link link, double eta);

/// p(x, w) = phi(beta0 + beta'x + beta_t w), treatment coded +1 / -1.
struct LogisticModelSpec {
    double beta0 = 0.0;
    Eigen::VectorXd beta;
    double beta_t = 0.0;
    Link link = Link::Expit;
};

double link_eval(const LogisticModelSpec& spec, const Eigen::VectorXd& x, int w);

/// Treatment and control success probabilities for every subject.
ResponseModel response_model(const LogisticModelSpec& spec, const Subjects& subjects);

/// (1/n) w'y, the difference of arm means.
double diff_in_means(const TrialOutcome& outcome);

/// Log odds ratio of the 2x2 arm-by-response table; 0.5 is added to every cell
/// when any cell is empty.
double log_odds_ratio(const TrialOutcome& outcome);

struct LogisticFit {
    double intercept = 0.0;
    Eigen::VectorXd beta;
    double beta_t = 0.0;
    /// Standard error of beta_t from the observed information.
    double beta_t_se = 0.0;
    int iterations = 0;
    bool converged = false;
    bool separation = false;
    /// Max absolute score (gradient of the log-likelihood) at the estimate.
    double max_score = 0.0;
    /// Usable for aggregation: converged and no separation.
    bool ok() const { return converged && !separation; }
};

struct IrlsOptions {
    int max_iterations = 50;
    double tolerance = 1e-8;
    /// Fitted probabilities closer than this to 0 or 1 signal separation.
    double boundary = 1e-10;
};

/// Logit maximum likelihood of y on [1, X, w] by iteratively reweighted least
/// squares. Throws when the design matrix is rank deficient.
LogisticFit logistic_fit(const Subjects& subjects, const TrialOutcome& outcome,
                         const IrlsOptions& options = {});

/// Same fit on an explicit covariate matrix (any row count, zero columns allowed).
LogisticFit logistic_fit(const Eigen::MatrixXd& x, const TrialOutcome& outcome,
                         const IrlsOptions& options = {});

}  // namespace pairdesign
