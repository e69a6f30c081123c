#include "pairdesign/estimators.hpp"

#include <cmath>
#include <limits>

namespace pairdesign {

TrialOutcome::TrialOutcome(Allocation w, std::vector<int> y) : w_(std::move(w)), y_(std::move(y)) {
    if (y_.size() != w_.size()) {
        throw Error("TrialOutcome: " + std::to_string(y_.size()) + " responses for " +
                    std::to_string(w_.size()) + " assignments");
    }
    for (int yi : y_) {
        if (yi != 0 && yi != 1) throw Error("TrialOutcome: responses must be 0 or 1");
    }
}

Link parse_link(std::string_view name) {
    if (name == "expit" || name == "logit") return Link::Expit;
    if (name == "probit") return Link::Probit;
    if (name == "cloglog" || name == "inverse-cloglog" || name == "inverse_cloglog") {
        return Link::InverseCloglog;
    }
    throw Error("unknown link '" + std::string(name) + "' (expected expit, probit or cloglog)");
}

std::string_view link_name(Link link) {
    switch (link) {
        case Link::Expit:
            return "expit";
        case Link::Probit:
            return "probit";
        case Link::InverseCloglog:
            return "cloglog";
    }
    return "expit";
}

double inverse_link(Link link, double eta) {
    switch (link) {
        case Link::Expit:
            return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
        case Link::Probit:
            return 0.5 * std::erfc(-eta / std::sqrt(2.0));
        case Link::InverseCloglog:
            return -std::expm1(-std::exp(eta));
    }
    throw Error("inverse_link: unknown link");
}

double link_eval(const LogisticModelSpec& spec, const Eigen::VectorXd& x, int w) {
    if (x.size() != spec.beta.size()) {
        throw Error("link_eval: covariate row has " + std::to_string(x.size()) +
                    " entries, model has " + std::to_string(spec.beta.size()));
    }
    if (w != 1 && w != -1) throw Error("link_eval: treatment must be +1 or -1");
    return inverse_link(spec.link, spec.beta0 + spec.beta.dot(x) + spec.beta_t * w);
}

ResponseModel response_model(const LogisticModelSpec& spec, const Subjects& subjects) {
    const auto m = static_cast<Eigen::Index>(subjects.size());
    Eigen::VectorXd pt(m);
    Eigen::VectorXd pc(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::VectorXd row = subjects.x().row(i).transpose();
        pt[i] = link_eval(spec, row, 1);
        pc[i] = link_eval(spec, row, -1);
    }
    return ResponseModel(std::move(pt), std::move(pc));
}

double diff_in_means(const TrialOutcome& outcome) {
    long dot = 0;
    for (Index i = 0; i < outcome.size(); ++i) dot += outcome.w()[i] * outcome.y()[i];
    return static_cast<double>(dot) / (static_cast<double>(outcome.size()) / 2.0);
}

double log_odds_ratio(const TrialOutcome& outcome) {
    double s_t = 0, f_t = 0, s_c = 0, f_c = 0;
    for (Index i = 0; i < outcome.size(); ++i) {
        const bool treated = outcome.w()[i] > 0;
        const bool success = outcome.y()[i] == 1;
        (treated ? (success ? s_t : f_t) : (success ? s_c : f_c)) += 1.0;
    }
    const double c = (s_t == 0 || f_t == 0 || s_c == 0 || f_c == 0) ? 0.5 : 0.0;
    return std::log((s_t + c) * (f_c + c)) - std::log((f_t + c) * (s_c + c));
}

LogisticFit logistic_fit(const Subjects& subjects, const TrialOutcome& outcome,
                         const IrlsOptions& options) {
    return logistic_fit(subjects.x(), outcome, options);
}

LogisticFit logistic_fit(const Eigen::MatrixXd& x, const TrialOutcome& outcome,
                         const IrlsOptions& options) {
    const Eigen::Index m = x.rows();
    if (static_cast<Index>(m) != outcome.size()) {
        throw Error("logistic_fit: covariate rows and outcome length differ");
    }
    const Eigen::Index d = x.cols();
    const Eigen::Index p = d + 2;
    Eigen::MatrixXd z(m, p);
    z.col(0).setOnes();
    z.middleCols(1, d) = x;
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        z(i, p - 1) = outcome.w()[static_cast<Index>(i)];
        y[i] = outcome.y()[static_cast<Index>(i)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
    if (qr.rank() < p) {
        throw Error("logistic_fit: design matrix [1, X, w] is rank deficient (rank " +
                    std::to_string(qr.rank()) + " < " + std::to_string(p) + ")");
    }

    LogisticFit fit;
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd prob(m);
    Eigen::MatrixXd info(p, p);
    auto evaluate = [&] {
        const Eigen::VectorXd eta = z * coef;
        for (Eigen::Index i = 0; i < m; ++i) prob[i] = inverse_link(Link::Expit, eta[i]);
        const Eigen::VectorXd weight = prob.array() * (1.0 - prob.array());
        info = z.transpose() * weight.asDiagonal() * z;
    };

    // Under separation the coefficients drift off linearly until the fitted
    // probabilities saturate, after which the steps can vanish. Compare the
    // final size against an early iterate rather than the last step.
    constexpr int kEarly = 5;
    double early_norm = 0.0;
    double previous_norm = 0.0;
    bool growing = false;
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        evaluate();
        const Eigen::VectorXd score = z.transpose() * (y - prob);
        const Eigen::VectorXd step = info.ldlt().solve(score);
        fit.iterations = iter;
        if (!step.allFinite()) break;
        coef += step;
        const double norm = coef.norm();
        growing = norm > previous_norm;
        previous_norm = norm;
        if (iter == kEarly) early_norm = norm;
        if (step.cwiseAbs().maxCoeff() < options.tolerance) {
            fit.converged = true;
            break;
        }
    }
    evaluate();
    fit.max_score = (z.transpose() * (y - prob)).cwiseAbs().maxCoeff();
    bool at_boundary = false;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (prob[i] < options.boundary || prob[i] > 1.0 - options.boundary) at_boundary = true;
    }
    if (fit.iterations > kEarly && previous_norm > 1.5 * early_norm) growing = true;
    fit.separation = at_boundary && (growing || !fit.converged);
    if (!coef.allFinite()) {
        fit.converged = false;
        fit.separation = true;
    }

    fit.intercept = coef[0];
    fit.beta = coef.segment(1, d);
    fit.beta_t = coef[p - 1];
    const Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    const double var_t = cov(p - 1, p - 1);
    fit.beta_t_se = var_t > 0.0 ? std::sqrt(var_t) : std::numeric_limits<double>::infinity();
    return fit;
}

}  // namespace pairdesign
