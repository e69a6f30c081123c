#include "cli/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cli/io.hpp"
#include "pairdesign/designs.hpp"
#include "pairdesign/estimators.hpp"
#include "pairdesign/matching.hpp"
#include "pairdesign/mse.hpp"
#include "pairdesign/random.hpp"
#include "pairdesign/simulation.hpp"
#include "pairdesign/verify.hpp"

namespace pairdesign::cli {

namespace {

using nlohmann::ordered_json;

std::string resolve_format(const GlobalOptions& g, const std::string& fallback) {
    const std::string f = g.format.empty() ? fallback : g.format;
    if (f != "csv" && f != "json") throw Error("unknown format '" + f + "' (expected csv or json)");
    return f;
}

std::uint64_t seed_of(const GlobalOptions& g, std::uint64_t fallback = 1) {
    return g.seed.value_or(fallback);
}

/// Writes to `dir/name` when a directory is set, else to `out`.
void emit(const std::string& dir, const std::string& name, const std::string& content, std::ostream& out) {
    if (dir.empty()) {
        out << content;
        return;
    }
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error("cannot write '" + path.string() + "'");
    file << content;
}

ordered_json number_or_string(double x) {
    if (std::isfinite(x)) return x;
    return format_number(x);
}

Eigen::VectorXd column(const Subjects& s, const std::vector<std::string>& names, const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error("no covariate column named '" + name + "'");
    return s.x().col(it - names.begin());
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

int cmd_design(const GlobalOptions& g, const DesignArgs& args, std::ostream& out) {
    const CovariateTable table = read_covariates(read_csv_file(args.input));
    const Subjects& subjects = table.subjects;
    const std::string format = resolve_format(g, "csv");
    const std::string dir = g.out.empty() ? "." : g.out;

    Eigen::MatrixXd x = subjects.x();
    if (!args.sort_key.empty()) x = column(subjects, table.columns, args.sort_key);

    std::optional<MatchSet> matches;
    std::vector<double> distances;
    std::optional<BlockPartition> partition;
    if (args.method == "pm") {
        if (x.cols() == 0) throw Error("design: pair matching needs at least one covariate");
        matches = design_matching(x, x.cols() == 1 ? MatchMethod::Sorted : MatchMethod::Mahalanobis);
        const Eigen::MatrixXd d = mahalanobis_distance_matrix(x);
        for (auto [a, b] : matches->pairs()) {
            distances.push_back(d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
        }
        partition = matchset_to_partition(*matches);
    } else if (args.method == "block") {
        if (x.cols() == 0) throw Error("design: block design needs at least one covariate");
        if (x.cols() == 1) {
            const Eigen::VectorXd key = x.col(0);
            partition = sorted_block_partition(as_span(key), args.blocks);
        } else {
            SimConfig config;
            partition = design_partition({DesignKind::Block, args.blocks}, x, config);
        }
    } else if (args.method == "bcrd") {
        partition = bcrd(subjects.size());
    } else {
        throw Error("design: unknown method '" + args.method + "' (expected pm, block or bcrd)");
    }

    Rng rng(derive_seed(seed_of(g), stream_id("design"), 0));
    const Allocation w = sample_allocation(*partition, rng);

    if (format == "csv") {
        if (matches) emit(dir, "matches.csv", write_matches(*matches, subjects.ids(), distances), out);
        emit(dir, "allocation.csv", write_allocation(w, subjects.ids()), out);
    } else {
        ordered_json j;
        j["method"] = args.method;
        j["seed"] = seed_of(g);
        ordered_json blocks = ordered_json::array();
        for (const auto& b : partition->blocks()) {
            ordered_json ids = ordered_json::array();
            for (Index i : b) ids.push_back(subjects.ids()[i]);
            blocks.push_back(ids);
        }
        j["blocks"] = blocks;
        if (matches) {
            ordered_json pairs = ordered_json::array();
            for (Index k = 0; k < matches->pairs().size(); ++k) {
                const auto [a, b] = matches->pairs()[k];
                pairs.push_back({{"pair_id", k + 1},
                                 {"id_a", subjects.ids()[a]},
                                 {"id_b", subjects.ids()[b]},
                                 {"distance", distances[k]}});
            }
            j["matches"] = pairs;
        }
        ordered_json alloc = ordered_json::array();
        for (Index i = 0; i < w.size(); ++i) {
            alloc.push_back({{"id", subjects.ids()[i]}, {"arm", w[i] > 0 ? "T" : "C"}});
        }
        j["allocation"] = alloc;
        emit(dir, "design.json", j.dump(2) + "\n", out);
    }
    return 0;
}

int cmd_evaluate(const GlobalOptions& g, const EvaluateArgs& args, std::ostream& out) {
    const ProbabilityTable table = read_probabilities(read_csv_file(args.input));
    const ResponseModel& model = table.model;
    const std::string format = resolve_format(g, "json");
    const Eigen::VectorXd v = model.v();
    const Index m = model.size();

    std::optional<MatchSet> given;
    if (!args.matches.empty()) given = read_matches(read_csv_file(args.matches), table.ids);

    ordered_json report;
    report["n_subjects"] = m;
    report["tau"] = tau(model);
    ordered_json rows = ordered_json::array();
    std::ostringstream csv;
    csv << "design,quadratic_form,design_term,bernoulli_term,mse\n";
    for (const auto& text : args.designs) {
        const DesignSpec spec = DesignSpec::parse(text);
        BlockPartition partition = bcrd(m);
        switch (spec.kind) {
            case DesignKind::Bcrd:
                break;
            case DesignKind::PairMatching:
                partition = matchset_to_partition(given ? *given : sorted_pair_matching(as_span(v)));
                break;
            case DesignKind::Block:
                partition = sorted_block_partition(as_span(v), spec.blocks);
                break;
            case DesignKind::RandomPairs:
                throw Error("evaluate: random_pm has no fixed partition; its covariance equals bcrd's");
        }
        const MseBreakdown b = exact_mse(model, partition);
        rows.push_back({{"design", spec.id()},
                        {"quadratic_form", b.quadratic_form},
                        {"design_term", b.design_term},
                        {"bernoulli_term", b.bernoulli_term},
                        {"mse", b.total()}});
        csv << spec.id() << ',' << format_number(b.quadratic_form) << ',' << format_number(b.design_term)
            << ',' << format_number(b.bernoulli_term) << ',' << format_number(b.total()) << '\n';
    }
    report["designs"] = rows;
    if (given) {
        ordered_json gap;
        gap["mse_gap_bcrd_minus_pm"] = mse_gap_bcrd_pm(v, *given);
        gap["bcrd_beats_pm"] = bcrd_beats_pm(v, *given);
        const bool constant = (v.array() == v[0]).all();
        gap["r_squared"] = constant ? ordered_json(nullptr) : ordered_json(match_r_squared(v, *given));
        gap["bcrd_expected_r_squared"] = bcrd_expected_r_squared(m / 2);
        report["matches"] = gap;
    }
    if (format == "json") {
        emit(g.out, "evaluate.json", report.dump(2) + "\n", out);
    } else {
        emit(g.out, "evaluate.csv", csv.str(), out);
    }
    return 0;
}

namespace {

const std::set<std::string> kConfigKeys{"n_subjects", "d",        "beta0",   "beta",         "beta_t",
                                        "link",       "designs",  "n_sim",   "seed",         "estimators",
                                        "data",       "match",    "block_levels"};

const ConfigValue* find(const ConfigMap& c, const std::string& key) {
    const auto it = c.find(key);
    return it == c.end() ? nullptr : &it->second;
}

std::string config_error(const std::string& source, const ConfigValue& v, const std::string& key,
                         const std::string& what) {
    return source + ":" + std::to_string(v.line) + ": key '" + key + "': " + what;
}

const std::string& single(const std::string& source, const ConfigMap& c, const std::string& key) {
    const ConfigValue& v = c.at(key);
    if (v.items.size() != 1) throw Error(config_error(source, v, key, "expected a single value"));
    return v.items[0];
}

double real_value(const std::string& source, const ConfigMap& c, const std::string& key, double fallback) {
    if (!find(c, key)) return fallback;
    return parse_number(single(source, c, key), source, c.at(key).line, key);
}

std::vector<Index> index_list(const std::string& source, const ConfigMap& c, const std::string& key) {
    std::vector<Index> out;
    if (!find(c, key)) return out;
    const ConfigValue& v = c.at(key);
    for (const auto& item : v.items) {
        if (item.empty() || !std::all_of(item.begin(), item.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
            throw Error(config_error(source, v, key, "'" + item + "' is not a nonnegative integer"));
        }
        out.push_back(std::stoull(item));
    }
    return out;
}

template <class F>
auto wrap_value(const std::string& source, const ConfigMap& c, const std::string& key, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(config_error(source, c.at(key), key, e.what()));
    }
}

}  // namespace

int cmd_simulate(const GlobalOptions& g, const SimulateArgs& args, std::ostream& out) {
    std::ifstream file(args.config);
    if (!file) throw Error("cannot open '" + args.config + "'");
    const ConfigMap c = parse_config(file, args.config, kConfigKeys);
    const std::string& src = args.config;
    const std::string format = resolve_format(g, "csv");

    SimConfig config;
    config.threads = g.threads;
    const auto seed_list = index_list(src, c, "seed");
    if (seed_list.size() > 1) throw Error(config_error(src, c.at("seed"), "seed", "expected a single value"));
    config.seed = g.seed.value_or(seed_list.empty() ? 1 : seed_list[0]);
    if (find(c, "n_sim")) {
        const auto n = index_list(src, c, "n_sim");
        if (n.size() != 1 || n[0] < 1) throw Error(config_error(src, c.at("n_sim"), "n_sim", "expected one integer >= 1"));
        config.n_sim = n[0];
    }
    const ConfigValue* designs = find(c, "designs");
    if (!designs) throw Error(src + ": key 'designs' is required");
    for (const auto& d : designs->items) {
        config.designs.push_back(wrap_value(src, c, "designs", [&] { return DesignSpec::parse(d); }));
    }
    if (const ConfigValue* est = find(c, "estimators")) {
        config.estimators.clear();
        for (const auto& e : est->items) {
            config.estimators.push_back(wrap_value(src, c, "estimators", [&] { return parse_estimator(e); }));
        }
    }
    if (find(c, "match")) {
        config.match = wrap_value(src, c, "match", [&] { return parse_match_method(single(src, c, "match")); });
    }
    config.block_levels = index_list(src, c, "block_levels");
    const Link link = find(c, "link") ? wrap_value(src, c, "link", [&] { return parse_link(single(src, c, "link")); })
                                      : Link::Expit;
    const std::vector<Index> sizes = index_list(src, c, "n_subjects");

    SimResult all;
    if (find(c, "data")) {
        for (const char* key : {"d", "beta0", "beta"}) {
            if (find(c, key)) {
                throw Error(config_error(src, c.at(key), key, "not used with 'data' (the model is fitted)"));
            }
        }
        if (link != Link::Expit) throw Error(config_error(src, c.at("link"), "link", "'data' fits a logit model"));
        const TrialData data = read_trial_data(read_csv_file(single(src, c, "data")));
        const LogisticFit fit = logistic_fit(data.subjects, TrialOutcome(Allocation(data.w), data.y));
        if (!fit.ok()) throw Error("simulate: logistic fit to the data did not converge cleanly");
        LogisticModelSpec model{fit.intercept, fit.beta, fit.beta_t, Link::Expit};
        model.beta_t = real_value(src, c, "beta_t", fit.beta_t);
        for (Index size : sizes.empty() ? std::vector<Index>{data.subjects.size()} : sizes) {
            config.subsample = size;
            auto part = parametric_bootstrap(data.subjects, model, config);
            all.rows.insert(all.rows.end(), part.rows.begin(), part.rows.end());
        }
    } else {
        if (sizes.empty()) throw Error(src + ": key 'n_subjects' is required without 'data'");
        const auto dims = index_list(src, c, "d");
        if (dims.size() > 1) throw Error(config_error(src, c.at("d"), "d", "expected a single value"));
        const Index d = dims.empty() ? 1 : dims[0];
        const double beta0 = real_value(src, c, "beta0", 4.0);
        const double beta1 = real_value(src, c, "beta", 2.0);
        const double beta_t = real_value(src, c, "beta_t", 1.0);
        for (Index size : sizes) {
            const Scenario scenario = synthetic_scenario(size, d, beta0, beta1, beta_t, link,
                                                         derive_seed(config.seed, stream_id("covariates"), size));
            auto part = run_monte_carlo(scenario, config);
            all.rows.insert(all.rows.end(), part.rows.begin(), part.rows.end());
        }
    }

    if (format == "csv") {
        emit(g.out, "results.csv", write_sim_csv(all), out);
    } else {
        ordered_json j;
        j["seed"] = config.seed;
        j["n_sim"] = config.n_sim;
        ordered_json rows = ordered_json::array();
        for (const auto& r : all.rows) {
            rows.push_back({{"design", r.design},
                            {"estimator", r.estimator},
                            {"n", r.n_subjects},
                            {"d", r.dim},
                            {"target", number_or_string(r.target)},
                            {"mean_estimate", number_or_string(r.mean_estimate)},
                            {"mse", number_or_string(r.mse)},
                            {"mc_se", number_or_string(r.mc_se)},
                            {"used", r.used},
                            {"excluded", r.excluded}});
        }
        j["rows"] = rows;
        emit(g.out, "results.json", j.dump(2) + "\n", out);
    }
    return 0;
}

int cmd_verify(const GlobalOptions& g, const VerifyArgs& args, std::ostream& out, std::ostream& log) {
    VerifyOptions options;
    options.seed = seed_of(g);
    options.only = args.only;
    options.n_subjects = args.n_subjects;
    options.inject_wrong_sigma = args.inject_wrong_sigma;
    const std::string format = resolve_format(g, "json");
    const auto reports = run_verification(options);

    bool all_passed = true;
    ordered_json checks = ordered_json::array();
    std::ostringstream csv;
    csv << "check,passed,cases,failures,worst,tolerance,seed,error\n";
    for (const auto& r : reports) {
        all_passed = all_passed && r.passed;
        log << (r.passed ? "PASS " : "FAIL ") << r.name << "  cases=" << r.cases << " failures=" << r.failures
            << " worst=" << format_number(r.worst);
        for (const auto& [k, v] : r.measurements) log << ' ' << k << '=' << format_number(v);
        if (!r.error.empty()) log << "  error: " << r.error;
        log << '\n';

        ordered_json witness;
        witness["deviation"] = number_or_string(r.witness.deviation);
        witness["v"] = std::vector<double>(r.witness.v.begin(), r.witness.v.end());
        ordered_json blocks = ordered_json::array();
        for (const auto& b : r.witness.blocks) {
            ordered_json one = ordered_json::array();
            for (Index i : b) one.push_back(i + 1);
            blocks.push_back(one);
        }
        witness["blocks"] = blocks;
        witness["note"] = r.witness.note;
        ordered_json measurements = ordered_json::object();
        for (const auto& [k, v] : r.measurements) measurements[k] = number_or_string(v);
        checks.push_back({{"check", r.name},
                          {"passed", r.passed},
                          {"cases", r.cases},
                          {"failures", r.failures},
                          {"worst", number_or_string(r.worst)},
                          {"tolerance", r.tolerance},
                          {"seed", r.seed ? ordered_json(*r.seed) : ordered_json(nullptr)},
                          {"measurements", measurements},
                          {"witness", witness},
                          {"error", r.error}});
        csv << r.name << ',' << (r.passed ? "true" : "false") << ',' << r.cases << ',' << r.failures << ','
            << format_number(r.worst) << ',' << format_number(r.tolerance) << ','
            << (r.seed ? std::to_string(*r.seed) : "") << ",\"" << r.error << "\"\n";
    }
    ordered_json j;
    j["seed"] = options.seed;
    j["passed"] = all_passed;
    j["checks"] = checks;
    if (format == "json") {
        emit(g.out, "verify.json", j.dump(2) + "\n", out);
    } else {
        emit(g.out, "verify.csv", csv.str(), out);
    }
    return all_passed ? 0 : 1;
}

}  // namespace pairdesign::cli
