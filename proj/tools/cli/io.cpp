#include "cli/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace pairdesign::cli {

namespace {

[[noreturn]] void fail_at(const std::string& source, std::size_t line, const std::string& what) {
    throw Error(source + ":" + std::to_string(line) + ": " + what);
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(const std::string& line, const std::string& source,
                                    std::size_t number) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quoted) {
            if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
                cell += '"';
                ++k;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(trim(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    if (quoted) fail_at(source, number, "unterminated quote");
    cells.push_back(trim(cell));
    return cells;
}

void expect_header(const CsvTable& t, const std::vector<std::string>& want) {
    if (t.header != want) {
        std::string joined;
        for (const auto& h : want) joined += (joined.empty() ? "" : ",") + h;
        fail_at(t.source, 1, "expected header '" + joined + "'");
    }
}

void check_even_rows(const CsvTable& t) {
    if (t.rows.size() % 2 != 0) {
        fail_at(t.source, t.rows.back().line,
                "odd number of data rows (" + std::to_string(t.rows.size()) + "); need an even count");
    }
    if (t.rows.size() < kMinSubjects) {
        throw Error(t.source + ": need at least " + std::to_string(kMinSubjects) + " data rows");
    }
}

std::unordered_map<std::string, Index> index_of(const std::vector<std::string>& ids) {
    std::unordered_map<std::string, Index> out;
    for (Index i = 0; i < ids.size(); ++i) out.emplace(ids[i], i);
    return out;
}

int parse_arm(const std::string& cell, const std::string& source, std::size_t line) {
    if (cell == "T" || cell == "1" || cell == "+1") return 1;
    if (cell == "C" || cell == "-1") return -1;
    fail_at(source, line, "arm '" + cell + "' is not T or C");
}

}  // namespace

CsvTable parse_csv(std::istream& in, const std::string& source) {
    CsvTable t;
    t.source = source;
    std::string line;
    std::size_t number = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++number;
        if (number == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto cells = split_line(line, source, number);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size()) {
            fail_at(source, number, "expected " + std::to_string(t.header.size()) + " fields, found " +
                                        std::to_string(cells.size()));
        }
        t.rows.push_back({number, std::move(cells)});
    }
    if (!have_header) throw Error(source + ": empty file, header row required");
    return t;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return parse_csv(in, path.string());
}

double parse_number(const std::string& cell, const std::string& source, std::size_t line,
                    const std::string& column) {
    double value = 0.0;
    const char* end = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        fail_at(source, line, "column '" + column + "': '" + cell + "' is not a finite number");
    }
    return value;
}

CovariateTable read_covariates(const CsvTable& t) {
    if (t.header.empty() || t.header[0] != "id") fail_at(t.source, 1, "first column must be 'id'");
    if (t.rows.empty()) throw Error(t.source + ": no data rows");
    const auto m = static_cast<Eigen::Index>(t.rows.size());
    const auto d = static_cast<Eigen::Index>(t.header.size() - 1);
    Eigen::MatrixXd x(m, d);
    std::vector<std::string> ids;
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& row = t.rows[static_cast<std::size_t>(i)];
        ids.push_back(row.cells[0]);
        for (Eigen::Index k = 0; k < d; ++k) {
            x(i, k) = parse_number(row.cells[static_cast<std::size_t>(k + 1)], t.source, row.line,
                                   t.header[static_cast<std::size_t>(k + 1)]);
        }
    }
    check_even_rows(t);
    std::vector<std::string> columns(t.header.begin() + 1, t.header.end());
    try {
        return {Subjects(std::move(ids), std::move(x)), std::move(columns)};
    } catch (const Error& e) {
        throw Error(t.source + ": " + e.what());
    }
}

ProbabilityTable read_probabilities(const CsvTable& t) {
    expect_header(t, {"id", "p_t", "p_c"});
    if (t.rows.empty()) throw Error(t.source + ": no data rows");
    const auto m = static_cast<Eigen::Index>(t.rows.size());
    Eigen::VectorXd pt(m);
    Eigen::VectorXd pc(m);
    std::vector<std::string> ids;
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& row = t.rows[static_cast<std::size_t>(i)];
        ids.push_back(row.cells[0]);
        pt[i] = parse_number(row.cells[1], t.source, row.line, "p_t");
        pc[i] = parse_number(row.cells[2], t.source, row.line, "p_c");
        for (double p : {pt[i], pc[i]}) {
            if (p < 0.0 || p > 1.0) fail_at(t.source, row.line, "probability " + format_number(p) + " outside [0, 1]");
        }
    }
    check_even_rows(t);
    return {std::move(ids), ResponseModel(std::move(pt), std::move(pc))};
}

TrialData read_trial_data(const CsvTable& t) {
    const Index cols = t.header.size();
    if (cols < 3 || t.header[0] != "id" || t.header[cols - 2] != "w" || t.header[cols - 1] != "y") {
        fail_at(t.source, 1, "expected header 'id,<covariates...>,w,y'");
    }
    CsvTable covariates = t;
    covariates.header.resize(cols - 2);
    std::vector<int> w;
    std::vector<int> y;
    for (auto& row : covariates.rows) {
        w.push_back(parse_arm(row.cells[cols - 2], t.source, row.line));
        const std::string& yc = row.cells[cols - 1];
        if (yc != "0" && yc != "1") fail_at(t.source, row.line, "response '" + yc + "' is not 0 or 1");
        y.push_back(yc == "1" ? 1 : 0);
        row.cells.resize(cols - 2);
    }
    return {read_covariates(covariates).subjects, std::move(w), std::move(y)};
}

MatchSet read_matches(const CsvTable& t, const std::vector<std::string>& ids) {
    expect_header(t, {"pair_id", "id_a", "id_b", "distance"});
    const auto lookup = index_of(ids);
    std::vector<Pair> pairs;
    for (const auto& row : t.rows) {
        Index ab[2];
        for (int k = 0; k < 2; ++k) {
            const auto it = lookup.find(row.cells[static_cast<std::size_t>(k + 1)]);
            if (it == lookup.end()) {
                fail_at(t.source, row.line, "unknown subject id '" + row.cells[static_cast<std::size_t>(k + 1)] + "'");
            }
            ab[k] = it->second;
        }
        pairs.emplace_back(ab[0], ab[1]);
    }
    try {
        MatchSet m(std::move(pairs));
        if (m.n_subjects() != ids.size()) throw Error("match set does not cover every subject");
        return m;
    } catch (const Error& e) {
        throw Error(t.source + ": " + e.what());
    }
}

std::string write_matches(const MatchSet& matches, const std::vector<std::string>& ids,
                          const std::vector<double>& distances) {
    std::ostringstream out;
    out << "pair_id,id_a,id_b,distance\n";
    for (Index k = 0; k < matches.pairs().size(); ++k) {
        const auto [a, b] = matches.pairs()[k];
        out << k + 1 << ',' << ids[a] << ',' << ids[b] << ',' << format_number(distances[k]) << '\n';
    }
    return out.str();
}

Allocation read_allocation(const CsvTable& t, const std::vector<std::string>& ids) {
    expect_header(t, {"id", "arm"});
    const auto lookup = index_of(ids);
    if (t.rows.size() != ids.size()) {
        throw Error(t.source + ": " + std::to_string(t.rows.size()) + " rows for " +
                    std::to_string(ids.size()) + " subjects");
    }
    std::vector<int> w(ids.size(), 0);
    for (const auto& row : t.rows) {
        const auto it = lookup.find(row.cells[0]);
        if (it == lookup.end()) fail_at(t.source, row.line, "unknown subject id '" + row.cells[0] + "'");
        if (row.cells[1] != "T" && row.cells[1] != "C") {
            fail_at(t.source, row.line, "arm '" + row.cells[1] + "' is not T or C");
        }
        if (w[it->second] != 0) fail_at(t.source, row.line, "subject '" + row.cells[0] + "' listed twice");
        w[it->second] = row.cells[1] == "T" ? 1 : -1;
    }
    return Allocation(std::move(w));
}

std::string write_allocation(const Allocation& w, const std::vector<std::string>& ids) {
    std::ostringstream out;
    out << "id,arm\n";
    for (Index i = 0; i < w.size(); ++i) out << ids[i] << ',' << (w[i] > 0 ? 'T' : 'C') << '\n';
    return out.str();
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string write_sim_csv(const SimResult& result) {
    std::ostringstream out;
    out << "design,estimator,n,d,mean_estimate,mse,mc_se,excluded\n";
    for (const auto& r : result.rows) {
        out << r.design << ',' << r.estimator << ',' << r.n_subjects << ',' << r.dim << ','
            << format_number(r.mean_estimate) << ',' << format_number(r.mse) << ','
            << format_number(r.mc_se) << ',' << r.excluded << '\n';
    }
    return out.str();
}

ConfigMap parse_config(std::istream& in, const std::string& source,
                       const std::set<std::string>& allowed) {
    ConfigMap out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail_at(source, number, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (!allowed.contains(key)) fail_at(source, number, "unknown key '" + key + "'");
        if (out.contains(key)) fail_at(source, number, "key '" + key + "' given twice");
        ConfigValue value;
        value.line = number;
        std::string rest = trim(line.substr(eq + 1));
        if (rest.size() >= 2 && rest.front() == '[' && rest.back() == ']') rest = rest.substr(1, rest.size() - 2);
        std::stringstream items(rest);
        std::string item;
        while (std::getline(items, item, ',')) {
            item = trim(item);
            if (item.empty()) fail_at(source, number, "empty value for key '" + key + "'");
            value.items.push_back(item);
        }
        if (value.items.empty()) fail_at(source, number, "missing value for key '" + key + "'");
        out.emplace(key, std::move(value));
    }
    return out;
}

}  // namespace pairdesign::cli
