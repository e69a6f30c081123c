#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pairdesign/core.hpp"
#include "pairdesign/simulation.hpp"

namespace pairdesign::cli {

struct CsvRow {
    std::size_t line = 0;
    std::vector<std::string> cells;
};

struct CsvTable {
    std::string source;
    std::vector<std::string> header;
    std::vector<CsvRow> rows;
};

/// Comma-separated with a header row. Double quotes may wrap a cell; blank
/// lines are skipped. Errors name the source and line.
CsvTable parse_csv(std::istream& in, const std::string& source);
CsvTable read_csv_file(const std::filesystem::path& path);

double parse_number(const std::string& cell, const std::string& source, std::size_t line,
                    const std::string& column);

/// Header `id,x1,...,xd` (any covariate names) and an even number of rows.
struct CovariateTable {
    Subjects subjects;
    std::vector<std::string> columns;
};
CovariateTable read_covariates(const CsvTable& table);

/// Header `id,p_t,p_c`.
struct ProbabilityTable {
    std::vector<std::string> ids;
    ResponseModel model;
};
ProbabilityTable read_probabilities(const CsvTable& table);

/// Header `id,<covariates...>,w,y` with w in {T, C, 1, -1} and y in {0, 1}.
struct TrialData {
    Subjects subjects;
    std::vector<int> w;
    std::vector<int> y;
};
TrialData read_trial_data(const CsvTable& table);

/// Header `pair_id,id_a,id_b,distance`; ids resolve against `ids`.
MatchSet read_matches(const CsvTable& table, const std::vector<std::string>& ids);
std::string write_matches(const MatchSet& matches, const std::vector<std::string>& ids,
                          const std::vector<double>& distances);

/// Header `id,arm` with arm T or C.
Allocation read_allocation(const CsvTable& table, const std::vector<std::string>& ids);
std::string write_allocation(const Allocation& w, const std::vector<std::string>& ids);

/// Shortest round-trip decimal form; "nan", "inf" and "-inf" otherwise.
std::string format_number(double x);

std::string write_sim_csv(const SimResult& result);

/// Flat `key = value` file; values may be comma-separated lists; `#` starts a
/// comment. Unknown or repeated keys are errors.
struct ConfigValue {
    std::size_t line = 0;
    std::vector<std::string> items;
};
using ConfigMap = std::map<std::string, ConfigValue>;
ConfigMap parse_config(std::istream& in, const std::string& source,
                       const std::set<std::string>& allowed);

}  // namespace pairdesign::cli
