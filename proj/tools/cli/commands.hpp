#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pairdesign/core.hpp"

namespace pairdesign::cli {

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    /// 0 uses the hardware concurrency.
    unsigned threads = 0;
    /// Output directory; empty writes to the given stream instead (the design
    /// command writes to the working directory).
    std::string out;
    /// "csv" or "json"; empty picks the command's default.
    std::string format;
};

struct DesignArgs {
    std::string input;
    std::string method = "pm";
    Index blocks = 8;
    std::string sort_key;
};

struct EvaluateArgs {
    std::string input;
    std::vector<std::string> designs{"bcrd", "pm"};
    std::string matches;
};

struct SimulateArgs {
    std::string config;
};

struct VerifyArgs {
    std::vector<std::string> only;
    std::optional<Index> n_subjects;
    bool inject_wrong_sigma = false;
};

/// Each returns the process exit code. Invalid input throws pairdesign::Error.
int cmd_design(const GlobalOptions& g, const DesignArgs& args, std::ostream& out);
int cmd_evaluate(const GlobalOptions& g, const EvaluateArgs& args, std::ostream& out);
int cmd_simulate(const GlobalOptions& g, const SimulateArgs& args, std::ostream& out);
/// Writes the report to `out` (or the output directory) and one line per
/// check to `log`.
int cmd_verify(const GlobalOptions& g, const VerifyArgs& args, std::ostream& out, std::ostream& log);

}  // namespace pairdesign::cli
