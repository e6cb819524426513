// Scenario files for the command-line runner.
//
// Grammar (one statement per line, '#' starts a comment):
//
//   key = value        assignment in the current section
//   [section]          start a section; keys before the first section are
//                      top-level
//
// Keys may appear at most once. Unknown keys and sections are rejected. See
// README.md for the full key list and defaults.

#pragma once

#include "qbm/errors.hpp"
#include "qbm/experiments.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qbm::config {

// Malformed text. `line` is 1-based; 0 marks a command-line override.
class ParseError : public DomainError {
public:
    ParseError(int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

enum class Scenario { Pod, Er, Exclusivity, Marginal, OracleCompare };

const char* scenario_name(Scenario s);

struct RunConfig {
    Scenario scenario{Scenario::Pod};
    experiments::ScenarioConfig scenario_config;
    experiments::OracleOptions oracle;
    std::string output_path;  // empty: standard output
    std::uint64_t seed{0};
    double perturbation{0.0};
};

// `overrides` are "section.key=value" (or "key=value" for top-level keys) and
// replace values from the text.
RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {});

} // namespace qbm::config
