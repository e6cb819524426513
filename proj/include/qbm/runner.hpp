// Runs a parsed scenario and renders its CSV.
//
// Every CSV starts with the comment line "# qbm-structures v1", then a header
// row, then one row per time point with numbers printed as %.17g. Flags are
// written as 0/1.

#pragma once

#include "qbm/config.hpp"

#include <iosfwd>
#include <string>

namespace qbm::runner {

inline constexpr const char* kCsvVersionLine = "# qbm-structures v1";

enum ExitCode : int { kOk = 0, kDomainError = 1, kConditioningError = 2 };

struct Output {
    std::string csv;
    std::string summary;  // short human-readable lines
};

// Throws DomainError / ConditioningError, and ConditioningError if any value
// to be written is not finite.
Output execute(const config::RunConfig& cfg);

// Executes, writes the CSV to cfg.output_path (or `out` when empty), prints
// the summary and any error message to `log`, and returns the exit code.
int run(const config::RunConfig& cfg, std::ostream& out, std::ostream& log);

} // namespace qbm::runner
