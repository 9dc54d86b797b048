#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mlexp/config.hpp"
#include "mlexp/dataset.hpp"

namespace mlexp::cli {

enum ExitCode : int { ok = 0, usage = 1, validation = 2, execution = 3 };

/// Entry point shared by the binary and the tests. No subcommand starts the
/// interactive session on `in`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

/// Numbered-menu session. Returns 0 on quit or end of input.
int interactive_session(std::istream& in, std::ostream& out);

/// Summary statistics, class balance, correlations and validation findings.
void print_analysis(const Dataset& ds, std::ostream& out);

/// Value of PROPHETIC_SEED, if set. Throws ValidationError when it is not an
/// unsigned integer.
std::optional<std::uint64_t> seed_override();

/// Applies the override (if any) to `config` and echoes it on `out`.
void apply_seed_override(ExperimentConfig& config, std::ostream& out);

}  // namespace mlexp::cli
