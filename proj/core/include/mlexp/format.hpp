#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mlexp {

/// Shortest decimal form that parses back to the identical double.
std::string format_number(double value);

/// Integer or decimal literal with optional exponent and sign. Rejects
/// anything else (including inf/nan and trailing garbage).
std::optional<double> parse_number(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char delimiter);

}  // namespace mlexp
