#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace beamgeo {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

/// Whole-string parse; rejects trailing garbage and non-finite results.
std::optional<double> parse_double(std::string_view text);

std::optional<long long> parse_integer(std::string_view text);

std::string_view trim(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char sep);

/// Comma-separated list of doubles, e.g. "0.02,0.01,0.005".
std::optional<std::vector<double>> parse_double_list(std::string_view text);

}  // namespace beamgeo
