#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace cvp::text {

// Shortest representation that parses back to the same double.
std::string format_double(double value);

// Whole-field parse after trimming ASCII whitespace; nullopt on any leftover
// characters, empty input or a non-finite result.
std::optional<double> parse_double(std::string_view field);

std::string_view trim(std::string_view s);

std::string to_lower_ascii(std::string_view s);

}  // namespace cvp::text
