#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace smartq {

// Shortest decimal text that parses back to the identical double.
std::string format_real(double value);

// Strict parse of a full string; std::nullopt on any trailing garbage.
std::optional<double> parse_real(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

}  // namespace smartq
