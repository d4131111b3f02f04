#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toolbench::util {

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
std::string trim(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool starts_with_ci(std::string_view s, std::string_view prefix);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
void replace_all(std::string& s, std::string_view from, std::string_view to);

/// Parses the whole string as a finite number (leading/trailing blanks rejected).
std::optional<double> parse_number(std::string_view s);
/// Parses the whole string as a base-10 signed integer.
std::optional<std::int64_t> parse_integer(std::string_view s);

/// Shortest round-trip text for a double; integral values keep a ".0" suffix.
std::string format_real(double v);

/// Lowercase words joined by underscores; parenthesised suffixes dropped.
/// "Free Meal Count (K-12)" -> "free_meal_count".
std::string snake_case(std::string_view s);
/// "county_name" -> "County Name".
std::string title_case(std::string_view snake);

/// Number of UTF-8 code points.
std::size_t utf8_length(std::string_view s);
/// Half-open code point slice [begin, end), clamped to the string.
std::string utf8_slice(std::string_view s, std::size_t begin, std::size_t end);

}  // namespace toolbench::util
