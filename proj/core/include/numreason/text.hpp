#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared by the parsers, the labeler and the scorers.
namespace numreason::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);

// Replaces every run of whitespace by a single space and trims both ends.
std::string collapse_whitespace(std::string_view s);

// Puts single spaces around every parenthesis, then collapses whitespace:
// "net income (loss)" -> "net income ( loss )".
std::string space_parentheses(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);
std::size_t count_whitespace_tokens(std::string_view s);

// Lowercased maximal runs of ASCII letters and digits.
std::vector<std::string> alnum_tokens(std::string_view s);

// Numeric tokens of a sentence, bounded by whitespace or punctuation so
// that "1" is never found inside "2019". Each token goes through
// normalize_number(); the values are returned in order of appearance.
std::vector<double> number_tokens(std::string_view sentence);

/// Parses a table cell or a sentence token as a number.
///
/// Currency symbols, thousands separators, surrounding whitespace and a
/// trailing "%" are stripped; the percent numeral keeps its face value.
/// A numeral wrapped in parentheses is negative (accounting notation).
/// Returns nullopt for anything that is not a number.
std::optional<double> normalize_number(std::string_view cell_text);

// Shortest decimal rendering that parses back to the same double, never in
// scientific notation ("0.5", "100", "-1.25").
std::string format_number(double value);

}  // namespace numreason::text
