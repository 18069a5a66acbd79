#include "numreason/text.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace numreason::text {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return is_digit(c) || is_alpha(c); }

// UTF-8 currency signs seen in financial tables.
constexpr std::array<std::string_view, 5> kCurrency = {"$", "\xE2\x82\xAC", "\xC2\xA3", "\xC2\xA5", "\xE2\x82\xB9"};
constexpr std::string_view kUnicodeMinus = "\xE2\x88\x92";

std::string strip_noise(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (is_space(s[i])) {
      std::size_t j = i;
      while (j < s.size() && is_space(s[j])) ++j;
      // "12 34" is two numbers, not 1234
      if (!out.empty() && is_digit(out.back()) && j < s.size() && is_digit(s[j])) out.push_back('?');
      i = j;
      continue;
    }
    bool skipped = false;
    for (auto sym : kCurrency) {
      if (s.substr(i, sym.size()) == sym) {
        i += sym.size();
        skipped = true;
        break;
      }
    }
    if (skipped) continue;
    if (s.substr(i, kUnicodeMinus.size()) == kUnicodeMinus) {
      out.push_back('-');
      i += kUnicodeMinus.size();
      continue;
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

std::optional<double> parse_plain(std::string_view body) {
  if (body.empty()) return std::nullopt;
  std::string digits;
  digits.reserve(body.size());
  bool seen_dot = false;
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c == ',') {
      // thousands separator: only between digits and never after the point
      if (seen_dot || i == 0 || i + 1 == body.size() || !is_digit(body[i - 1]) || !is_digit(body[i + 1]))
        return std::nullopt;
      continue;
    }
    if (c == '.') {
      if (seen_dot) return std::nullopt;
      seen_dot = true;
    } else if (!is_digit(c)) {
      return std::nullopt;
    }
    digits.push_back(c);
  }
  if (digits == ".") return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value,
                                   std::chars_format::fixed);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || !std::isfinite(value))
    return std::nullopt;
  return value;
}

}  // namespace

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string space_parentheses(std::string_view s) {
  std::string spaced;
  spaced.reserve(s.size() + 8);
  for (char c : s) {
    if (c == '(' || c == ')') {
      spaced += ' ';
      spaced += c;
      spaced += ' ';
    } else {
      spaced += c;
    }
  }
  return collapse_whitespace(spaced);
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

std::size_t count_whitespace_tokens(std::string_view s) {
  std::size_t n = 0;
  bool in_token = false;
  for (char c : s) {
    if (is_space(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++n;
    }
  }
  return n;
}

std::vector<std::string> alnum_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (is_alnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<double> number_tokens(std::string_view sentence) {
  std::vector<double> out;
  const std::size_t n = sentence.size();
  std::size_t i = 0;
  while (i < n) {
    char c = sentence[i];
    bool starts = is_digit(c) || (c == '.' && i + 1 < n && is_digit(sentence[i + 1]));
    if (!starts) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < n && (is_digit(sentence[i]) || sentence[i] == '.' || sentence[i] == ',')) ++i;
    // glued to a word on either side ("q4", "3rd"): not a standalone number
    if ((start > 0 && (is_alpha(sentence[start - 1]) || sentence[start - 1] == '_')) ||
        (i < n && (is_alpha(sentence[i]) || sentence[i] == '_')))
      continue;
    std::size_t end = i;
    while (end > start && (sentence[end - 1] == '.' || sentence[end - 1] == ',')) --end;
    auto value = parse_plain(sentence.substr(start, end - start));
    if (!value) continue;
    if (start >= 1 && sentence[start - 1] == '-' && (start < 2 || !is_alnum(sentence[start - 2])))
      *value = -*value;
    out.push_back(*value);
  }
  return out;
}

std::optional<double> normalize_number(std::string_view cell_text) {
  std::string s = strip_noise(cell_text);
  bool negative = false;
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
    negative = true;
    s = strip_noise(std::string_view(s).substr(1, s.size() - 2));
  }
  if (!s.empty() && s.back() == '%') s.pop_back();
  std::string_view body = s;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    if (body.front() == '-') negative = !negative;
    body.remove_prefix(1);
  }
  auto value = parse_plain(body);
  if (!value) return std::nullopt;
  return negative ? -*value : *value;
}

std::string format_number(double value) {
  if (value == 0.0) return "0";
  // DBL_MAX needs 309 integral digits in fixed notation
  std::array<char, 512> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed);
  (void)ec;
  return std::string(buf.data(), ptr);
}

}  // namespace numreason::text
