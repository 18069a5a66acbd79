#include "oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>

namespace oracle {
namespace {

std::string strip(const std::string& s) {
  auto b = s.find_first_not_of(' ');
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(' ');
  return s.substr(b, e - b + 1);
}

std::optional<double> cell_number(std::string s) {
  std::string t;
  for (char c : s)
    if (c != ',' && c != '$' && c != ' ' && c != '%') t += c;
  bool neg = false;
  if (t.size() >= 2 && t.front() == '(' && t.back() == ')') {
    neg = true;
    t = t.substr(1, t.size() - 2);
  }
  if (t.empty()) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return std::nullopt;
  return neg ? -v : v;
}

const std::map<std::string, double>& constants() {
  static const std::map<std::string, double> c{
      {"const_1", 1},     {"const_2", 2},       {"const_3", 3},       {"const_4", 4},
      {"const_5", 5},     {"const_6", 6},       {"const_7", 7},       {"const_8", 8},
      {"const_9", 9},     {"const_10", 10},     {"const_12", 12},     {"const_100", 100},
      {"const_1000", 1e3}, {"const_10000", 1e4}, {"const_100000", 1e5}, {"const_1000000", 1e6},
      {"const_1000000000", 1e9}, {"const_m1", -1}};
  return c;
}

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  return std::string(buf, r.ptr);
}

}  // namespace

std::optional<RefValue> run_reference(const std::string& program, const Grid& table) {
  std::vector<RefValue> results;
  std::size_t pos = 0;
  while (pos < program.size()) {
    auto open = program.find('(', pos);
    auto close = program.find(')', open);
    if (open == std::string::npos || close == std::string::npos) return std::nullopt;
    std::string op = strip(program.substr(pos, open - pos));
    if (!op.empty() && op[0] == ',') op = strip(op.substr(1));
    std::vector<std::string> args;
    std::string inner = program.substr(open + 1, close - open - 1);
    std::size_t a = 0;
    while (true) {
      auto comma = inner.find(',', a);
      args.push_back(strip(inner.substr(a, comma == std::string::npos ? std::string::npos : comma - a)));
      if (comma == std::string::npos) break;
      a = comma + 1;
    }
    pos = close + 1;

    if (op.rfind("table_", 0) == 0) {
      const std::vector<std::string>* row = nullptr;
      for (std::size_t r = 1; r < table.size() && !row; ++r)
        if (table[r][0] == args[0]) row = &table[r];
      if (!row) return std::nullopt;
      std::vector<double> nums;
      for (std::size_t c = 1; c < row->size(); ++c)
        if (auto v = cell_number((*row)[c])) nums.push_back(*v);
      if (nums.empty()) return std::nullopt;
      double v;
      if (op == "table_max") {
        v = *std::max_element(nums.begin(), nums.end());
      } else if (op == "table_min") {
        v = *std::min_element(nums.begin(), nums.end());
      } else {
        double s = 0;
        for (double x : nums) s += x;
        v = op == "table_sum" ? s : s / nums.size();
      }
      if (!std::isfinite(v)) return std::nullopt;
      results.push_back({false, v, false});
      continue;
    }

    double x[2];
    for (int i = 0; i < 2; ++i) {
      const std::string& s = args[i];
      if (s[0] == '#') {
        auto idx = static_cast<std::size_t>(std::stoul(s.substr(1)));
        if (idx >= results.size() || results[idx].is_bool) return std::nullopt;
        x[i] = results[idx].number;
      } else if (constants().count(s)) {
        x[i] = constants().at(s);
      } else {
        x[i] = std::strtod(s.c_str(), nullptr);
      }
    }
    RefValue out;
    if (op == "add") out.number = x[0] + x[1];
    else if (op == "subtract") out.number = x[0] - x[1];
    else if (op == "multiply") out.number = x[0] * x[1];
    else if (op == "divide") {
      if (x[1] == 0) return std::nullopt;
      out.number = x[0] / x[1];
    } else if (op == "exp") out.number = std::pow(x[0], x[1]);
    else if (op == "greater") {
      out.is_bool = true;
      out.yes = x[0] > x[1];
    } else return std::nullopt;
    if (!out.is_bool && !std::isfinite(out.number)) return std::nullopt;
    results.push_back(out);
  }
  if (results.empty()) return std::nullopt;
  return results.back();
}

GeneratedProgram random_program(std::mt19937_64& rng, int max_steps) {
  static const char* names[] = {"revenue", "net income", "cost of sales", "total assets", "interest expense",
                                "operating cash flow"};
  static const char* arith[] = {"add", "subtract", "multiply", "divide", "exp"};
  static const char* aggs[] = {"table_sum", "table_average", "table_max", "table_min"};
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  GeneratedProgram g;
  const std::size_t rows = 2 + pick(4), cols = 2 + pick(4);
  g.table.push_back({""});
  for (std::size_t c = 1; c < cols; ++c) g.table[0].push_back(std::to_string(2015 + c));
  for (std::size_t r = 1; r <= rows; ++r) {
    std::vector<std::string> row{names[r - 1]};
    for (std::size_t c = 1; c < cols; ++c) {
      const double v = static_cast<double>(static_cast<long>(pick(2000000)) - 500000) / 100.0;
      switch (pick(6)) {
        case 0: row.push_back("$ " + fmt(std::fabs(v))); break;
        case 1: row.push_back("( " + fmt(std::fabs(v)) + " )"); break;
        case 2: row.push_back(fmt(v) + "%"); break;
        case 3: row.push_back(pick(3) == 0 ? "n/a" : fmt(v)); break;
        default: row.push_back(fmt(v)); break;
      }
    }
    g.table.push_back(std::move(row));
  }

  const int steps = 1 + static_cast<int>(pick(static_cast<std::size_t>(max_steps)));
  auto literal = [&]() -> std::string {
    switch (pick(4)) {
      case 0: {
        static const char* cs[] = {"const_1", "const_2", "const_10", "const_12", "const_100", "const_1000",
                                   "const_m1"};
        return cs[pick(7)];
      }
      case 1: return fmt(static_cast<double>(static_cast<long>(pick(20001)) - 10000) / 100.0);
      default: return fmt(static_cast<double>(static_cast<long>(pick(1001)) - 100));
    }
  };
  for (int s = 0; s < steps; ++s) {
    if (s > 0) g.text += ", ";
    const bool last = s == steps - 1;
    if (pick(4) == 0) {
      const std::string op = aggs[pick(4)];
      g.ops.push_back(op);
      g.text += op + "(" + g.table[1 + pick(rows)][0] + ")";
      continue;
    }
    std::string op = last && pick(5) == 0 ? "greater" : arith[pick(5)];
    auto arg = [&]() -> std::string {
      if (s > 0 && pick(2) == 0) return "#" + std::to_string(pick(static_cast<std::size_t>(s)));
      return literal();
    };
    std::string a = arg(), b = arg();
    if (op == "exp") b = std::to_string(pick(4));  // keep powers in range
    g.ops.push_back(op);
    g.text += op + "(" + a + ", " + b + ")";
  }
  return g;
}

std::string corrupt_once(const std::string& word, std::mt19937_64& rng) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz_";
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  for (;;) {
    std::string out = word;
    const char c = alphabet[pick(alphabet.size())];
    switch (pick(3)) {
      case 0: out.insert(out.begin() + static_cast<long>(pick(word.size() + 1)), c); break;
      case 1:
        if (word.size() < 2) continue;
        out.erase(out.begin() + static_cast<long>(pick(word.size())));
        break;
      default: out[pick(word.size())] = c; break;
    }
    if (out != word) return out;
  }
}

std::set<std::string> single_edits(const std::string& word) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz_";
  std::set<std::string> out;
  for (std::size_t i = 0; i <= word.size(); ++i)
    for (char c : alphabet) out.insert(word.substr(0, i) + c + word.substr(i));
  for (std::size_t i = 0; i < word.size(); ++i) {
    out.insert(word.substr(0, i) + word.substr(i + 1));
    for (char c : alphabet) out.insert(word.substr(0, i) + c + word.substr(i + 1));
  }
  out.erase(word);
  out.erase("");
  return out;
}

RecallCounts brute_recall(const std::vector<std::string>& ranked, const std::set<std::string>& gold, std::size_t k) {
  RecallCounts rc;
  std::set<std::string> top(ranked.begin(), ranked.begin() + static_cast<long>(std::min(k, ranked.size())));
  for (const auto& g : gold) {
    const bool text = g.rfind("text_", 0) == 0;
    const bool hit = top.count(g) > 0;
    ++rc.gold;
    rc.hit += hit;
    if (text) {
      ++rc.text_gold;
      rc.text_hit += hit;
    } else {
      ++rc.table_gold;
      rc.table_hit += hit;
    }
  }
  return rc;
}

// Rows: loss level (below, at, above t_loss); columns: score level of O_u.
// Fallback needs (winner not executable) or (loss above and score above),
// and never lands on a non-executable O_u.
char mixed_table(bool winner_exec, bool unified_exec, int loss_level, int score_level) {
  static const char* both_exec[3] = {"KKK", "KKK", "KKF"};
  static const char* winner_broken[3] = {"FFF", "FFF", "FFF"};
  static const char* unified_broken[3] = {"KKK", "KKK", "KKK"};
  static const char* none_exec[3] = {"KKK", "KKK", "KKK"};
  const char* const* grid = winner_exec ? (unified_exec ? both_exec : unified_broken)
                                        : (unified_exec ? winner_broken : none_exec);
  return grid[loss_level][score_level];
}

}  // namespace oracle
