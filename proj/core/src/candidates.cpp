#include "numreason/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "numreason/text.hpp"

namespace numreason {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct_token(char c) { return c == '(' || c == ')' || c == ','; }

// Parentheses and commas are tokens of their own; everything else splits on
// whitespace.
std::vector<std::string> lex(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : s) {
    if (is_space(c)) {
      flush();
    } else if (is_punct_token(c)) {
      flush();
      out.emplace_back(1, c);
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

// Parentheses opened inside an argument belong to a row name and are kept
// as separate words; the call parentheses attach to the operation.
std::string join_tokens(const std::vector<std::string>& tokens) {
  enum class Last { none, word, open, comma, close };
  std::string out;
  Last last = Last::none;
  int depth = 0;
  for (const auto& tok : tokens) {
    if (tok == "(") {
      if (depth == 0) {
        out += '(';
        last = Last::open;
      } else {
        if (last == Last::word) out += ' ';
        out += '(';
        last = Last::word;
      }
      ++depth;
    } else if (tok == ")") {
      if (depth >= 2) {
        if (last == Last::word) out += ' ';
        out += ')';
        last = Last::word;
      } else {
        out += ')';
        last = Last::close;
      }
      depth = std::max(0, depth - 1);
    } else if (tok == ",") {
      out += ", ";
      last = Last::comma;
    } else {
      if (last == Last::word || last == Last::close) out += ' ';
      out += tok;
      last = Last::word;
    }
  }
  return out;
}

struct OpSpan {
  std::size_t begin;
  std::size_t end;
};

// Byte ranges of the operation names: depth-0 text between the start (or a
// step-separating comma) and the next '('.
std::vector<OpSpan> op_spans(std::string_view s) {
  std::vector<OpSpan> spans;
  int depth = 0;
  std::size_t segment = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(') {
      if (depth == 0) {
        std::size_t b = segment, e = i;
        while (b < e && is_space(s[b])) ++b;
        while (e > b && is_space(s[e - 1])) --e;
        if (e > b) spans.push_back({b, e});
      }
      ++depth;
    } else if (c == ')') {
      depth = std::max(0, depth - 1);
      if (depth == 0) segment = i + 1;
    } else if (c == ',' && depth == 0) {
      segment = i + 1;
    }
  }
  return spans;
}

std::string normalize_op_token(std::string_view token) {
  std::string norm = text::to_lower(token);
  std::replace(norm.begin(), norm.end(), '-', '_');
  return norm;
}

std::optional<double> optional_number(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw DataError(std::string("field '") + key + "' must be a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw DataError(std::string("field '") + key + "' must be finite");
  return v;
}

}  // namespace

std::size_t CandidateSet::size() const {
  std::size_t n = 0;
  for (const auto& [_, list] : by_doc) n += list.size();
  return n;
}

const CandidateProgram* CandidateSet::find(std::string_view doc_id, std::string_view source) const {
  auto it = by_doc.find(std::string(doc_id));
  if (it == by_doc.end()) return nullptr;
  for (const auto& c : it->second)
    if (c.source == source) return &c;
  return nullptr;
}

CandidateSet parse_candidates(std::string_view jsonl) {
  CandidateSet set;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  while (offset < jsonl.size()) {
    std::size_t end = jsonl.find('\n', offset);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = text::trim(jsonl.substr(offset, end - offset));
    offset = end + 1;
    ++line_no;
    if (line.empty()) continue;

    const std::string at = "candidate line " + std::to_string(line_no) + ": ";
    CandidateProgram c;
    try {
      auto obj = nlohmann::json::parse(line);
      if (!obj.is_object()) throw DataError("expected a JSON object");
      for (const char* key : {"doc_id", "source", "program_text"}) {
        auto it = obj.find(key);
        if (it == obj.end() || !it->is_string()) throw DataError(std::string("missing string field '") + key + "'");
      }
      c.doc_id = obj["doc_id"].get<std::string>();
      c.source = obj["source"].get<std::string>();
      c.program_text = obj["program_text"].get<std::string>();
      c.loss = optional_number(obj, "loss");
      c.score = optional_number(obj, "score");
      if (c.loss && *c.loss < 0.0) throw DataError("loss must be non-negative");
      if (auto it = obj.find("executable"); it != obj.end() && it->is_boolean()) c.executable = it->get<bool>();
      if (auto it = obj.find("repaired"); it != obj.end() && it->is_boolean()) c.repaired = it->get<bool>();
      if (auto it = obj.find("value"); it != obj.end() && !it->is_null()) {
        if (it->is_number()) {
          c.value = Value{it->get<double>()};
        } else if (it->is_string() && (*it == "yes" || *it == "no")) {
          c.value = Value{*it == "yes" ? YesNo::yes : YesNo::no};
        }
      }
      if (auto it = obj.find("error"); it != obj.end() && it->is_string()) c.error = it->get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(at + e.what());
    } catch (const DataError& e) {
      throw DataError(at + e.what());
    }

    auto& list = set.by_doc[c.doc_id];
    auto dup = std::find_if(list.begin(), list.end(), [&](const CandidateProgram& x) { return x.source == c.source; });
    if (dup != list.end()) {
      set.warnings.push_back(at + "duplicate candidate for doc '" + c.doc_id + "' source '" + c.source +
                             "'; keeping the later one");
      *dup = std::move(c);
    } else {
      list.push_back(std::move(c));
    }
  }
  return set;
}

std::string candidates_to_jsonl(std::span<const CandidateProgram> candidates) {
  std::string out;
  for (const auto& c : candidates) {
    nlohmann::ordered_json line{{"doc_id", c.doc_id}, {"source", c.source}, {"program_text", c.program_text}};
    if (c.loss) line["loss"] = *c.loss;
    if (c.score) line["score"] = *c.score;
    line["executable"] = c.executable;
    line["repaired"] = c.repaired;
    if (c.value) {
      if (const auto* d = std::get_if<double>(&*c.value)) {
        line["value"] = *d;
      } else {
        line["value"] = format_value(*c.value);
      }
    }
    if (!c.error.empty()) line["error"] = c.error;
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<CandidateProgram> flatten(const CandidateSet& set) {
  std::vector<CandidateProgram> out;
  for (const auto& [_, list] : set.by_doc) out.insert(out.end(), list.begin(), list.end());
  return out;
}

std::string encode_separated(std::string_view program_text, std::string_view separator) {
  std::string canonical;
  try {
    canonical = canonicalize_program(program_text);
  } catch (const ProgramError&) {
    canonical = std::string(program_text);
  }
  std::string out;
  for (const auto& tok : lex(canonical)) {
    if (!out.empty()) out += separator;
    out += tok;
  }
  return out;
}

std::string decode_separated(std::string_view encoded, std::string_view separator) {
  if (separator.empty()) throw std::invalid_argument("decode_separated: empty separator");
  std::vector<std::string> tokens;
  std::size_t offset = 0;
  while (offset <= encoded.size()) {
    std::size_t end = encoded.find(separator, offset);
    if (end == std::string_view::npos) end = encoded.size();
    for (auto& tok : lex(encoded.substr(offset, end - offset))) tokens.push_back(std::move(tok));
    offset = end + separator.size();
  }
  if (tokens.empty()) throw DecodeError("no program tokens in '" + std::string(encoded) + "'");
  std::string joined = join_tokens(tokens);
  try {
    return canonicalize_program(joined);
  } catch (const ProgramError&) {
    return joined;
  }
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<std::string> default_op_vocabulary() {
  auto names = op_vocabulary();
  return {names.begin(), names.end()};
}

RepairResult repair_operators(std::string_view program_text, std::span<const std::string> vocab) {
  RepairResult result{std::string(program_text), false};
  auto spans = op_spans(program_text);
  // Rewrite back to front so earlier offsets stay valid.
  for (auto it = spans.rbegin(); it != spans.rend(); ++it) {
    const std::string token = normalize_op_token(program_text.substr(it->begin, it->end - it->begin));
    if (std::find(vocab.begin(), vocab.end(), token) != vocab.end()) continue;

    const std::string* best = nullptr;
    std::size_t best_distance = 0;
    for (const auto& entry : vocab) {
      const std::size_t d = levenshtein(token, entry);
      bool better = best == nullptr || d < best_distance;
      if (!better && d == best_distance) {
        const bool entry_table = entry.starts_with("table_");
        const bool best_table = best->starts_with("table_");
        better = entry_table != best_table ? entry_table : entry < *best;
      }
      if (better) {
        best = &entry;
        best_distance = d;
      }
    }
    if (best == nullptr || best_distance > kMaxRepairDistance) continue;
    result.program_text.replace(it->begin, it->end - it->begin, *best);
    result.repaired = true;
  }
  return result;
}

RepairResult repair_operators(std::string_view program_text) {
  static const std::vector<std::string> vocab = default_op_vocabulary();
  return repair_operators(program_text, vocab);
}

CandidateProgram check_executability(CandidateProgram candidate, const FinDocument& doc) {
  candidate.executable = false;
  candidate.value.reset();
  candidate.error.clear();
  try {
    candidate.value = execute(parse_program(candidate.program_text), doc.table);
    candidate.executable = true;
  } catch (const ProgramError& e) {
    candidate.error = std::string(to_string(e.kind())) + ": " + e.what();
  } catch (const ExecError& e) {
    candidate.error = std::string(to_string(e.kind())) + ": " + e.what();
  }
  return candidate;
}

}  // namespace numreason
