#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "numreason/error.hpp"

namespace numreason {

using TableRow = std::vector<std::string>;
/// Row 0 holds the column headers, column 0 the row names.
using Table = std::vector<TableRow>;

/// Gold answer exactly as it appears in the file: a number, or a string that
/// should be "yes" or "no". Validation decides whether it is acceptable.
using AnswerLiteral = std::variant<double, std::string>;

struct Question {
  std::string text;
  std::optional<std::string> program;
  std::optional<AnswerLiteral> exe_ans;
  // "table_3" / "text_7" -> supporting fact text
  std::map<std::string, std::string> gold_inds;

  bool operator==(const Question&) const = default;
};

struct FinDocument {
  std::string id;
  std::vector<std::string> pre_text;
  std::vector<std::string> post_text;
  Table table;
  Question question;

  /// Sentences are indexed across pre_text followed by post_text.
  std::size_t sentence_count() const { return pre_text.size() + post_text.size(); }
  const std::string& sentence(std::size_t index) const;

  std::size_t row_count() const { return table.size(); }
  std::size_t column_count() const { return table.empty() ? 0 : table.front().size(); }

  bool operator==(const FinDocument&) const = default;
};

struct Violation {
  std::string doc_id;
  std::string path;     // e.g. "table[2]", "qa.exe_ans"
  std::string message;  // e.g. "empty id"

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::size_t documents = 0;
  std::size_t valid_documents = 0;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

/// Decodes a JSON array or a JSONL stream (detected from the first
/// non-whitespace byte) into documents without checking invariants.
/// Throws DataError on malformed JSON (with the byte offset) or on values of
/// the wrong JSON type.
std::vector<FinDocument> read_documents(std::string_view raw);

/// read_documents() followed by validate_dataset(); throws DataError naming
/// the first offending document when any invariant is violated.
std::vector<FinDocument> parse_dataset(std::string_view raw);

/// Reports every invariant violation; never throws.
ValidationReport validate_dataset(std::span<const FinDocument> docs);

/// JSON array in the dataset schema. parse_dataset() inverts it.
std::string serialize_dataset(std::span<const FinDocument> docs);

std::string to_json(const ValidationReport& report);

/// True iff key has the form (table|text)_<nonneg int>.
bool is_gold_ind_key(std::string_view key);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

std::vector<FinDocument> load_dataset(const std::filesystem::path& path);

}  // namespace numreason
