#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "numreason/document.hpp"
#include "numreason/error.hpp"
#include "numreason/program.hpp"

namespace numreason {

/// One generator output for one document.
///
/// `source` is normally one of cf, cu, rf, ru: (c)ell or (r)ow retrieval
/// crossed with the loss-reporting (f) or beam-scoring (u) generator.
struct CandidateProgram {
  std::string doc_id;
  std::string source;
  std::string program_text;
  std::optional<double> loss;   // >= 0, lower is better
  std::optional<double> score;  // beam log-probability, higher is better
  bool executable = false;
  bool repaired = false;
  std::optional<Value> value;  // cached on a successful check
  std::string error;           // why the last check failed

  bool operator==(const CandidateProgram&) const = default;
};

struct CandidateSet {
  /// doc_id -> candidates in order of first appearance
  std::map<std::string, std::vector<CandidateProgram>> by_doc;
  std::vector<std::string> warnings;

  std::size_t size() const;
  const CandidateProgram* find(std::string_view doc_id, std::string_view source) const;
};

/// JSONL, one {doc_id, source, program_text, loss?, score?} per line. The
/// executable/repaired/value fields written by later stages are read back
/// when present. A repeated (doc_id, source) replaces the earlier line with
/// a warning. Throws DataError naming the line number.
CandidateSet parse_candidates(std::string_view jsonl);

std::string candidates_to_jsonl(std::span<const CandidateProgram> candidates);
std::vector<CandidateProgram> flatten(const CandidateSet& set);

class DecodeError : public Error {
public:
  using Error::Error;
};

/// Splits canonical program text into generator tokens (operation names,
/// parentheses, commas and argument words) and joins them with `separator`.
std::string encode_separated(std::string_view program_text, std::string_view separator = "$");

/// Inverse of encode_separated(): "add$($1$,$2$)" -> "add(1, 2)". The
/// result is canonical when it parses, otherwise tokens are re-joined with
/// canonical spacing so that operator repair can still run on it. Throws
/// DecodeError when no tokens remain.
std::string decode_separated(std::string_view text, std::string_view separator = "$");

std::size_t levenshtein(std::string_view a, std::string_view b);

inline constexpr std::size_t kMaxRepairDistance = 2;

std::vector<std::string> default_op_vocabulary();

struct RepairResult {
  std::string program_text;
  bool repaired = false;
};

/// Replaces every operation-name token outside `vocab` by the closest
/// vocabulary entry when the edit distance is at most 2. Ties prefer table
/// operations, then the lexicographically smaller name. Argument text is
/// copied through untouched.
RepairResult repair_operators(std::string_view program_text, std::span<const std::string> vocab);
RepairResult repair_operators(std::string_view program_text);

/// Parses and executes the candidate against the document's table and
/// records the outcome; never throws for program or execution failures.
CandidateProgram check_executability(CandidateProgram candidate, const FinDocument& doc);

}  // namespace numreason
