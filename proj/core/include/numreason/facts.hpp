#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "numreason/document.hpp"
#include "numreason/error.hpp"

namespace numreason {

enum class Granularity { row, cell };

std::string_view to_string(Granularity granularity);
/// "row" or "cell"; throws std::invalid_argument otherwise.
Granularity granularity_from_string(std::string_view name);

struct TextRef {
  std::size_t sentence = 0;
  auto operator<=>(const TextRef&) const = default;
};

struct RowRef {
  std::size_t row = 0;
  auto operator<=>(const RowRef&) const = default;
};

struct CellRef {
  std::size_t row = 0;
  std::size_t col = 0;
  auto operator<=>(const CellRef&) const = default;
};

/// Provenance of a fact. Sentences are numbered across pre_text then
/// post_text; table rows and cells never point at the header row or the
/// row-name column.
using FactRef = std::variant<TextRef, RowRef, CellRef>;

enum class FactKind { table, text };

FactKind kind_of(const FactRef& ref);
std::string_view to_string(FactKind kind);

/// "text_7", "table_3" (row) or "cell_3_2". Row keys share the dataset's
/// gold_inds spelling.
std::string fact_key(const FactRef& ref);
/// Inverse of fact_key(); throws DataError on anything else.
FactRef parse_fact_key(std::string_view key);

struct Fact {
  FactRef ref;
  std::string surface;
  std::string doc_id;
  FactKind kind = FactKind::text;

  bool operator==(const Fact&) const = default;
};

class EmptyCellError : public Error {
public:
  using Error::Error;
};

class LabelError : public Error {
public:
  using Error::Error;
};

/// "the {row name} of {header} is {cell} ; the {row name} of ..." over the
/// non-empty cells of `row`. Throws IndexError unless 1 <= row < rows.
std::string linearize_row(const FinDocument& doc, std::size_t row);

/// "the {row name} of {column header} is {cell value}" with the value trimmed
/// and otherwise verbatim. Throws IndexError or EmptyCellError.
std::string linearize_cell(const FinDocument& doc, std::size_t row, std::size_t col);

/// All non-blank sentences in document order, then every non-empty row (or
/// cell) in row-major order.
std::vector<Fact> build_fact_universe(const FinDocument& doc, Granularity granularity);

struct LabelOptions {
  /// Search cells only in rows named by table_<n> gold_inds keys, when any.
  bool restrict_to_gold_rows = true;
  /// Cells whose number also matches elsewhere still count as positives.
  bool include_ambiguous = true;
};

struct GoldLabeling {
  std::set<FactRef> positives;
  std::set<FactRef> ambiguous;
  /// matched_numbers / program_numbers over distinct numeric literals of the
  /// gold program; 1.0 when the program has none.
  double coverage = 1.0;
  std::size_t program_numbers = 0;
  std::size_t matched_numbers = 0;
};

/// Marks facts that carry a number of the gold program. Table aggregation
/// steps mark their whole row. Throws LabelError when the gold program is
/// missing or unparseable.
GoldLabeling label_gold_facts(const FinDocument& doc, Granularity granularity, const LabelOptions& options = {});

struct TrainingPair {
  std::string doc_id;
  std::string question;
  FactRef ref;
  std::string fact_text;
  int label = 0;

  bool operator==(const TrainingPair&) const = default;
};

struct TrainingExport {
  std::vector<TrainingPair> pairs;
  std::vector<std::string> warnings;
};

/// Per document: every positive fact plus min(neg_ratio * positives,
/// available) negatives drawn uniformly without replacement. Sampling is
/// seeded per document from `seed`, so the output depends only on the seed
/// and the input.
TrainingExport export_training_pairs(std::span<const FinDocument> docs, Granularity granularity,
                                     std::size_t neg_ratio, std::uint64_t seed,
                                     const LabelOptions& options = {});

/// One JSON object per line: {doc_id, question, fact_ref, fact_text, label}.
std::string training_pairs_to_jsonl(std::span<const TrainingPair> pairs);

}  // namespace numreason
