#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "numreason/candidates.hpp"
#include "numreason/document.hpp"
#include "numreason/ensemble.hpp"
#include "numreason/evaluation.hpp"
#include "numreason/facts.hpp"
#include "numreason/retrieval.hpp"

// File-to-file pipeline stages. Each CLI subcommand is one of these, and
// run_pipeline() chains them over a single output directory.
namespace numreason::stages {

namespace fs = std::filesystem;

/// Decodes the dataset without enforcing invariants, writes the validation
/// report and returns it. Malformed JSON still throws DataError.
ValidationReport ingest(const fs::path& dataset, const fs::path& report_out);

/// Labels artifact, one line per document:
/// {doc_id, granularity, positives, ambiguous, coverage, program_numbers,
///  matched_numbers} or {doc_id, granularity, error}.
void label(const fs::path& dataset, Granularity granularity, const LabelOptions& options, const fs::path& out,
           std::size_t jobs = 1);

std::vector<GoldFacts> parse_labels(std::string_view jsonl);

/// Returns the warnings for skipped documents.
std::vector<std::string> export_training(const fs::path& dataset, Granularity granularity, std::size_t neg_ratio,
                                         std::uint64_t seed, const LabelOptions& options, const fs::path& out);

/// `scorer` is "lexical", "oracle" (gold labels) or "file:<ranking.jsonl>".
void retrieve(const fs::path& dataset, Granularity granularity, const std::string& scorer,
              const LabelOptions& options, const fs::path& out, std::size_t jobs = 1);

/// Generator inputs: {doc_id, selected: [fact_ref], input} per line.
void assemble(const fs::path& dataset, const fs::path& ranking, const RetrievalConfig& config,
              const fs::path& out);

/// Concatenates candidate files keyed by source; every line's source must
/// equal its key. Returns parse warnings.
std::vector<std::string> collect_candidates(const std::map<std::string, fs::path>& files, const fs::path& out);

struct RepairOptions {
  /// "default" or a file with one operation name per line.
  std::string vocab = "default";
  /// Decode generator-separated text with this symbol first; empty = off.
  std::string decode_separator;
  /// Only repair these sources; empty = all.
  std::vector<std::string> sources;
};

std::vector<std::string> repair(const fs::path& candidates, const RepairOptions& options, const fs::path& out);

void check(const fs::path& candidates, const fs::path& dataset, const fs::path& out, std::size_t jobs = 1);

enum class Strategy { loss, score, mixed };
Strategy strategy_from_string(std::string_view name);

/// Decisions artifact: {doc_id, chosen_source, program_text, rule_fired,
/// trace} per document. When `dataset` is given executability is re-checked
/// instead of trusting the candidate file.
void ensemble(const fs::path& candidates, Strategy strategy, const EnsembleConfig& config, const fs::path& out,
              const std::optional<fs::path>& dataset = std::nullopt);

struct RecallInputs {
  fs::path ranking;
  fs::path labels;
  std::vector<std::size_t> ks{1, 3, 5, 10};
  Averaging averaging = Averaging::macro;
};

/// Final programs come from any JSONL with doc_id and program_text per line
/// (decision or candidate files). Writes the JSON report to `out_json` and
/// the text table next to it with a .txt extension.
ReportSet evaluate(const fs::path& finals, const fs::path& dataset, double tol, const fs::path& out_json,
                   const std::optional<RecallInputs>& recall = std::nullopt);

void stats(const fs::path& dataset, const LabelOptions& options, const fs::path& out);

}  // namespace numreason::stages
