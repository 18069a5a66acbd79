#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "numreason/candidates.hpp"
#include "numreason/document.hpp"
#include "numreason/facts.hpp"
#include "numreason/program.hpp"
#include "numreason/retrieval.hpp"

namespace numreason {

struct ExampleResult {
  std::string doc_id;
  bool exe_ok = false;
  bool prog_ok = false;
  std::string error;
};

struct EvalReport {
  double exe_acc = 0.0;
  double prog_acc = 0.0;
  std::size_t n_evaluated = 0;
  std::size_t n_skipped = 0;
  std::vector<ExampleResult> per_example;  // evaluated examples, dataset order
  std::vector<std::string> skipped;        // ids of skipped examples
};

/// Scores one final program per document. A document without a gold
/// program, a usable gold answer, or a parseable gold program is skipped.
/// A missing, unparseable or failing candidate counts as wrong on both
/// metrics.
EvalReport evaluate_programs(const std::map<std::string, CandidateProgram>& finals,
                             std::span<const FinDocument> docs, double tol = kDefaultAnswerTolerance);

enum class Averaging { macro, micro };

struct RecallRow {
  std::size_t k = 0;
  std::optional<double> overall;
  std::optional<double> table;
  std::optional<double> text;
  // questions (macro) or gold facts (micro) behind each mean
  std::size_t n_overall = 0;
  std::size_t n_table = 0;
  std::size_t n_text = 0;
};

struct RecallReport {
  Granularity granularity = Granularity::cell;
  Averaging averaging = Averaging::macro;
  std::vector<RecallRow> rows;  // one per k, ascending
};

struct GoldFacts {
  std::string doc_id;
  Granularity granularity = Granularity::cell;
  std::set<FactRef> gold;
};

/// Recall of each ranking against its document's gold facts at every k.
/// Macro averaging takes the mean over questions with a non-empty (restricted)
/// gold set; micro pools hits and gold counts. Throws DataError when a
/// ranking and its gold set disagree on granularity.
RecallReport evaluate_retrieval(std::span<const DocRanking> rankings, std::span<const GoldFacts> gold,
                                std::span<const std::size_t> ks, Averaging averaging = Averaging::macro);

struct ReportSet {
  std::vector<std::pair<std::string, EvalReport>> evaluations;
  std::vector<std::pair<std::string, RecallReport>> recalls;
};

/// Aligned plain-text tables. Always prints the accuracy header; the recall
/// table appears only when there are recall reports.
std::string render_text(const ReportSet& reports);
std::string render_json(const ReportSet& reports);

struct LabelAudit {
  std::string doc_id;
  double coverage = 0.0;
  std::size_t positives = 0;
  std::size_t ambiguous = 0;
  std::string error;
};

struct DatasetStats {
  std::size_t documents = 0;
  std::size_t with_program = 0;
  std::size_t with_answer = 0;
  TableDependency table_dependency;
  double mean_coverage = 0.0;
  std::size_t fully_covered = 0;
  std::vector<LabelAudit> labels;  // cell granularity, per question
};

DatasetStats compute_stats(std::span<const FinDocument> docs, const LabelOptions& options = {});
std::string stats_to_json(const DatasetStats& stats);

}  // namespace numreason
