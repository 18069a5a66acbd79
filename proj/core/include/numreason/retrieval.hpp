#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "numreason/document.hpp"
#include "numreason/error.hpp"
#include "numreason/facts.hpp"

namespace numreason {

/// Relevance of a fact to a question; higher is more relevant. Must be
/// deterministic per (question, fact) and safe to call concurrently.
class Scorer {
public:
  virtual ~Scorer() = default;
  virtual double score(std::string_view question, const Fact& fact) const = 0;
};

/// TF-IDF cosine similarity over lowercased alphanumeric tokens.
///
/// Document frequencies come from the fact universe handed to the
/// constructor (one financial document), with smoothed weights
/// idf(t) = ln((1 + N) / (1 + df(t))) + 1, so every term has a positive
/// weight and identical strings score exactly 1.
class LexicalScorer final : public Scorer {
public:
  explicit LexicalScorer(std::span<const Fact> universe);

  double score(std::string_view question, const Fact& fact) const override;
  double idf(const std::string& term) const;

private:
  std::unordered_map<std::string, std::size_t> doc_freq_;
  std::size_t universe_size_ = 0;
};

/// One-shot form of LexicalScorer.
double lexical_score(std::string_view question, const Fact& fact, std::span<const Fact> universe);

/// Oracle: 1 for gold facts, 0 otherwise.
class GoldScorer final : public Scorer {
public:
  explicit GoldScorer(std::set<FactRef> gold) : gold_(std::move(gold)) {}
  double score(std::string_view, const Fact& fact) const override { return gold_.count(fact.ref) ? 1.0 : 0.0; }

private:
  std::set<FactRef> gold_;
};

class ScorerError : public Error {
public:
  using Error::Error;
};

struct ScoredFact {
  Fact fact;
  double score = 0.0;
  std::size_t position = 0;  // index in the fact universe
};

/// Descending score; equal scores keep fact-universe order.
using RankedFacts = std::vector<ScoredFact>;

/// Throws ScorerError naming the fact when a score is not finite, and
/// std::invalid_argument for an empty fact list.
RankedFacts rank(std::string_view question, std::span<const Fact> facts, const Scorer& scorer);

struct RetrievalConfig {
  Granularity granularity = Granularity::cell;
  std::size_t top_k = 5;
  std::size_t token_budget = 512;
  std::string separator = " [SEP] ";
  std::string fact_joiner = " ; ";

  /// top_k = 3 for rows and 5 for cells, budget 512.
  static RetrievalConfig defaults_for(Granularity granularity);
  /// Throws std::invalid_argument unless top_k >= 1 and token_budget >= 32.
  void validate() const;
};

/// Best top_k facts that fit the token budget together with the question,
/// returned in document order. Budget is counted in whitespace tokens of the
/// assembled generator input; the first fact that would overflow it and
/// everything ranked below it are dropped.
std::vector<Fact> select_top_k(std::string_view question, const RankedFacts& ranked, const RetrievalConfig& config);

/// "question [SEP] fact ; fact ; ..." or the question alone.
std::string assemble_generator_input(std::string_view question, std::span<const Fact> selected,
                                     const RetrievalConfig& config = {});

struct RecallAtK {
  std::optional<double> overall;
  std::optional<double> table;
  std::optional<double> text;
  std::size_t gold_table = 0;
  std::size_t gold_text = 0;
  std::size_t hit_table = 0;
  std::size_t hit_text = 0;

  std::size_t gold_total() const { return gold_table + gold_text; }
  std::size_t hit_total() const { return hit_table + hit_text; }
};

/// |gold ∩ top-k| / |gold|, plus the same ratio restricted to table-kind and
/// text-kind gold facts. A ratio is absent when its gold set is empty.
RecallAtK recall_at_k(std::span<const FactRef> ranked, const std::set<FactRef>& gold, std::size_t k);
RecallAtK recall_at_k(const RankedFacts& ranked, const std::set<FactRef>& gold, std::size_t k);

struct TableDependency {
  double fraction = 0.0;
  std::size_t counted = 0;
  std::size_t table_dependent = 0;
  std::size_t excluded = 0;  // missing or unparseable gold program
};

/// Share of questions whose gold program uses a table aggregation or whose
/// row-level gold facts include a table row.
TableDependency table_dependency_stat(std::span<const FinDocument> docs, const LabelOptions& options = {});

/// Ranking artifact: {doc_id, granularity, ranked: [{fact_ref, score}]} per
/// line. Also the ingestion format for out-of-process scorers.
struct DocRanking {
  std::string doc_id;
  Granularity granularity = Granularity::cell;
  std::vector<std::pair<FactRef, double>> ranked;

  std::vector<FactRef> refs() const;
};

DocRanking to_doc_ranking(const std::string& doc_id, Granularity granularity, const RankedFacts& ranked);
std::string rankings_to_jsonl(std::span<const DocRanking> rankings);
/// Throws DataError with the line number on malformed input.
std::vector<DocRanking> parse_rankings(std::string_view jsonl);

/// Serves scores from a ranking artifact, keyed by (doc_id, fact_ref).
/// Facts missing from the artifact raise ScorerError.
class PrecomputedScorer final : public Scorer {
public:
  PrecomputedScorer(std::span<const DocRanking> rankings, Granularity granularity);
  double score(std::string_view question, const Fact& fact) const override;

private:
  std::map<std::string, std::map<FactRef, double>, std::less<>> scores_;
};

}  // namespace numreason
