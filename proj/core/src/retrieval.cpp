#include "numreason/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "numreason/program.hpp"
#include "numreason/text.hpp"

namespace numreason {
namespace {

using TermCounts = std::map<std::string, double>;

TermCounts term_counts(std::string_view s) {
  TermCounts counts;
  for (auto& token : text::alnum_tokens(s)) counts[std::move(token)] += 1.0;
  return counts;
}

bool ref_fits(const FactRef& ref, Granularity granularity) {
  if (std::holds_alternative<TextRef>(ref)) return true;
  return granularity == Granularity::row ? std::holds_alternative<RowRef>(ref) : std::holds_alternative<CellRef>(ref);
}

}  // namespace

LexicalScorer::LexicalScorer(std::span<const Fact> universe) : universe_size_(universe.size()) {
  for (const auto& fact : universe) {
    for (const auto& [term, _] : term_counts(fact.surface)) ++doc_freq_[term];
  }
}

double LexicalScorer::idf(const std::string& term) const {
  auto it = doc_freq_.find(term);
  const double df = it == doc_freq_.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((1.0 + static_cast<double>(universe_size_)) / (1.0 + df)) + 1.0;
}

double LexicalScorer::score(std::string_view question, const Fact& fact) const {
  const TermCounts q = term_counts(question);
  const TermCounts f = term_counts(fact.surface);
  if (q.empty() || f.empty()) return 0.0;

  double dot = 0.0, q_norm = 0.0, f_norm = 0.0;
  for (const auto& [term, tf] : q) {
    const double w = tf * idf(term);
    q_norm += w * w;
    if (auto it = f.find(term); it != f.end()) dot += w * it->second * idf(term);
  }
  for (const auto& [term, tf] : f) {
    const double w = tf * idf(term);
    f_norm += w * w;
  }
  if (dot == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(q_norm) * std::sqrt(f_norm)), 0.0, 1.0);
}

double lexical_score(std::string_view question, const Fact& fact, std::span<const Fact> universe) {
  return LexicalScorer(universe).score(question, fact);
}

RankedFacts rank(std::string_view question, std::span<const Fact> facts, const Scorer& scorer) {
  if (facts.empty()) throw std::invalid_argument("rank: empty fact list");
  RankedFacts ranked;
  ranked.reserve(facts.size());
  for (std::size_t i = 0; i < facts.size(); ++i) {
    const double s = scorer.score(question, facts[i]);
    if (!std::isfinite(s))
      throw ScorerError("scorer returned a non-finite score for fact " + fact_key(facts[i].ref) + " of document '" +
                        facts[i].doc_id + "'");
    ranked.push_back({facts[i], s, i});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const ScoredFact& a, const ScoredFact& b) { return a.score > b.score; });
  return ranked;
}

RetrievalConfig RetrievalConfig::defaults_for(Granularity granularity) {
  RetrievalConfig config;
  config.granularity = granularity;
  config.top_k = granularity == Granularity::row ? 3 : 5;
  return config;
}

void RetrievalConfig::validate() const {
  if (top_k < 1) throw std::invalid_argument("top_k must be at least 1");
  if (token_budget < 32) throw std::invalid_argument("token_budget must be at least 32");
}

std::vector<Fact> select_top_k(std::string_view question, const RankedFacts& ranked, const RetrievalConfig& config) {
  config.validate();
  std::vector<const ScoredFact*> chosen;
  std::vector<Fact> facts;
  const std::size_t limit = std::min(config.top_k, ranked.size());
  for (std::size_t i = 0; i < limit; ++i) {
    facts.push_back(ranked[i].fact);
    if (text::count_whitespace_tokens(assemble_generator_input(question, facts, config)) > config.token_budget) {
      facts.pop_back();
      break;
    }
    chosen.push_back(&ranked[i]);
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const ScoredFact* a, const ScoredFact* b) { return a->position < b->position; });
  std::vector<Fact> out;
  out.reserve(chosen.size());
  for (const auto* sf : chosen) out.push_back(sf->fact);
  return out;
}

std::string assemble_generator_input(std::string_view question, std::span<const Fact> selected,
                                     const RetrievalConfig& config) {
  std::string out(question);
  if (selected.empty()) return out;
  out += config.separator;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (i > 0) out += config.fact_joiner;
    out += selected[i].surface;
  }
  return out;
}

RecallAtK recall_at_k(std::span<const FactRef> ranked, const std::set<FactRef>& gold, std::size_t k) {
  if (k < 1) throw std::invalid_argument("recall_at_k: k must be at least 1");
  const std::size_t limit = std::min(k, ranked.size());
  std::set<FactRef> top(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(limit));

  RecallAtK r;
  for (const auto& ref : gold) {
    const bool hit = top.count(ref) > 0;
    if (kind_of(ref) == FactKind::table) {
      ++r.gold_table;
      r.hit_table += hit;
    } else {
      ++r.gold_text;
      r.hit_text += hit;
    }
  }
  auto ratio = [](std::size_t hits, std::size_t total) -> std::optional<double> {
    if (total == 0) return std::nullopt;
    return static_cast<double>(hits) / static_cast<double>(total);
  };
  r.overall = ratio(r.hit_total(), r.gold_total());
  r.table = ratio(r.hit_table, r.gold_table);
  r.text = ratio(r.hit_text, r.gold_text);
  return r;
}

RecallAtK recall_at_k(const RankedFacts& ranked, const std::set<FactRef>& gold, std::size_t k) {
  std::vector<FactRef> refs;
  refs.reserve(ranked.size());
  for (const auto& sf : ranked) refs.push_back(sf.fact.ref);
  return recall_at_k(refs, gold, k);
}

TableDependency table_dependency_stat(std::span<const FinDocument> docs, const LabelOptions& options) {
  TableDependency out;
  for (const auto& doc : docs) {
    if (!doc.question.program) {
      ++out.excluded;
      continue;
    }
    Program program;
    try {
      program = parse_program(*doc.question.program);
    } catch (const ProgramError&) {
      ++out.excluded;
      continue;
    }
    bool dependent = std::any_of(program.steps.begin(), program.steps.end(),
                                 [](const Step& s) { return is_table_op(s.op); });
    if (!dependent) {
      const auto labels = label_gold_facts(doc, Granularity::row, options);
      dependent = std::any_of(labels.positives.begin(), labels.positives.end(),
                              [](const FactRef& ref) { return kind_of(ref) == FactKind::table; });
    }
    ++out.counted;
    out.table_dependent += dependent;
  }
  out.fraction = out.counted == 0 ? 0.0 : static_cast<double>(out.table_dependent) / static_cast<double>(out.counted);
  return out;
}

std::vector<FactRef> DocRanking::refs() const {
  std::vector<FactRef> out;
  out.reserve(ranked.size());
  for (const auto& [ref, _] : ranked) out.push_back(ref);
  return out;
}

DocRanking to_doc_ranking(const std::string& doc_id, Granularity granularity, const RankedFacts& ranked) {
  DocRanking out{doc_id, granularity, {}};
  out.ranked.reserve(ranked.size());
  for (const auto& sf : ranked) out.ranked.emplace_back(sf.fact.ref, sf.score);
  return out;
}

std::string rankings_to_jsonl(std::span<const DocRanking> rankings) {
  std::string out;
  for (const auto& r : rankings) {
    nlohmann::ordered_json items = nlohmann::ordered_json::array();
    for (const auto& [ref, score] : r.ranked) items.push_back({{"fact_ref", fact_key(ref)}, {"score", score}});
    nlohmann::ordered_json line{
        {"doc_id", r.doc_id}, {"granularity", std::string(to_string(r.granularity))}, {"ranked", std::move(items)}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<DocRanking> parse_rankings(std::string_view jsonl) {
  std::vector<DocRanking> out;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  while (offset < jsonl.size()) {
    std::size_t end = jsonl.find('\n', offset);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = text::trim(jsonl.substr(offset, end - offset));
    offset = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::string at = "ranking line " + std::to_string(line_no) + ": ";
    try {
      auto obj = nlohmann::json::parse(line);
      DocRanking r;
      r.doc_id = obj.at("doc_id").get<std::string>();
      r.granularity = granularity_from_string(obj.at("granularity").get<std::string>());
      for (const auto& item : obj.at("ranked")) {
        FactRef ref = parse_fact_key(item.at("fact_ref").get<std::string>());
        if (!ref_fits(ref, r.granularity))
          throw DataError(fact_key(ref) + " does not fit granularity " + std::string(to_string(r.granularity)));
        const double score = item.at("score").get<double>();
        r.ranked.emplace_back(ref, score);
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(at + e.what());
    } catch (const std::invalid_argument& e) {
      throw DataError(at + e.what());
    } catch (const DataError& e) {
      throw DataError(at + e.what());
    }
  }
  return out;
}

PrecomputedScorer::PrecomputedScorer(std::span<const DocRanking> rankings, Granularity granularity) {
  for (const auto& r : rankings) {
    if (r.granularity != granularity)
      throw DataError("ranking for '" + r.doc_id + "' has granularity " + std::string(to_string(r.granularity)) +
                      ", expected " + std::string(to_string(granularity)));
    auto& scores = scores_[r.doc_id];
    for (const auto& [ref, score] : r.ranked) scores[ref] = score;
  }
}

double PrecomputedScorer::score(std::string_view, const Fact& fact) const {
  auto doc = scores_.find(fact.doc_id);
  if (doc == scores_.end()) throw ScorerError("no precomputed scores for document '" + fact.doc_id + "'");
  auto it = doc->second.find(fact.ref);
  if (it == doc->second.end())
    throw ScorerError("no precomputed score for fact " + fact_key(fact.ref) + " of document '" + fact.doc_id + "'");
  return it->second;
}

}  // namespace numreason
