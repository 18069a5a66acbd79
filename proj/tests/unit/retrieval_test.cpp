#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "numreason/retrieval.hpp"
#include "numreason/text.hpp"
#include "oracle.hpp"

using namespace numreason;

namespace {

std::vector<Fact> facts_of(const std::vector<std::string>& surfaces) {
  std::vector<Fact> out;
  for (std::size_t i = 0; i < surfaces.size(); ++i) out.push_back({TextRef{i}, surfaces[i], "d", FactKind::text});
  return out;
}

class FixedScorer final : public Scorer {
public:
  explicit FixedScorer(std::vector<double> s) : scores_(std::move(s)) {}
  double score(std::string_view, const Fact& f) const override { return scores_[std::get<TextRef>(f.ref).sentence]; }

private:
  std::vector<double> scores_;
};

RankedFacts ranked_words(std::size_t n, std::size_t words_each) {
  std::vector<std::string> s;
  for (std::size_t i = 0; i < n; ++i) {
    std::string f;
    for (std::size_t w = 0; w < words_each; ++w) f += (w ? " w" : "w") + std::to_string(i);
    s.push_back(f);
  }
  std::vector<double> scores;
  for (std::size_t i = 0; i < n; ++i) scores.push_back(static_cast<double>((i * 7) % n));
  return rank("q", facts_of(s), FixedScorer(scores));
}

}  // namespace

TEST(LexicalScore, IdenticalAndDisjoint) {
  auto u = facts_of({"net sales rose in 2019", "goodwill impairment"});
  EXPECT_NEAR(lexical_score("net sales rose in 2019", u[0], u), 1.0, 1e-9);
  EXPECT_EQ(lexical_score("cash dividends", u[0], u), 0.0);
}

// Reference values computed outside the library with a plain Python TF-IDF:
// idf = ln((1 + N) / (1 + df)) + 1, raw term counts, cosine.
TEST(LexicalScore, FrozenReferenceValues) {
  auto u = facts_of({"the revenue of 2019 is 120", "the goodwill of 2019 is 45", "revenue grew in 2019 ."});
  LexicalScorer s(u);
  EXPECT_NEAR(s.idf("the"), 1.2876820724517808, 1e-12);
  EXPECT_NEAR(s.idf("goodwill"), 1.6931471805599454, 1e-12);
  EXPECT_NEAR(s.idf("2019"), 1.0, 1e-12);
  EXPECT_NEAR(s.idf("what"), 2.3862943611198908, 1e-12);
  EXPECT_NEAR(s.score("goodwill of 2019", u[0]), 0.34900785028228276, 1e-12);
  EXPECT_NEAR(s.score("goodwill of 2019", u[1]), 0.68694534040349697, 1e-12);
  EXPECT_NEAR(s.score("goodwill of 2019", u[2]), 0.14686420843059289, 1e-12);
  auto r = rank("goodwill of 2019", u, s);
  EXPECT_EQ(r.front().position, 1u);
}

TEST(Rank, SingleFact) {
  auto u = facts_of({"only"});
  auto r = rank("anything", u, LexicalScorer(u));
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].position, 0u);
  EXPECT_THROW(rank("q", std::span<const Fact>{}, LexicalScorer(u)), std::invalid_argument);
}

TEST(Rank, OracleScorerPutsGoldFirst) {
  auto u = facts_of({"a", "b", "c", "d", "e"});
  auto r = rank("q", u, GoldScorer({TextRef{3}, TextRef{1}}));
  EXPECT_EQ(r[0].position, 1u);
  EXPECT_EQ(r[1].position, 3u);
  EXPECT_EQ(r[2].position, 0u);
}

TEST(Rank, TiesKeepUniverseOrder) {
  auto u = facts_of({"a", "b", "c"});
  auto r = rank("q", u, FixedScorer({0.5, 0.9, 0.5}));
  EXPECT_EQ(r[0].position, 1u);
  EXPECT_EQ(r[1].position, 0u);
  EXPECT_EQ(r[2].position, 2u);
}

TEST(Rank, NonFiniteScoreIsError) {
  auto u = facts_of({"a", "b"});
  EXPECT_THROW(rank("q", u, FixedScorer({0.1, std::nan("")})), ScorerError);
}

TEST(SelectTopK, DocumentOrder) {
  auto r = ranked_words(10, 1);
  RetrievalConfig cfg;
  cfg.top_k = 3;
  auto sel = select_top_k("q", r, cfg);
  ASSERT_EQ(sel.size(), 3u);
  for (std::size_t i = 1; i < sel.size(); ++i)
    EXPECT_LT(std::get<TextRef>(sel[i - 1].ref).sentence, std::get<TextRef>(sel[i].ref).sentence);
}

TEST(SelectTopK, BudgetCap) {
  // Question (1) + separator (1) + 4 facts of 10 words + 3 joiners = 45.
  auto r = ranked_words(10, 10);
  RetrievalConfig cfg;
  cfg.top_k = 5;
  cfg.token_budget = 45;
  EXPECT_EQ(select_top_k("q", r, cfg).size(), 4u);
  cfg.token_budget = 56;
  EXPECT_EQ(select_top_k("q", r, cfg).size(), 5u);
}

TEST(SelectTopK, KLargerThanUniverse) {
  auto r = ranked_words(3, 1);
  RetrievalConfig cfg;
  cfg.top_k = 10;
  EXPECT_EQ(select_top_k("q", r, cfg).size(), 3u);
}

TEST(SelectTopK, ConfigValidation) {
  RetrievalConfig cfg;
  cfg.top_k = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_EQ(RetrievalConfig::defaults_for(Granularity::row).top_k, 3u);
  EXPECT_EQ(RetrievalConfig::defaults_for(Granularity::cell).top_k, 5u);
}

TEST(AssembleInput, Shapes) {
  auto u = facts_of({"f1", "f2"});
  EXPECT_EQ(assemble_generator_input("Q", {}), "Q");
  EXPECT_EQ(assemble_generator_input("Q", u), "Q [SEP] f1 ; f2");
  EXPECT_EQ(assemble_generator_input("Q", u), assemble_generator_input("Q", u));
}

TEST(RecallAtK, Examples) {
  std::vector<FactRef> ranked{TextRef{0}, RowRef{1}, RowRef{2}, TextRef{3}};
  auto r = recall_at_k(std::span<const FactRef>(ranked), {TextRef{0}, TextRef{3}}, 3);
  EXPECT_EQ(r.overall, 0.5);
  EXPECT_EQ(recall_at_k(std::span<const FactRef>(ranked), {RowRef{1}, RowRef{2}}, 3).overall, 1.0);

  auto split = recall_at_k(std::span<const FactRef>(ranked), {RowRef{1}, TextRef{3}}, 2);
  EXPECT_EQ(split.table, 1.0);
  EXPECT_EQ(split.text, 0.0);
  EXPECT_EQ(split.overall, 0.5);

  auto no_text = recall_at_k(std::span<const FactRef>(ranked), {RowRef{1}}, 1);
  EXPECT_FALSE(no_text.text);
  EXPECT_EQ(no_text.overall, 0.0);
  EXPECT_FALSE(recall_at_k(std::span<const FactRef>(ranked), {}, 1).overall);
}

TEST(RecallProperty, MatchesBruteForceAndIsMonotone) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 20;
    std::vector<FactRef> refs;
    for (std::size_t i = 0; i < n; ++i) refs.push_back(rng() % 2 ? FactRef(TextRef{i}) : FactRef(CellRef{i, 1}));
    std::shuffle(refs.begin(), refs.end(), rng);
    std::set<FactRef> gold;
    for (const auto& r : refs)
      if (rng() % 3 == 0) gold.insert(r);
    std::vector<std::string> keys;
    std::set<std::string> gold_keys;
    for (const auto& r : refs) keys.push_back(fact_key(r));
    for (const auto& g : gold) gold_keys.insert(fact_key(g));

    double prev = -1;
    for (std::size_t k = 1; k <= n + 1; ++k) {
      auto got = recall_at_k(std::span<const FactRef>(refs), gold, k);
      auto want = oracle::brute_recall(keys, gold_keys, k);
      EXPECT_EQ(got.gold_total(), want.gold);
      EXPECT_EQ(got.hit_total(), want.hit);
      EXPECT_EQ(got.gold_table + got.gold_text, got.gold_total());
      if (want.gold) {
        EXPECT_EQ(*got.overall, static_cast<double>(want.hit) / static_cast<double>(want.gold));
        EXPECT_GE(*got.overall, prev);
        prev = *got.overall;
      }
    }
  }
}

TEST(RecallProperty, OracleScorerFullRecall) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> s;
    const std::size_t n = 1 + rng() % 15;
    for (std::size_t i = 0; i < n; ++i) s.push_back("fact " + std::to_string(i));
    auto u = facts_of(s);
    std::set<FactRef> gold;
    for (const auto& f : u)
      if (rng() % 4 == 0) gold.insert(f.ref);
    auto r = rank("q", u, GoldScorer(gold));
    for (std::size_t k = gold.size(); k <= n && !gold.empty(); ++k) EXPECT_EQ(recall_at_k(r, gold, k).overall, 1.0);
  }
}

TEST(SelectProperty, SubsetOfTopKInDocumentOrder) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> s;
    std::vector<double> scores;
    const std::size_t n = 1 + rng() % 12;
    for (std::size_t i = 0; i < n; ++i) {
      s.push_back(std::string(1 + rng() % 30, 'x'));
      for (std::size_t w = rng() % 20; w > 0; --w) s.back() += " y";
      scores.push_back(static_cast<double>(rng() % 5));
    }
    auto u = facts_of(s);
    auto r = rank("a question", u, FixedScorer(scores));
    RetrievalConfig cfg;
    cfg.top_k = 1 + rng() % 6;
    cfg.token_budget = 32 + rng() % 60;
    auto sel = select_top_k("a question", r, cfg);
    std::set<std::size_t> top;
    for (std::size_t i = 0; i < std::min(cfg.top_k, r.size()); ++i) top.insert(r[i].position);
    std::size_t prev = 0;
    for (std::size_t i = 0; i < sel.size(); ++i) {
      const auto pos = std::get<TextRef>(sel[i].ref).sentence;
      EXPECT_TRUE(top.count(pos));
      if (i) EXPECT_GT(pos, prev);
      prev = pos;
    }
    EXPECT_LE(text::count_whitespace_tokens(assemble_generator_input("a question", sel, cfg)), cfg.token_budget);
  }
}

TEST(TableDependency, Extremes) {
  using testing_util::make_doc;
  Table t{{"", "a"}, {"revenue", "3"}};
  std::vector<FinDocument> text_only{make_doc("a", t, {"it was 7 ."}, "add(7, 1)"),
                                     make_doc("b", t, {"it was 9 ."}, "subtract(9, 1)")};
  EXPECT_EQ(table_dependency_stat(text_only).fraction, 0.0);
  std::vector<FinDocument> tables{make_doc("a", t, {}, "table_sum(revenue)"), make_doc("b", t, {}, "table_max(revenue)")};
  EXPECT_EQ(table_dependency_stat(tables).fraction, 1.0);
  tables.push_back(make_doc("c", t));
  EXPECT_EQ(table_dependency_stat(tables).excluded, 1u);
}

TEST(Rankings, JsonlRoundTripAndErrors) {
  DocRanking r{"d", Granularity::cell, {{CellRef{1, 2}, 0.5}, {TextRef{0}, 0.25}}};
  std::vector<DocRanking> v{r};
  auto back = parse_rankings(rankings_to_jsonl(v));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].ranked, r.ranked);
  EXPECT_THROW(parse_rankings("{\"doc_id\": \"d\"}\n"), DataError);
  EXPECT_THROW(parse_rankings("{\"doc_id\":\"d\",\"granularity\":\"row\",\"ranked\":[{\"fact_ref\":\"cell_1_1\",\"score\":1}]}"),
               DataError);
}

TEST(PrecomputedScorer, MissingFact) {
  std::vector<DocRanking> v{{"d", Granularity::cell, {{TextRef{0}, 0.5}}}};
  PrecomputedScorer s(v, Granularity::cell);
  auto u = facts_of({"a", "b"});
  EXPECT_EQ(s.score("q", u[0]), 0.5);
  EXPECT_THROW(s.score("q", u[1]), ScorerError);
}
