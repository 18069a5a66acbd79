#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "helpers.hpp"
#include "numreason/facts.hpp"
#include "numreason/program.hpp"

using namespace numreason;
using testing_util::make_doc;

namespace {

FinDocument revenue_doc() {
  return make_doc("rev", {{"item", "2007", "2008"}, {"revenue", "10", "20"}, {"cost", "", " $ 9,896 "}},
                  {"Revenue grew .", "Costs were flat at 7 .", "The end ."});
}

FinDocument row_of(int cells, const std::string& program) {
  TableRow header{""}, row{"x"};
  for (int c = 1; c <= cells; ++c) {
    header.push_back("c" + std::to_string(c));
    row.push_back(std::to_string(c));
  }
  return make_doc("n" + std::to_string(cells), {header, row}, {}, program, {{"table_1", "x"}});
}

}  // namespace

TEST(FactKey, RoundTrip) {
  for (FactRef r : {FactRef(TextRef{7}), FactRef(RowRef{3}), FactRef(CellRef{3, 2})})
    EXPECT_EQ(parse_fact_key(fact_key(r)), r);
  EXPECT_EQ(fact_key(CellRef{3, 2}), "cell_3_2");
  EXPECT_EQ(fact_key(RowRef{3}), "table_3");
  EXPECT_THROW(parse_fact_key("cell_3"), DataError);
  EXPECT_THROW(parse_fact_key("row_3"), DataError);
}

TEST(Linearize, Row) {
  auto d = make_doc("r", {{"item", "2007", "2008"}, {"revenue", "10", "20"}});
  EXPECT_EQ(linearize_row(d, 1), "the revenue of 2007 is 10 ; the revenue of 2008 is 20");
}

TEST(Linearize, RowSkipsEmptyCells) {
  EXPECT_EQ(linearize_row(revenue_doc(), 2), "the cost of 2008 is $ 9,896");
}

TEST(Linearize, HeaderOnlyTable) {
  auto d = make_doc("h", {{"item", "2007"}});
  EXPECT_THROW(linearize_row(d, 1), IndexError);
  EXPECT_THROW(linearize_row(d, 0), IndexError);
}

TEST(Linearize, Cell) {
  auto d = revenue_doc();
  EXPECT_EQ(linearize_cell(d, 1, 1), "the revenue of 2007 is 10");
  EXPECT_EQ(linearize_cell(d, 2, 2), "the cost of 2008 is $ 9,896");
  EXPECT_THROW(linearize_cell(d, 1, 0), IndexError);
  EXPECT_THROW(linearize_cell(d, 1, 3), IndexError);
  EXPECT_THROW(linearize_cell(d, 2, 1), EmptyCellError);
}

TEST(FactUniverse, Counts) {
  auto d = make_doc("u", {{"", "a", "b"}, {"x", "1", "2"}}, {"one .", "two .", "three ."});
  auto rows = build_fact_universe(d, Granularity::row);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[3].ref, FactRef(RowRef{1}));
  EXPECT_EQ(rows[3].kind, FactKind::table);
  EXPECT_EQ(build_fact_universe(d, Granularity::cell).size(), 5u);

  auto header_only = make_doc("h", {{"", "a"}}, {"one .", "two .", "three ."});
  EXPECT_EQ(build_fact_universe(header_only, Granularity::cell).size(), 3u);
  EXPECT_EQ(build_fact_universe(header_only, Granularity::row).size(), 3u);
}

TEST(FactUniverse, SentenceIndexSpansPostText) {
  auto d = make_doc("s", {{"", "a"}, {"x", "1"}}, {"pre ."});
  d.post_text = {"  ", "post ."};
  auto u = build_fact_universe(d, Granularity::row);
  ASSERT_EQ(u.size(), 3u);
  EXPECT_EQ(u[1].ref, FactRef(TextRef{2}));
  EXPECT_EQ(u[1].surface, "post .");
}

TEST(Label, CellWithConstant) {
  auto d = make_doc("l", {{"", "2019", "2018"}, {"net sales", "$ 9,896", "9,120"}, {"other", "100", "5"}}, {},
                    "divide(9896, const_100)", {{"table_1", "net sales"}});
  auto l = label_gold_facts(d, Granularity::cell);
  EXPECT_EQ(l.positives, (std::set<FactRef>{CellRef{1, 1}}));
  EXPECT_EQ(l.coverage, 1.0);
  EXPECT_EQ(l.program_numbers, 1u);

  auto rows = label_gold_facts(d, Granularity::row);
  EXPECT_EQ(rows.positives, (std::set<FactRef>{RowRef{1}}));
}

TEST(Label, LiteralAbsentFromDocumentLowersCoverage) {
  auto d = make_doc("l", {{"", "2019"}, {"net sales", "$ 9,896"}}, {}, "divide(9896, 100)", {{"table_1", "x"}});
  EXPECT_EQ(label_gold_facts(d, Granularity::cell).coverage, 0.5);
}

TEST(Label, GoldRowsRestrictSearch) {
  auto d = make_doc("g", {{"", "a"}, {"x", "5"}, {"y", "5"}}, {}, "add(5, 1)", {{"table_2", "y 5"}});
  EXPECT_EQ(label_gold_facts(d, Granularity::cell).positives, (std::set<FactRef>{CellRef{2, 1}}));
  LabelOptions all;
  all.restrict_to_gold_rows = false;
  auto l = label_gold_facts(d, Granularity::cell, all);
  EXPECT_EQ(l.positives, (std::set<FactRef>{CellRef{1, 1}, CellRef{2, 1}}));
  EXPECT_EQ(l.ambiguous, l.positives);
}

TEST(Label, AmbiguousCells) {
  auto d = make_doc("a", {{"", "a", "b", "c"}, {"x", "5", "5", "7"}}, {}, "add(5, 5)", {{"table_1", "x"}});
  auto with = label_gold_facts(d, Granularity::cell);
  EXPECT_EQ(with.ambiguous, (std::set<FactRef>{CellRef{1, 1}, CellRef{1, 2}}));
  EXPECT_EQ(with.positives, with.ambiguous);

  LabelOptions drop;
  drop.include_ambiguous = false;
  auto without = label_gold_facts(d, Granularity::cell, drop);
  EXPECT_EQ(without.ambiguous, with.ambiguous);
  EXPECT_TRUE(without.positives.empty());
  EXPECT_EQ(without.coverage, 1.0);
}

TEST(Label, TableAggregationMarksRow) {
  auto d = make_doc("t", {{"", "a", "b"}, {"revenue", "2", "4"}, {"cost", "1", ""}}, {}, "table_sum(revenue)");
  EXPECT_EQ(label_gold_facts(d, Granularity::row).positives, (std::set<FactRef>{RowRef{1}}));
  EXPECT_EQ(label_gold_facts(d, Granularity::cell).positives, (std::set<FactRef>{CellRef{1, 1}, CellRef{1, 2}}));
}

TEST(Label, TextSentences) {
  auto d = make_doc("s", {{"", "a"}, {"x", "1"}}, {"Sales were $ 1,200 .", "Nothing here ."}, "add(1200, 3)");
  auto l = label_gold_facts(d, Granularity::cell);
  EXPECT_EQ(l.positives, (std::set<FactRef>{TextRef{0}}));
  EXPECT_EQ(l.coverage, 0.5);
}

TEST(Label, MissingOrBrokenProgram) {
  auto d = make_doc("m", {{"", "a"}, {"x", "1"}});
  EXPECT_THROW(label_gold_facts(d, Granularity::cell), LabelError);
  d.question.program = "add(1";
  EXPECT_THROW(label_gold_facts(d, Granularity::cell), LabelError);
}

TEST(ExportTraining, RatioAndCap) {
  std::vector<FinDocument> docs{row_of(12, "add(1, 2)"), row_of(6, "add(1, 2)")};
  auto e = export_training_pairs(docs, Granularity::cell, 3, 42);
  std::map<std::string, std::pair<int, int>> per_doc;
  for (const auto& p : e.pairs) (p.label ? per_doc[p.doc_id].first : per_doc[p.doc_id].second) += 1;
  EXPECT_EQ(per_doc["n12"], (std::pair{2, 6}));
  EXPECT_EQ(per_doc["n6"], (std::pair{2, 4}));
}

TEST(ExportTraining, Deterministic) {
  auto docs = load_dataset(testing_util::fixtures() / "docs.json");
  docs.push_back(row_of(40, "add(1, 2)"));
  auto a = training_pairs_to_jsonl(export_training_pairs(docs, Granularity::cell, 3, 9).pairs);
  auto b = training_pairs_to_jsonl(export_training_pairs(docs, Granularity::cell, 3, 9).pairs);
  EXPECT_EQ(a, b);
  // Only the 40-cell row has more negatives than the ratio asks for.
  auto c = training_pairs_to_jsonl(export_training_pairs(docs, Granularity::cell, 3, 10).pairs);
  EXPECT_NE(a, c);
}

TEST(ExportTraining, SkipsUnlabelable) {
  std::vector<FinDocument> docs{row_of(4, "add(1, 2)"), make_doc("bad", {{"", "a"}, {"x", "1"}})};
  auto e = export_training_pairs(docs, Granularity::cell, 3, 1);
  EXPECT_EQ(e.warnings.size(), 1u);
  EXPECT_THROW(export_training_pairs(docs, Granularity::cell, 0, 1), std::invalid_argument);
}

// --- properties -------------------------------------------------------------

namespace {

FinDocument random_labeled_doc(std::mt19937_64& rng, int i) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  const int rows = 2 + pick(4), cols = 2 + pick(4);
  Table t{{""}};
  for (int c = 1; c < cols; ++c) t[0].push_back("y" + std::to_string(c));
  for (int r = 1; r < rows; ++r) {
    TableRow row{"row " + std::to_string(r)};
    for (int c = 1; c < cols; ++c) row.push_back(pick(5) == 0 ? "" : std::to_string(pick(12)));
    t.push_back(row);
  }
  std::vector<std::string> sentences;
  for (int s = pick(4); s > 0; --s) sentences.push_back("value was " + std::to_string(pick(12)) + " .");
  std::string program = "add(" + std::to_string(pick(12)) + ", " + std::to_string(pick(12)) + ")";
  if (pick(3) == 0) program += ", table_max(row " + std::to_string(1 + pick(rows - 1)) + ")";
  std::map<std::string, std::string> gold;
  if (pick(2)) gold["table_" + std::to_string(1 + pick(rows - 1))] = "x";
  return make_doc("p" + std::to_string(i), t, sentences, program, gold);
}

}  // namespace

TEST(LabelProperty, PositivesLiveInUniverse) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 500; ++i) {
    auto d = random_labeled_doc(rng, i);
    for (auto g : {Granularity::row, Granularity::cell}) {
      std::set<FactRef> universe;
      for (const auto& f : build_fact_universe(d, g)) universe.insert(f.ref);
      auto l = label_gold_facts(d, g);
      for (const auto& p : l.positives) EXPECT_TRUE(universe.count(p)) << fact_key(p);
      for (const auto& p : l.ambiguous) EXPECT_TRUE(universe.count(p)) << fact_key(p);
    }
  }
}

TEST(LabelProperty, CellPositivesSitInPositiveRows) {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 500; ++i) {
    auto d = random_labeled_doc(rng, i);
    auto rows = label_gold_facts(d, Granularity::row).positives;
    for (const auto& p : label_gold_facts(d, Granularity::cell).positives) {
      if (const auto* c = std::get_if<CellRef>(&p)) EXPECT_TRUE(rows.count(RowRef{c->row})) << fact_key(p);
      else EXPECT_TRUE(rows.count(p));
    }
  }
}

TEST(LabelProperty, DeterministicAndOrderFree) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 200; ++i) {
    auto d = random_labeled_doc(rng, i);
    auto a = label_gold_facts(d, Granularity::cell);
    auto b = label_gold_facts(d, Granularity::cell);
    EXPECT_EQ(a.positives, b.positives);
    EXPECT_EQ(a.ambiguous, b.ambiguous);
    // Reordering gold_inds entries or duplicating the labeling call through
    // a copy must not matter either.
    auto copy = d;
    std::map<std::string, std::string> reordered(copy.question.gold_inds.rbegin(), copy.question.gold_inds.rend());
    copy.question.gold_inds = reordered;
    EXPECT_EQ(label_gold_facts(copy, Granularity::cell).positives, a.positives);
  }
}

TEST(ExportProperty, NegativesBoundedAndLabelsPartition) {
  std::mt19937_64 rng(24);
  std::vector<FinDocument> docs;
  for (int i = 0; i < 200; ++i) docs.push_back(random_labeled_doc(rng, i));
  for (std::size_t ratio : {1u, 3u, 5u}) {
    auto e = export_training_pairs(docs, Granularity::cell, ratio, 77);
    for (const auto& d : docs) {
      auto l = label_gold_facts(d, Granularity::cell);
      const auto universe = build_fact_universe(d, Granularity::cell);
      std::set<FactRef> pos, neg;
      for (const auto& p : e.pairs) {
        if (p.doc_id != d.id) continue;
        (p.label ? pos : neg).insert(p.ref);
      }
      if (l.positives.empty()) {
        EXPECT_TRUE(pos.empty() && neg.empty());
        continue;
      }
      EXPECT_EQ(pos, l.positives);
      const std::size_t available = universe.size() - l.positives.size();
      EXPECT_EQ(neg.size(), std::min(ratio * l.positives.size(), available));
      for (const auto& n : neg) EXPECT_FALSE(l.positives.count(n));
    }
  }
}
