// Sanity checks on the reference implementations, against hand-worked values.
#include <gtest/gtest.h>

#include "oracle.hpp"

TEST(Oracle, ReferenceInterpreter) {
  oracle::Grid t{{"", "a", "b"}, {"revenue", "$ 1,000", "( 250 )"}, {"margin", "12.5%", "n/a"}};
  EXPECT_EQ(oracle::run_reference("subtract(5, 3), divide(#0, 2)", {})->number, 1.0);
  EXPECT_EQ(oracle::run_reference("table_sum(revenue)", t)->number, 750.0);
  EXPECT_EQ(oracle::run_reference("table_average(margin)", t)->number, 12.5);
  EXPECT_EQ(oracle::run_reference("exp(const_2, 3), add(#0, const_m1)", {})->number, 7.0);
  EXPECT_TRUE(oracle::run_reference("greater(3, 2)", {})->yes);
  EXPECT_FALSE(oracle::run_reference("divide(1, 0)", {}));
  EXPECT_FALSE(oracle::run_reference("table_max(cost)", t));
}

TEST(Oracle, SingleEdits) {
  auto e = oracle::single_edits("ab");
  EXPECT_TRUE(e.count("b"));
  EXPECT_TRUE(e.count("abc"));
  EXPECT_TRUE(e.count("xb"));
  EXPECT_FALSE(e.count("ab"));
  // 3*27 inserts + 2 deletes + 2*27 substitutions, minus duplicates and the
  // two identity substitutions.
  EXPECT_LT(e.size(), 3u * 27 + 2 + 2 * 27);
}

TEST(Oracle, BruteRecall) {
  auto r = oracle::brute_recall({"text_0", "cell_1_1", "text_2"}, {"text_2", "cell_1_1"}, 2);
  EXPECT_EQ(r.gold, 2u);
  EXPECT_EQ(r.hit, 1u);
  EXPECT_EQ(r.table_hit, 1u);
  EXPECT_EQ(r.text_hit, 0u);
}

TEST(Oracle, MixedTableSpotChecks) {
  EXPECT_EQ(oracle::mixed_table(true, true, 2, 2), 'F');
  EXPECT_EQ(oracle::mixed_table(true, true, 1, 2), 'K');
  EXPECT_EQ(oracle::mixed_table(false, true, 0, 0), 'F');
  EXPECT_EQ(oracle::mixed_table(false, false, 2, 2), 'K');
}
