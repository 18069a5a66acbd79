#include <benchmark/benchmark.h>

#include "numreason/facts.hpp"
#include "numreason/retrieval.hpp"
#include "synthetic.hpp"

using namespace numreason;

static void BM_LexicalRank(benchmark::State& state) {
  const auto doc = bench::synthetic_doc(static_cast<std::size_t>(state.range(0)), 4, 20);
  const auto universe = build_fact_universe(doc, Granularity::cell);
  const LexicalScorer scorer(universe);
  for (auto _ : state) benchmark::DoNotOptimize(rank(doc.question.text, universe, scorer));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(universe.size()));
}
BENCHMARK(BM_LexicalRank)->Arg(10)->Arg(50);

static void BM_LabelGoldFacts(benchmark::State& state) {
  const auto doc = bench::synthetic_doc(static_cast<std::size_t>(state.range(0)), 4, 20);
  for (auto _ : state) benchmark::DoNotOptimize(label_gold_facts(doc, Granularity::cell));
}
BENCHMARK(BM_LabelGoldFacts)->Arg(10)->Arg(50);
