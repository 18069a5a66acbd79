#include <benchmark/benchmark.h>

#include "numreason/candidates.hpp"
#include "numreason/program.hpp"
#include "synthetic.hpp"

using namespace numreason;

static void BM_Parse(benchmark::State& state) {
  const std::string text = "subtract(5829, 5735), divide(#0, 5735), multiply(#1, const_100), greater(#2, 1)";
  for (auto _ : state) benchmark::DoNotOptimize(parse_program(text));
}
BENCHMARK(BM_Parse);

static void BM_Execute(benchmark::State& state) {
  const auto doc = bench::synthetic_doc(static_cast<std::size_t>(state.range(0)), 4, 0);
  const auto program = parse_program(*doc.question.program);
  for (auto _ : state) benchmark::DoNotOptimize(execute(program, doc.table));
}
BENCHMARK(BM_Execute)->Arg(10)->Arg(100);

static void BM_RepairOperators(benchmark::State& state) {
  const std::string text = "sbtract(5829, 5735), dvide(#0, 5735), tble_sum(line item 3, none)";
  for (auto _ : state) benchmark::DoNotOptimize(repair_operators(text));
}
BENCHMARK(BM_RepairOperators);
