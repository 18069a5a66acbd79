#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "numreason/ensemble.hpp"
#include "numreason/evaluation.hpp"
#include "numreason/facts.hpp"
#include "numreason/stages.hpp"

namespace numreason {

struct PipelineConfig {
  std::filesystem::path dataset;
  Granularity granularity = Granularity::cell;
  std::string scorer = "lexical";
  std::size_t top_k = 0;  // 0: 3 for rows, 5 for cells
  std::size_t token_budget = 512;
  std::map<std::string, std::filesystem::path> candidates;  // source -> file
  stages::Strategy strategy = stages::Strategy::mixed;
  EnsembleConfig thresholds;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  double tol = kDefaultAnswerTolerance;
  std::size_t neg_ratio = 3;
  LabelOptions labels;
  stages::RepairOptions repair;
  std::vector<std::size_t> recall_ks{1, 3, 5, 10};
  Averaging averaging = Averaging::macro;
};

/// Reads a JSON config; keys mirror the PipelineConfig fields
/// (dataset, granularity, scorer, top_k, token_budget, candidates{source:path},
/// strategy, t_loss, t_score, output_dir, seed, jobs, tol, neg_ratio, ...).
/// Relative paths resolve against the config file's directory.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitStage = 3 };

struct PipelineResult {
  int exit_code = kExitOk;
  std::string failed_stage;
  std::string message;
  std::vector<std::string> warnings;
  ReportSet reports;
};

/// ingest -> label -> export-training -> retrieve -> assemble -> candidates
/// -> repair -> check -> ensemble -> evaluate, every artifact written under
/// output_dir. Stops at the first failing stage and keeps what was written.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Exit code for an exception escaping a stage: kExitData for bad input
/// data, kExitStage otherwise.
int exit_code_for(const std::exception& e);

}  // namespace numreason
