#include "numreason/pipeline.hpp"

#include <functional>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace numreason {
namespace {

namespace fs = std::filesystem;

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename T>
void read_opt(const nlohmann::json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

}  // namespace

PipelineConfig load_pipeline_config(const fs::path& path) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("config " + path.string() + ": " + e.what());
  }
  if (!obj.is_object()) throw DataError("config " + path.string() + ": expected a JSON object");

  const fs::path base = path.parent_path();
  PipelineConfig cfg;
  try {
    if (auto it = obj.find("dataset"); it != obj.end()) cfg.dataset = resolve(base, it->get<std::string>());
    if (auto it = obj.find("output_dir"); it != obj.end()) cfg.output_dir = resolve(base, it->get<std::string>());
    if (auto it = obj.find("granularity"); it != obj.end())
      cfg.granularity = granularity_from_string(it->get<std::string>());
    if (auto it = obj.find("strategy"); it != obj.end())
      cfg.strategy = stages::strategy_from_string(it->get<std::string>());
    if (auto it = obj.find("candidates"); it != obj.end()) {
      for (const auto& [source, file] : it->items()) cfg.candidates[source] = resolve(base, file.get<std::string>());
    }
    if (auto it = obj.find("scorer"); it != obj.end()) {
      cfg.scorer = it->get<std::string>();
      if (cfg.scorer.starts_with("file:")) cfg.scorer = "file:" + resolve(base, cfg.scorer.substr(5)).string();
    }
    if (auto it = obj.find("averaging"); it != obj.end()) {
      const auto name = it->get<std::string>();
      if (name == "macro") cfg.averaging = Averaging::macro;
      else if (name == "micro") cfg.averaging = Averaging::micro;
      else throw std::invalid_argument("averaging must be macro or micro");
    }
    read_opt(obj, "top_k", cfg.top_k);
    read_opt(obj, "token_budget", cfg.token_budget);
    read_opt(obj, "t_loss", cfg.thresholds.t_loss);
    read_opt(obj, "t_score", cfg.thresholds.t_score);
    read_opt(obj, "seed", cfg.seed);
    read_opt(obj, "jobs", cfg.jobs);
    read_opt(obj, "tol", cfg.tol);
    read_opt(obj, "neg_ratio", cfg.neg_ratio);
    read_opt(obj, "recall_ks", cfg.recall_ks);
    read_opt(obj, "restrict_to_gold_rows", cfg.labels.restrict_to_gold_rows);
    read_opt(obj, "include_ambiguous", cfg.labels.include_ambiguous);
    read_opt(obj, "repair_sources", cfg.repair.sources);
    read_opt(obj, "decode_separator", cfg.repair.decode_separator);
    if (auto it = obj.find("vocab"); it != obj.end()) {
      const auto v = it->get<std::string>();
      cfg.repair.vocab = v == "default" ? v : resolve(base, v).string();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("config " + path.string() + ": " + e.what());
  }
  return cfg;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const LabelError*>(&e)) return kExitData;
  return kExitStage;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  PipelineResult result;
  const fs::path& out = config.output_dir;
  auto warn = [&](const std::vector<std::string>& w) {
    result.warnings.insert(result.warnings.end(), w.begin(), w.end());
  };

  RetrievalConfig retrieval = RetrievalConfig::defaults_for(config.granularity);
  if (config.top_k) retrieval.top_k = config.top_k;
  retrieval.token_budget = config.token_budget;

  const std::vector<std::pair<const char*, std::function<void()>>> steps{
      {"ingest",
       [&] {
         const auto report = stages::ingest(config.dataset, out / "ingest_report.json");
         if (!report.ok())
           throw DataError(std::to_string(report.violations.size()) + " schema violations in " +
                           config.dataset.string() + ", see ingest_report.json");
       }},
      {"label", [&] { stages::label(config.dataset, config.granularity, config.labels, out / "labels.jsonl", config.jobs); }},
      {"export-training",
       [&] {
         warn(stages::export_training(config.dataset, config.granularity, config.neg_ratio, config.seed, config.labels,
                                      out / "training_pairs.jsonl"));
       }},
      {"retrieve",
       [&] {
         stages::retrieve(config.dataset, config.granularity, config.scorer, config.labels, out / "ranking.jsonl",
                          config.jobs);
       }},
      {"assemble",
       [&] { stages::assemble(config.dataset, out / "ranking.jsonl", retrieval, out / "generator_input.jsonl"); }},
      {"candidates",
       [&] {
         if (config.candidates.empty()) throw std::invalid_argument("no candidate files configured");
         warn(stages::collect_candidates(config.candidates, out / "candidates.jsonl"));
       }},
      {"repair",
       [&] { warn(stages::repair(out / "candidates.jsonl", config.repair, out / "repaired_candidates.jsonl")); }},
      {"check",
       [&] {
         stages::check(out / "repaired_candidates.jsonl", config.dataset, out / "checked_candidates.jsonl",
                       config.jobs);
       }},
      {"ensemble",
       [&] {
         stages::ensemble(out / "checked_candidates.jsonl", config.strategy, config.thresholds,
                          out / "decisions.jsonl");
       }},
      {"evaluate",
       [&] {
         stages::RecallInputs recall{out / "ranking.jsonl", out / "labels.jsonl", config.recall_ks, config.averaging};
         result.reports =
             stages::evaluate(out / "decisions.jsonl", config.dataset, config.tol, out / "eval_report.json", recall);
       }},
  };

  for (const auto& [name, step] : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      result.exit_code = exit_code_for(e);
      result.failed_stage = name;
      result.message = e.what();
      return result;
    }
  }
  return result;
}

}  // namespace numreason
