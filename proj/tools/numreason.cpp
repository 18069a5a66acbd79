// numreason: command-line front end. Every subcommand reads and writes
// files so stages can be re-run one at a time; `run` chains all of them.
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "numreason/pipeline.hpp"
#include "numreason/stages.hpp"

namespace fs = std::filesystem;
using namespace numreason;

namespace {

constexpr const char* kConfigEnv = "NUMREASON_CONFIG";


struct Common {
  fs::path dataset;
  fs::path input;
  fs::path output;
  std::string granularity = "cell";
  std::size_t jobs = 1;
  LabelOptions labels;
};

void add_label_flags(CLI::App* cmd, LabelOptions& labels) {
  cmd->add_flag("!--all-rows", labels.restrict_to_gold_rows,
                "Label numbers anywhere in the table, not only in the annotated rows");
  cmd->add_flag("!--drop-ambiguous", labels.include_ambiguous,
                "Do not label facts whose number matches several places");
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

int fail(std::string_view stage, const std::exception& e) {
  std::cerr << "numreason: stage '" << stage << "' failed: " << e.what() << "\n";
  return exit_code_for(e);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical reasoning over financial tables: retrieval, program checking, ensembling, evaluation"};
  app.require_subcommand(1);
  Common c;
  auto jobs_opt = [&](CLI::App* cmd) { cmd->add_option("--jobs,-j", c.jobs, "Worker threads")->check(CLI::PositiveNumber); };

  auto* ingest = app.add_subcommand("ingest", "Validate a dataset file and write a report");
  fs::path report = "ingest_report.json";
  ingest->add_option("--input,-i", c.input, "Dataset (JSON array or JSONL)")->required();
  ingest->add_option("--report,-o", report, "Validation report path");

  auto* label = app.add_subcommand("label", "Derive gold facts from each gold program");
  label->add_option("--dataset,-d", c.dataset)->required();
  label->add_option("--output,-o", c.output)->required();
  label->add_option("--granularity,-g", c.granularity)->check(CLI::IsMember({"row", "cell"}));
  add_label_flags(label, c.labels);
  jobs_opt(label);

  auto* export_cmd = app.add_subcommand("export-training", "Write (question, fact, label) training pairs");
  std::size_t neg_ratio = 3;
  std::uint64_t seed = 0;
  export_cmd->add_option("--dataset,-d", c.dataset)->required();
  export_cmd->add_option("--output,-o", c.output)->required();
  export_cmd->add_option("--granularity,-g", c.granularity)->check(CLI::IsMember({"row", "cell"}));
  export_cmd->add_option("--neg-ratio", neg_ratio, "Negatives per positive")->check(CLI::PositiveNumber);
  export_cmd->add_option("--seed", seed);
  add_label_flags(export_cmd, c.labels);

  auto* retrieve = app.add_subcommand("retrieve", "Rank the facts of every document");
  std::string scorer = "lexical";
  retrieve->add_option("--dataset,-d", c.dataset)->required();
  retrieve->add_option("--output,-o", c.output)->required();
  retrieve->add_option("--granularity,-g", c.granularity)->check(CLI::IsMember({"row", "cell"}));
  retrieve->add_option("--scorer", scorer, "lexical, oracle or file:<ranking.jsonl>");
  add_label_flags(retrieve, c.labels);
  jobs_opt(retrieve);

  auto* assemble = app.add_subcommand("assemble", "Build generator inputs from a ranking");
  fs::path ranking;
  std::size_t top_k = 0;
  std::size_t token_budget = 512;
  assemble->add_option("--dataset,-d", c.dataset)->required();
  assemble->add_option("--ranking,-r", ranking)->required();
  assemble->add_option("--output,-o", c.output)->required();
  assemble->add_option("--granularity,-g", c.granularity)->check(CLI::IsMember({"row", "cell"}));
  assemble->add_option("--top-k,-k", top_k, "Facts per input (default 3 for rows, 5 for cells)");
  assemble->add_option("--token-budget", token_budget);

  auto* repair = app.add_subcommand("repair", "Fix misspelled operation names in candidate programs");
  stages::RepairOptions repair_opts;
  repair->add_option("--candidates,-c", c.input)->required();
  repair->add_option("--output,-o", c.output)->required();
  repair->add_option("--vocab", repair_opts.vocab, "'default' or a file with one operation per line");
  repair->add_option("--decode", repair_opts.decode_separator, "Decode generator text split by this separator first");
  repair->add_option("--source", repair_opts.sources, "Only repair these candidate sources");

  auto* check = app.add_subcommand("check", "Mark candidates that parse and execute");
  check->add_option("--candidates,-c", c.input)->required();
  check->add_option("--dataset,-d", c.dataset)->required();
  check->add_option("--output,-o", c.output)->required();
  jobs_opt(check);

  auto* ens = app.add_subcommand("ensemble", "Choose one program per document");
  std::string strategy = "mixed";
  EnsembleConfig thresholds;
  std::optional<fs::path> recheck;
  ens->add_option("--candidates,-c", c.input)->required();
  ens->add_option("--output,-o", c.output)->required();
  ens->add_option("--strategy", strategy)->check(CLI::IsMember({"loss", "score", "mixed"}));
  ens->add_option("--t-loss", thresholds.t_loss);
  ens->add_option("--t-score", thresholds.t_score);
  ens->add_option("--dataset,-d", recheck, "Re-check executability against this dataset");

  auto* evaluate = app.add_subcommand("evaluate", "Score final programs against gold answers");
  double tol = kDefaultAnswerTolerance;
  fs::path labels_path;
  std::vector<std::size_t> ks{1, 3, 5, 10};
  std::string averaging = "macro";
  evaluate->add_option("--candidates,-c", c.input, "Decisions or candidate JSONL")->required();
  evaluate->add_option("--dataset,-d", c.dataset)->required();
  evaluate->add_option("--output,-o", c.output, "JSON report; the text table goes next to it")
      ->default_val("eval_report.json");
  evaluate->add_option("--tol", tol, "Relative answer tolerance")->check(CLI::PositiveNumber);
  auto* ranking_opt = evaluate->add_option("--ranking,-r", ranking, "Also report recall@k for this ranking");
  evaluate->add_option("--labels,-l", labels_path, "Gold facts from `label`")->needs(ranking_opt);
  ranking_opt->needs(evaluate->get_option("--labels"));
  evaluate->add_option("--k", ks)->check(CLI::PositiveNumber);
  evaluate->add_option("--averaging", averaging)->check(CLI::IsMember({"macro", "micro"}));

  auto* stats = app.add_subcommand("stats", "Dataset statistics and gold-fact labeling audit");
  stats->add_option("--dataset,-d", c.dataset)->required();
  stats->add_option("--output,-o", c.output)->default_val("stats.json");
  add_label_flags(stats, c.labels);

  auto* run = app.add_subcommand("run", "Run the whole pipeline from a JSON config");
  fs::path config_path;
  auto* config_opt = run->add_option("--config", config_path, std::string("Pipeline config; defaults to $") + kConfigEnv);
  config_opt->envname(kConfigEnv);
  std::optional<fs::path> run_dataset, run_out;
  std::optional<std::string> run_scorer, run_granularity, run_strategy;
  std::optional<std::size_t> run_top_k, run_jobs;
  std::optional<std::uint64_t> run_seed;
  std::optional<double> run_t_loss, run_t_score, run_tol;
  std::vector<std::string> run_candidates;
  run->add_option("--dataset,-d", run_dataset);
  run->add_option("--output-dir,-o", run_out);
  run->add_option("--scorer", run_scorer);
  run->add_option("--granularity,-g", run_granularity)->check(CLI::IsMember({"row", "cell"}));
  run->add_option("--strategy", run_strategy)->check(CLI::IsMember({"loss", "score", "mixed"}));
  run->add_option("--top-k,-k", run_top_k);
  run->add_option("--seed", run_seed);
  run->add_option("--t-loss", run_t_loss);
  run->add_option("--t-score", run_t_score);
  run->add_option("--tol", run_tol);
  run->add_option("--candidate", run_candidates, "source=path, replaces the configured file for that source");
  run->add_option("--jobs,-j", run_jobs)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (*ingest) {
      const auto r = stages::ingest(c.input, report);
      std::cout << r.valid_documents << "/" << r.documents << " documents valid, " << r.violations.size()
                << " violations\n";
      return r.ok() ? kExitOk : kExitData;
    }
    if (*label) stages::label(c.dataset, granularity_from_string(c.granularity), c.labels, c.output, c.jobs);
    if (*export_cmd) print_warnings(stages::export_training(c.dataset, granularity_from_string(c.granularity), neg_ratio, seed, c.labels, c.output));
    if (*retrieve) stages::retrieve(c.dataset, granularity_from_string(c.granularity), scorer, c.labels, c.output, c.jobs);
    if (*assemble) {
      auto cfg = RetrievalConfig::defaults_for(granularity_from_string(c.granularity));
      if (top_k) cfg.top_k = top_k;
      cfg.token_budget = token_budget;
      stages::assemble(c.dataset, ranking, cfg, c.output);
    }
    if (*repair) print_warnings(stages::repair(c.input, repair_opts, c.output));
    if (*check) stages::check(c.input, c.dataset, c.output, c.jobs);
    if (*ens) stages::ensemble(c.input, stages::strategy_from_string(strategy), thresholds, c.output, recheck);
    if (*evaluate) {
      std::optional<stages::RecallInputs> recall;
      if (!ranking.empty()) recall = stages::RecallInputs{ranking, labels_path, ks, averaging == "micro" ? Averaging::micro : Averaging::macro};
      std::cout << render_text(stages::evaluate(c.input, c.dataset, tol, c.output, recall));
    }
    if (*stats) stages::stats(c.dataset, c.labels, c.output);
    if (*run) {
      if (config_path.empty() && !run_dataset) {
        std::cerr << "numreason run: no --config given and " << kConfigEnv << " is not set\n";
        return kExitUsage;
      }
      PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_pipeline_config(config_path);
      if (run_dataset) cfg.dataset = *run_dataset;
      if (run_out) cfg.output_dir = *run_out;
      if (run_scorer) cfg.scorer = *run_scorer;
      if (run_granularity) cfg.granularity = granularity_from_string(*run_granularity);
      if (run_strategy) cfg.strategy = stages::strategy_from_string(*run_strategy);
      if (run_top_k) cfg.top_k = *run_top_k;
      if (run_seed) cfg.seed = *run_seed;
      if (run_t_loss) cfg.thresholds.t_loss = *run_t_loss;
      if (run_t_score) cfg.thresholds.t_score = *run_t_score;
      if (run_tol) cfg.tol = *run_tol;
      if (run_jobs) cfg.jobs = *run_jobs;
      for (const auto& entry : run_candidates) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos || eq == 0) {
          std::cerr << "numreason run: --candidate expects source=path, got '" << entry << "'\n";
          return kExitUsage;
        }
        cfg.candidates[entry.substr(0, eq)] = entry.substr(eq + 1);
      }
      if (cfg.dataset.empty()) {
        std::cerr << "numreason run: no dataset configured\n";
        return kExitUsage;
      }

      auto result = run_pipeline(cfg);
      print_warnings(result.warnings);
      if (result.exit_code != kExitOk) {
        std::cerr << "numreason: stage '" << result.failed_stage << "' failed: " << result.message << "\n";
        return result.exit_code;
      }
      std::cout << render_text(result.reports);
    }
  } catch (const std::exception& e) {
    return fail(stage, e);
  }
  return kExitOk;
}
