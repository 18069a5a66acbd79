#include "numreason/stages.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "numreason/parallel.hpp"
#include "numreason/text.hpp"

namespace numreason::stages {
namespace {

using ojson = nlohmann::ordered_json;

std::vector<std::string> keys_of(const std::set<FactRef>& refs) {
  std::vector<std::string> out;
  for (const auto& r : refs) out.push_back(fact_key(r));
  return out;
}

template <typename Fn>
void for_each_line(std::string_view jsonl, Fn&& fn) {
  std::size_t line_no = 0, offset = 0;
  while (offset < jsonl.size()) {
    std::size_t end = jsonl.find('\n', offset);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = text::trim(jsonl.substr(offset, end - offset));
    offset = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::vector<std::string> load_vocab(const std::string& name) {
  if (name == "default") return default_op_vocabulary();
  std::vector<std::string> vocab;
  for (auto& word : text::split_whitespace(read_file(name))) vocab.push_back(text::to_lower(word));
  if (vocab.empty()) throw DataError("operation vocabulary '" + name + "' is empty");
  return vocab;
}

std::map<std::string, const FinDocument*> index_docs(const std::vector<FinDocument>& docs) {
  std::map<std::string, const FinDocument*> out;
  for (const auto& d : docs) out[d.id] = &d;
  return out;
}

std::optional<EnsembleDecision> pairwise(const std::optional<CandidateProgram>& a,
                                         const std::optional<CandidateProgram>& b, bool by_loss) {
  auto has = [&](const std::optional<CandidateProgram>& c) { return c && (by_loss ? c->loss : c->score); };
  if (has(a) && has(b)) return by_loss ? loss_ensemble(*a, *b) : score_ensemble(*a, *b);
  // One side missing: take whichever is usable, executable first.
  const std::optional<CandidateProgram>* order[] = {&a, &b};
  for (bool need_exec : {true, false}) {
    for (const auto* c : order) {
      if (*c && (!need_exec || (*c)->executable)) {
        EnsembleDecision d;
        d.chosen = **c;
        d.rule = Rule::degenerate;
        d.trace.push_back("pair incomplete: took " + (*c)->source);
        return d;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

ValidationReport ingest(const fs::path& dataset, const fs::path& report_out) {
  auto docs = read_documents(read_file(dataset));
  auto report = validate_dataset(docs);
  write_file(report_out, to_json(report));
  return report;
}

void label(const fs::path& dataset, Granularity granularity, const LabelOptions& options, const fs::path& out,
           std::size_t jobs) {
  const auto docs = load_dataset(dataset);
  std::vector<std::string> lines(docs.size());
  parallel_for(docs.size(), jobs, [&](std::size_t i) {
    const auto& doc = docs[i];
    ojson line{{"doc_id", doc.id}, {"granularity", std::string(to_string(granularity))}};
    try {
      auto labels = label_gold_facts(doc, granularity, options);
      line["positives"] = keys_of(labels.positives);
      line["ambiguous"] = keys_of(labels.ambiguous);
      line["coverage"] = labels.coverage;
      line["program_numbers"] = labels.program_numbers;
      line["matched_numbers"] = labels.matched_numbers;
    } catch (const LabelError& e) {
      line["error"] = e.what();
    }
    lines[i] = line.dump() + "\n";
  });
  std::string body;
  for (const auto& l : lines) body += l;
  write_file(out, body);
}

std::vector<GoldFacts> parse_labels(std::string_view jsonl) {
  std::vector<GoldFacts> out;
  for_each_line(jsonl, [&](const nlohmann::json& obj) {
    if (obj.contains("error")) return;
    GoldFacts g;
    g.doc_id = obj.at("doc_id").get<std::string>();
    g.granularity = granularity_from_string(obj.at("granularity").get<std::string>());
    for (const auto& key : obj.at("positives")) g.gold.insert(parse_fact_key(key.get<std::string>()));
    out.push_back(std::move(g));
  });
  return out;
}

std::vector<std::string> export_training(const fs::path& dataset, Granularity granularity, std::size_t neg_ratio,
                                         std::uint64_t seed, const LabelOptions& options, const fs::path& out) {
  const auto docs = load_dataset(dataset);
  auto result = export_training_pairs(docs, granularity, neg_ratio, seed, options);
  write_file(out, training_pairs_to_jsonl(result.pairs));
  return result.warnings;
}

void retrieve(const fs::path& dataset, Granularity granularity, const std::string& scorer,
              const LabelOptions& options, const fs::path& out, std::size_t jobs) {
  const auto docs = load_dataset(dataset);
  std::unique_ptr<PrecomputedScorer> precomputed;
  if (scorer.starts_with("file:")) {
    auto rankings = parse_rankings(read_file(scorer.substr(5)));
    precomputed = std::make_unique<PrecomputedScorer>(rankings, granularity);
  } else if (scorer != "lexical" && scorer != "oracle") {
    throw std::invalid_argument("unknown scorer '" + scorer + "' (expected lexical, oracle or file:<path>)");
  }

  std::vector<DocRanking> rankings(docs.size());
  parallel_for(docs.size(), jobs, [&](std::size_t i) {
    const auto& doc = docs[i];
    const auto universe = build_fact_universe(doc, granularity);
    rankings[i] = DocRanking{doc.id, granularity, {}};
    if (universe.empty()) return;
    RankedFacts ranked;
    if (precomputed) {
      ranked = rank(doc.question.text, universe, *precomputed);
    } else if (scorer == "lexical") {
      ranked = rank(doc.question.text, universe, LexicalScorer(universe));
    } else {
      std::set<FactRef> gold;
      if (doc.question.program) {
        try {
          gold = label_gold_facts(doc, granularity, options).positives;
        } catch (const LabelError&) {
        }
      }
      ranked = rank(doc.question.text, universe, GoldScorer(std::move(gold)));
    }
    rankings[i] = to_doc_ranking(doc.id, granularity, ranked);
  });
  write_file(out, rankings_to_jsonl(rankings));
}

void assemble(const fs::path& dataset, const fs::path& ranking, const RetrievalConfig& config, const fs::path& out) {
  config.validate();
  const auto docs = load_dataset(dataset);
  const auto by_id = index_docs(docs);
  std::string body;
  for (const auto& r : parse_rankings(read_file(ranking))) {
    auto it = by_id.find(r.doc_id);
    if (it == by_id.end()) throw DataError("ranking refers to unknown document '" + r.doc_id + "'");
    const FinDocument& doc = *it->second;
    if (r.granularity != config.granularity)
      throw DataError("ranking for '" + r.doc_id + "' is " + std::string(to_string(r.granularity)) +
                      "-level, expected " + std::string(to_string(config.granularity)));

    const auto universe = build_fact_universe(doc, r.granularity);
    std::map<FactRef, std::size_t> position;
    for (std::size_t i = 0; i < universe.size(); ++i) position[universe[i].ref] = i;
    RankedFacts ranked;
    for (const auto& [ref, score] : r.ranked) {
      auto p = position.find(ref);
      if (p == position.end())
        throw DataError("ranking for '" + r.doc_id + "' names unknown fact " + fact_key(ref));
      ranked.push_back({universe[p->second], score, p->second});
    }
    const auto selected = select_top_k(doc.question.text, ranked, config);
    std::vector<std::string> refs;
    for (const auto& f : selected) refs.push_back(fact_key(f.ref));
    ojson line{{"doc_id", doc.id},
               {"selected", refs},
               {"input", assemble_generator_input(doc.question.text, selected, config)}};
    body += line.dump() + "\n";
  }
  write_file(out, body);
}

std::vector<std::string> collect_candidates(const std::map<std::string, fs::path>& files, const fs::path& out) {
  std::vector<std::string> warnings;
  std::vector<CandidateProgram> all;
  for (const auto& [source, path] : files) {
    auto set = parse_candidates(read_file(path));
    warnings.insert(warnings.end(), set.warnings.begin(), set.warnings.end());
    for (auto& c : flatten(set)) {
      if (c.source != source)
        throw DataError("candidate file '" + path.string() + "' is keyed '" + source + "' but holds source '" +
                        c.source + "' for document '" + c.doc_id + "'");
      all.push_back(std::move(c));
    }
  }
  // Group by document so downstream files read in a stable order.
  std::stable_sort(all.begin(), all.end(),
                   [](const CandidateProgram& a, const CandidateProgram& b) { return a.doc_id < b.doc_id; });
  write_file(out, candidates_to_jsonl(all));
  return warnings;
}

std::vector<std::string> repair(const fs::path& candidates, const RepairOptions& options, const fs::path& out) {
  const auto vocab = load_vocab(options.vocab);
  auto set = parse_candidates(read_file(candidates));
  auto all = flatten(set);
  for (auto& c : all) {
    const bool selected = options.sources.empty() ||
                          std::find(options.sources.begin(), options.sources.end(), c.source) != options.sources.end();
    if (!selected) continue;
    if (!options.decode_separator.empty() && c.program_text.find(options.decode_separator) != std::string::npos) {
      try {
        c.program_text = decode_separated(c.program_text, options.decode_separator);
      } catch (const DecodeError& e) {
        set.warnings.push_back(c.doc_id + "/" + c.source + ": " + e.what());
        continue;
      }
    }
    auto fixed = repair_operators(c.program_text, vocab);
    c.program_text = std::move(fixed.program_text);
    c.repaired = c.repaired || fixed.repaired;
  }
  write_file(out, candidates_to_jsonl(all));
  return set.warnings;
}

void check(const fs::path& candidates, const fs::path& dataset, const fs::path& out, std::size_t jobs) {
  const auto docs = load_dataset(dataset);
  const auto by_id = index_docs(docs);
  auto all = flatten(parse_candidates(read_file(candidates)));
  for (const auto& c : all)
    if (!by_id.count(c.doc_id)) throw DataError("candidate for unknown document '" + c.doc_id + "'");
  parallel_for(all.size(), jobs, [&](std::size_t i) {
    all[i] = check_executability(std::move(all[i]), *by_id.at(all[i].doc_id));
  });
  write_file(out, candidates_to_jsonl(all));
}

Strategy strategy_from_string(std::string_view name) {
  if (name == "loss") return Strategy::loss;
  if (name == "score") return Strategy::score;
  if (name == "mixed") return Strategy::mixed;
  throw std::invalid_argument("strategy must be loss, score or mixed, got '" + std::string(name) + "'");
}

void ensemble(const fs::path& candidates, Strategy strategy, const EnsembleConfig& config, const fs::path& out,
              const std::optional<fs::path>& dataset) {
  config.validate();
  auto set = parse_candidates(read_file(candidates));
  if (dataset) {
    const auto docs = load_dataset(*dataset);
    const auto by_id = index_docs(docs);
    for (auto& [doc_id, list] : set.by_doc) {
      auto it = by_id.find(doc_id);
      if (it == by_id.end()) throw DataError("candidate for unknown document '" + doc_id + "'");
      for (auto& c : list) c = check_executability(std::move(c), *it->second);
    }
  }

  std::string body;
  for (const auto& [doc_id, list] : set.by_doc) {
    const auto inputs = EnsembleInputs::from(list);
    std::optional<EnsembleDecision> decision;
    switch (strategy) {
      case Strategy::loss: decision = pairwise(inputs.cf, inputs.rf, true); break;
      case Strategy::score: decision = pairwise(inputs.cu, inputs.ru, false); break;
      case Strategy::mixed:
        if (inputs.cf || inputs.rf || inputs.cu || inputs.ru) decision = mixed_ensemble(inputs, config);
        break;
    }
    if (!decision) continue;
    ojson line{{"doc_id", doc_id},
               {"chosen_source", decision->chosen.source},
               {"program_text", decision->chosen.program_text},
               {"rule_fired", std::string(to_string(decision->rule))},
               {"trace", decision->trace}};
    body += line.dump() + "\n";
  }
  write_file(out, body);
}

ReportSet evaluate(const fs::path& finals, const fs::path& dataset, double tol, const fs::path& out_json,
                   const std::optional<RecallInputs>& recall) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const auto docs = load_dataset(dataset);
  std::map<std::string, CandidateProgram> chosen;
  for_each_line(read_file(finals), [&](const nlohmann::json& obj) {
    CandidateProgram c;
    c.doc_id = obj.at("doc_id").get<std::string>();
    c.program_text = obj.at("program_text").get<std::string>();
    if (auto it = obj.find("source"); it != obj.end() && it->is_string()) c.source = it->get<std::string>();
    if (auto it = obj.find("chosen_source"); it != obj.end() && it->is_string()) c.source = it->get<std::string>();
    chosen[c.doc_id] = std::move(c);
  });

  ReportSet reports;
  reports.evaluations.emplace_back(finals.stem().string(), evaluate_programs(chosen, docs, tol));
  if (recall) {
    const auto rankings = parse_rankings(read_file(recall->ranking));
    const auto gold = parse_labels(read_file(recall->labels));
    reports.recalls.emplace_back(recall->ranking.stem().string(),
                                 evaluate_retrieval(rankings, gold, recall->ks, recall->averaging));
  }
  write_file(out_json, render_json(reports));
  auto txt = out_json;
  txt.replace_extension(".txt");
  write_file(txt, render_text(reports));
  return reports;
}

void stats(const fs::path& dataset, const LabelOptions& options, const fs::path& out) {
  const auto docs = read_documents(read_file(dataset));
  write_file(out, stats_to_json(compute_stats(docs, options)));
}

}  // namespace numreason::stages
