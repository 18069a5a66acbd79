#include "numreason/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace numreason {
namespace {

using ojson = nlohmann::ordered_json;

std::string percent(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v * 100.0);
  return buf;
}

ojson optional_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string_view to_string(Averaging a) { return a == Averaging::macro ? "macro" : "micro"; }

}  // namespace

EvalReport evaluate_programs(const std::map<std::string, CandidateProgram>& finals,
                             std::span<const FinDocument> docs, double tol) {
  EvalReport report;
  std::size_t exe_hits = 0, prog_hits = 0;
  for (const auto& doc : docs) {
    std::optional<Value> gold_answer;
    if (doc.question.exe_ans) gold_answer = answer_value(*doc.question.exe_ans);
    std::optional<Program> gold_program;
    if (doc.question.program) {
      try {
        gold_program = parse_program(*doc.question.program);
      } catch (const ProgramError&) {
      }
    }
    if (!gold_answer || !gold_program) {
      ++report.n_skipped;
      report.skipped.push_back(doc.id);
      continue;
    }

    ExampleResult ex{doc.id, false, false, {}};
    auto it = finals.find(doc.id);
    if (it == finals.end()) {
      ex.error = "no candidate";
    } else {
      try {
        Program pred = parse_program(it->second.program_text);
        ex.prog_ok = programs_match(pred, *gold_program);
        try {
          ex.exe_ok = answers_match(execute(pred, doc.table), *gold_answer, tol);
        } catch (const ExecError& e) {
          ex.error = std::string(to_string(e.kind())) + ": " + e.what();
        }
      } catch (const ProgramError& e) {
        ex.error = std::string(to_string(e.kind())) + ": " + e.what();
      }
    }
    exe_hits += ex.exe_ok;
    prog_hits += ex.prog_ok;
    report.per_example.push_back(std::move(ex));
  }
  report.n_evaluated = report.per_example.size();
  if (report.n_evaluated > 0) {
    report.exe_acc = static_cast<double>(exe_hits) / static_cast<double>(report.n_evaluated);
    report.prog_acc = static_cast<double>(prog_hits) / static_cast<double>(report.n_evaluated);
  }
  return report;
}

RecallReport evaluate_retrieval(std::span<const DocRanking> rankings, std::span<const GoldFacts> gold,
                                std::span<const std::size_t> ks, Averaging averaging) {
  std::map<std::string, const GoldFacts*> by_doc;
  for (const auto& g : gold) by_doc[g.doc_id] = &g;

  std::vector<std::size_t> sorted_ks(ks.begin(), ks.end());
  std::sort(sorted_ks.begin(), sorted_ks.end());
  sorted_ks.erase(std::unique(sorted_ks.begin(), sorted_ks.end()), sorted_ks.end());

  RecallReport report;
  report.averaging = averaging;
  if (!rankings.empty()) report.granularity = rankings.front().granularity;

  struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
    std::size_t hits = 0;
    std::size_t total = 0;
  };
  std::vector<std::array<Acc, 3>> acc(sorted_ks.size());

  for (const auto& ranking : rankings) {
    auto it = by_doc.find(ranking.doc_id);
    if (it == by_doc.end()) continue;
    if (it->second->granularity != ranking.granularity)
      throw DataError("document '" + ranking.doc_id + "': ranking granularity " +
                      std::string(to_string(ranking.granularity)) + " vs gold granularity " +
                      std::string(to_string(it->second->granularity)));
    if (ranking.granularity != report.granularity)
      throw DataError("rankings mix row and cell granularity");
    const auto refs = ranking.refs();
    for (std::size_t i = 0; i < sorted_ks.size(); ++i) {
      const auto r = recall_at_k(refs, it->second->gold, sorted_ks[i]);
      const std::optional<double> ratios[3] = {r.overall, r.table, r.text};
      const std::size_t hits[3] = {r.hit_total(), r.hit_table, r.hit_text};
      const std::size_t totals[3] = {r.gold_total(), r.gold_table, r.gold_text};
      for (std::size_t s = 0; s < 3; ++s) {
        if (ratios[s]) {
          acc[i][s].sum += *ratios[s];
          ++acc[i][s].n;
        }
        acc[i][s].hits += hits[s];
        acc[i][s].total += totals[s];
      }
    }
  }

  for (std::size_t i = 0; i < sorted_ks.size(); ++i) {
    RecallRow row;
    row.k = sorted_ks[i];
    std::optional<double>* means[3] = {&row.overall, &row.table, &row.text};
    std::size_t* counts[3] = {&row.n_overall, &row.n_table, &row.n_text};
    for (std::size_t s = 0; s < 3; ++s) {
      const Acc& a = acc[i][s];
      if (averaging == Averaging::macro) {
        *counts[s] = a.n;
        if (a.n > 0) *means[s] = a.sum / static_cast<double>(a.n);
      } else {
        *counts[s] = a.total;
        if (a.total > 0) *means[s] = static_cast<double>(a.hits) / static_cast<double>(a.total);
      }
    }
    report.rows.push_back(row);
  }
  return report;
}

std::string render_text(const ReportSet& reports) {
  std::ostringstream os;
  std::size_t name_width = 5;
  for (const auto& [name, _] : reports.evaluations) name_width = std::max(name_width, name.size());
  for (const auto& [name, _] : reports.recalls) name_width = std::max(name_width, name.size());

  os << pad_right("model", name_width) << "  " << pad_left("exe_acc", 8) << "  " << pad_left("prog_acc", 8) << "  "
     << pad_left("evaluated", 9) << "  " << pad_left("skipped", 7) << '\n';
  for (const auto& [name, r] : reports.evaluations) {
    os << pad_right(name, name_width) << "  " << pad_left(percent(r.exe_acc), 8) << "  "
       << pad_left(percent(r.prog_acc), 8) << "  " << pad_left(std::to_string(r.n_evaluated), 9) << "  "
       << pad_left(std::to_string(r.n_skipped), 7) << '\n';
  }
  if (reports.recalls.empty()) return os.str();

  os << '\n'
     << pad_right("model", name_width) << "  " << pad_left("unit", 4) << "  " << pad_left("avg", 5) << "  "
     << pad_left("k", 3) << "  " << pad_left("overall", 8) << "  " << pad_left("table", 8) << "  "
     << pad_left("text", 8) << '\n';
  for (const auto& [name, r] : reports.recalls) {
    for (const auto& row : r.rows) {
      os << pad_right(name, name_width) << "  " << pad_left(std::string(to_string(r.granularity)), 4) << "  "
         << pad_left(std::string(to_string(r.averaging)), 5) << "  " << pad_left(std::to_string(row.k), 3) << "  "
         << pad_left(percent(row.overall), 8) << "  " << pad_left(percent(row.table), 8) << "  "
         << pad_left(percent(row.text), 8) << '\n';
    }
  }
  return os.str();
}

std::string render_json(const ReportSet& reports) {
  ojson evaluations = ojson::array();
  for (const auto& [name, r] : reports.evaluations) {
    ojson examples = ojson::array();
    for (const auto& ex : r.per_example) {
      ojson e{{"doc_id", ex.doc_id}, {"exe_ok", ex.exe_ok}, {"prog_ok", ex.prog_ok}};
      if (!ex.error.empty()) e["error"] = ex.error;
      examples.push_back(std::move(e));
    }
    evaluations.push_back({{"name", name},
                           {"exe_acc", r.exe_acc},
                           {"prog_acc", r.prog_acc},
                           {"n_evaluated", r.n_evaluated},
                           {"n_skipped", r.n_skipped},
                           {"skipped", r.skipped},
                           {"per_example", std::move(examples)}});
  }
  ojson recalls = ojson::array();
  for (const auto& [name, r] : reports.recalls) {
    ojson rows = ojson::array();
    for (const auto& row : r.rows) {
      rows.push_back({{"k", row.k},
                      {"overall", optional_json(row.overall)},
                      {"table", optional_json(row.table)},
                      {"text", optional_json(row.text)},
                      {"n_overall", row.n_overall},
                      {"n_table", row.n_table},
                      {"n_text", row.n_text}});
    }
    recalls.push_back({{"name", name},
                       {"granularity", std::string(to_string(r.granularity))},
                       {"averaging", std::string(to_string(r.averaging))},
                       {"rows", std::move(rows)}});
  }
  ojson out{{"evaluations", std::move(evaluations)}, {"recalls", std::move(recalls)}};
  return out.dump(2) + "\n";
}

DatasetStats compute_stats(std::span<const FinDocument> docs, const LabelOptions& options) {
  DatasetStats stats;
  stats.documents = docs.size();
  stats.table_dependency = table_dependency_stat(docs, options);
  double coverage_sum = 0.0;
  std::size_t labeled = 0;
  for (const auto& doc : docs) {
    stats.with_program += doc.question.program.has_value();
    stats.with_answer += doc.question.exe_ans.has_value();
    if (!doc.question.program) continue;
    LabelAudit audit{doc.id, 0.0, 0, 0, {}};
    try {
      auto labels = label_gold_facts(doc, Granularity::cell, options);
      audit.coverage = labels.coverage;
      audit.positives = labels.positives.size();
      audit.ambiguous = labels.ambiguous.size();
      coverage_sum += labels.coverage;
      ++labeled;
      stats.fully_covered += labels.coverage >= 1.0;
    } catch (const LabelError& e) {
      audit.error = e.what();
    }
    stats.labels.push_back(std::move(audit));
  }
  stats.mean_coverage = labeled == 0 ? 0.0 : coverage_sum / static_cast<double>(labeled);
  return stats;
}

std::string stats_to_json(const DatasetStats& stats) {
  ojson labels = ojson::array();
  for (const auto& a : stats.labels) {
    ojson item{{"doc_id", a.doc_id}, {"coverage", a.coverage}, {"positives", a.positives}, {"ambiguous", a.ambiguous}};
    if (!a.error.empty()) item["error"] = a.error;
    labels.push_back(std::move(item));
  }
  const auto& td = stats.table_dependency;
  ojson out{{"documents", stats.documents},
            {"with_program", stats.with_program},
            {"with_answer", stats.with_answer},
            {"table_dependency",
             {{"fraction", td.fraction},
              {"counted", td.counted},
              {"table_dependent", td.table_dependent},
              {"excluded", td.excluded}}},
            {"label_coverage", {{"mean", stats.mean_coverage}, {"fully_covered", stats.fully_covered}}},
            {"labels", std::move(labels)}};
  return out.dump(2) + "\n";
}

}  // namespace numreason
