#include "numreason/facts.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "numreason/program.hpp"
#include "numreason/random.hpp"
#include "numreason/text.hpp"

namespace numreason {
namespace {

bool same_number(double a, double b) {
  return std::fabs(a - b) <= 1e-6 * std::max(std::fabs(a), std::fabs(b));
}

std::string header_of(const FinDocument& doc, std::size_t col) {
  const auto& header = doc.table.front();
  return col < header.size() ? std::string(text::trim(header[col])) : std::string{};
}

bool cell_present(const FinDocument& doc, std::size_t row, std::size_t col) {
  return col < doc.table[row].size() && !text::trim(doc.table[row][col]).empty();
}

bool row_has_cells(const FinDocument& doc, std::size_t row) {
  for (std::size_t c = 1; c < doc.table[row].size(); ++c)
    if (cell_present(doc, row, c)) return true;
  return false;
}

bool sentence_present(const FinDocument& doc, std::size_t index) {
  return !text::trim(doc.sentence(index)).empty();
}

std::size_t parse_index(std::string_view digits, std::string_view key) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size())
    throw DataError("malformed fact reference '" + std::string(key) + "'");
  return value;
}

std::vector<std::size_t> search_rows(const FinDocument& doc, const LabelOptions& options) {
  std::vector<std::size_t> rows;
  if (options.restrict_to_gold_rows) {
    for (const auto& [key, _] : doc.question.gold_inds) {
      if (!key.starts_with("table_")) continue;
      std::size_t r = 0;
      auto digits = std::string_view(key).substr(6);
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), r);
      if (ec == std::errc{} && ptr == digits.data() + digits.size() && r >= 1 && r < doc.table.size())
        rows.push_back(r);
    }
  }
  if (rows.empty()) {
    for (std::size_t r = 1; r < doc.table.size(); ++r) rows.push_back(r);
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

// FNV-1a: a stable per-document sampling key.
std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string_view to_string(Granularity granularity) {
  return granularity == Granularity::row ? "row" : "cell";
}

Granularity granularity_from_string(std::string_view name) {
  if (name == "row") return Granularity::row;
  if (name == "cell") return Granularity::cell;
  throw std::invalid_argument("granularity must be 'row' or 'cell', got '" + std::string(name) + "'");
}

FactKind kind_of(const FactRef& ref) {
  return std::holds_alternative<TextRef>(ref) ? FactKind::text : FactKind::table;
}

std::string_view to_string(FactKind kind) { return kind == FactKind::table ? "table" : "text"; }

std::string fact_key(const FactRef& ref) {
  if (const auto* t = std::get_if<TextRef>(&ref)) return "text_" + std::to_string(t->sentence);
  if (const auto* r = std::get_if<RowRef>(&ref)) return "table_" + std::to_string(r->row);
  const auto& c = std::get<CellRef>(ref);
  return "cell_" + std::to_string(c.row) + "_" + std::to_string(c.col);
}

FactRef parse_fact_key(std::string_view key) {
  if (key.starts_with("text_")) return TextRef{parse_index(key.substr(5), key)};
  if (key.starts_with("table_")) return RowRef{parse_index(key.substr(6), key)};
  if (key.starts_with("cell_")) {
    auto rest = key.substr(5);
    auto sep = rest.find('_');
    if (sep == std::string_view::npos) throw DataError("malformed fact reference '" + std::string(key) + "'");
    return CellRef{parse_index(rest.substr(0, sep), key), parse_index(rest.substr(sep + 1), key)};
  }
  throw DataError("malformed fact reference '" + std::string(key) + "'");
}

std::string linearize_row(const FinDocument& doc, std::size_t row) {
  if (row < 1 || row >= doc.table.size())
    throw IndexError("row " + std::to_string(row) + " out of range in document '" + doc.id + "'");
  const std::string name(text::trim(doc.table[row].empty() ? std::string_view{} : doc.table[row][0]));
  std::string out;
  for (std::size_t c = 1; c < doc.table[row].size(); ++c) {
    if (!cell_present(doc, row, c)) continue;
    if (!out.empty()) out += " ; ";
    out += "the " + name + " of " + header_of(doc, c) + " is " + std::string(text::trim(doc.table[row][c]));
  }
  return out;
}

std::string linearize_cell(const FinDocument& doc, std::size_t row, std::size_t col) {
  if (row < 1 || row >= doc.table.size() || col < 1 || col >= doc.table[row].size())
    throw IndexError("cell (" + std::to_string(row) + ", " + std::to_string(col) + ") out of range in document '" +
                     doc.id + "'");
  if (!cell_present(doc, row, col))
    throw EmptyCellError("cell (" + std::to_string(row) + ", " + std::to_string(col) + ") of document '" + doc.id +
                         "' is empty");
  return "the " + std::string(text::trim(doc.table[row][0])) + " of " + header_of(doc, col) + " is " +
         std::string(text::trim(doc.table[row][col]));
}

std::vector<Fact> build_fact_universe(const FinDocument& doc, Granularity granularity) {
  std::vector<Fact> facts;
  for (std::size_t s = 0; s < doc.sentence_count(); ++s) {
    if (!sentence_present(doc, s)) continue;
    facts.push_back({TextRef{s}, doc.sentence(s), doc.id, FactKind::text});
  }
  for (std::size_t r = 1; r < doc.table.size(); ++r) {
    if (granularity == Granularity::row) {
      if (row_has_cells(doc, r)) facts.push_back({RowRef{r}, linearize_row(doc, r), doc.id, FactKind::table});
      continue;
    }
    for (std::size_t c = 1; c < doc.table[r].size(); ++c) {
      if (cell_present(doc, r, c))
        facts.push_back({CellRef{r, c}, linearize_cell(doc, r, c), doc.id, FactKind::table});
    }
  }
  return facts;
}

GoldLabeling label_gold_facts(const FinDocument& doc, Granularity granularity, const LabelOptions& options) {
  if (!doc.question.program) throw LabelError("document '" + doc.id + "' has no gold program");
  Program program;
  try {
    program = parse_program(*doc.question.program);
  } catch (const ProgramError& e) {
    throw LabelError("document '" + doc.id + "': gold program does not parse: " + e.what());
  }

  std::vector<double> numbers;
  for (const auto& step : program.steps) {
    for (const auto& arg : step.args) {
      const auto* n = std::get_if<Number>(&arg);
      if (n && std::none_of(numbers.begin(), numbers.end(), [&](double v) { return v == n->value; }))
        numbers.push_back(n->value);
    }
  }

  GoldLabeling out;
  out.program_numbers = numbers.size();

  // Cell values and sentence tokens are normalized once.
  struct CellNumber {
    std::size_t row, col;
    double value;
  };
  std::vector<CellNumber> cells;
  for (std::size_t r : search_rows(doc, options)) {
    for (std::size_t c = 1; c < doc.table[r].size(); ++c) {
      if (auto v = text::normalize_number(doc.table[r][c])) cells.push_back({r, c, *v});
    }
  }
  std::vector<std::vector<double>> sentence_numbers(doc.sentence_count());
  for (std::size_t s = 0; s < doc.sentence_count(); ++s) sentence_numbers[s] = text::number_tokens(doc.sentence(s));

  std::set<FactRef> confirmed;  // facts with at least one unambiguous match
  for (double number : numbers) {
    bool matched = false;

    std::vector<CellNumber> hits;
    for (const auto& cell : cells)
      if (same_number(cell.value, number)) hits.push_back(cell);
    if (!hits.empty()) {
      matched = true;
      std::set<FactRef> refs;
      for (const auto& h : hits) {
        if (granularity == Granularity::cell) {
          refs.insert(CellRef{h.row, h.col});
        } else {
          refs.insert(RowRef{h.row});
        }
      }
      if (refs.size() == 1) {
        confirmed.insert(*refs.begin());
      } else {
        out.ambiguous.insert(refs.begin(), refs.end());
      }
      if (refs.size() == 1 || options.include_ambiguous) out.positives.insert(refs.begin(), refs.end());
    }

    for (std::size_t s = 0; s < sentence_numbers.size(); ++s) {
      if (!sentence_present(doc, s)) continue;
      const auto& tokens = sentence_numbers[s];
      if (std::any_of(tokens.begin(), tokens.end(), [&](double v) { return same_number(v, number); })) {
        matched = true;
        out.positives.insert(TextRef{s});
        confirmed.insert(TextRef{s});
      }
    }
    if (matched) ++out.matched_numbers;
  }

  // Aggregations consume the whole referenced row.
  for (const auto& step : program.steps) {
    if (!is_table_op(step.op)) continue;
    auto row = find_table_row(doc.table, std::get<RowName>(step.args[0]).text);
    if (!row || !row_has_cells(doc, *row)) continue;
    if (granularity == Granularity::row) {
      out.positives.insert(RowRef{*row});
      confirmed.insert(RowRef{*row});
      continue;
    }
    for (std::size_t c = 1; c < doc.table[*row].size(); ++c) {
      if (!cell_present(doc, *row, c)) continue;
      out.positives.insert(CellRef{*row, c});
      confirmed.insert(CellRef{*row, c});
    }
  }

  if (!options.include_ambiguous) {
    for (const auto& ref : confirmed) out.ambiguous.erase(ref);
  }
  out.coverage = numbers.empty() ? 1.0
                                 : static_cast<double>(out.matched_numbers) / static_cast<double>(numbers.size());
  return out;
}

TrainingExport export_training_pairs(std::span<const FinDocument> docs, Granularity granularity,
                                     std::size_t neg_ratio, std::uint64_t seed, const LabelOptions& options) {
  if (neg_ratio < 1) throw std::invalid_argument("neg_ratio must be at least 1");
  TrainingExport out;
  for (const auto& doc : docs) {
    GoldLabeling labels;
    try {
      labels = label_gold_facts(doc, granularity, options);
    } catch (const LabelError& e) {
      out.warnings.push_back(std::string("skipped: ") + e.what());
      continue;
    }
    const auto universe = build_fact_universe(doc, granularity);
    std::vector<const Fact*> negatives;
    for (const auto& fact : universe) {
      if (labels.positives.count(fact.ref)) {
        out.pairs.push_back({doc.id, doc.question.text, fact.ref, fact.surface, 1});
      } else {
        negatives.push_back(&fact);
      }
    }
    const std::size_t positives = universe.size() - negatives.size();
    std::mt19937_64 rng(random::splitmix64(seed) ^ stable_hash(doc.id));
    for (std::size_t i : random::sample_indices(rng, negatives.size(), neg_ratio * positives)) {
      const Fact& fact = *negatives[i];
      out.pairs.push_back({doc.id, doc.question.text, fact.ref, fact.surface, 0});
    }
  }
  return out;
}

std::string training_pairs_to_jsonl(std::span<const TrainingPair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    nlohmann::ordered_json line{{"doc_id", p.doc_id},
                                {"question", p.question},
                                {"fact_ref", fact_key(p.ref)},
                                {"fact_text", p.fact_text},
                                {"label", p.label}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

}  // namespace numreason
