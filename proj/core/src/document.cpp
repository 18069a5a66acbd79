#include "numreason/document.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace numreason {
namespace {

using nlohmann::json;

std::string where(std::size_t index, std::string_view field) {
  std::ostringstream os;
  os << "example #" << index << ": field '" << field << "'";
  return os.str();
}

std::string cell_to_string(const json& cell, std::size_t index) {
  if (cell.is_string()) return cell.get<std::string>();
  if (cell.is_number()) return cell.dump();
  if (cell.is_null()) return {};
  throw DataError(where(index, "table") + " cells must be strings");
}

std::vector<std::string> string_list(const json& obj, const char* key, std::size_t index) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw DataError(where(index, key) + " must be an array of strings");
  for (const auto& s : *it) {
    if (!s.is_string()) throw DataError(where(index, key) + " must be an array of strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

FinDocument decode_document(const json& obj, std::size_t index) {
  if (!obj.is_object()) throw DataError("example #" + std::to_string(index) + " is not a JSON object");
  FinDocument doc;
  if (auto it = obj.find("id"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw DataError(where(index, "id") + " must be a string");
    doc.id = it->get<std::string>();
  }
  doc.pre_text = string_list(obj, "pre_text", index);
  doc.post_text = string_list(obj, "post_text", index);

  if (auto it = obj.find("table"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw DataError(where(index, "table") + " must be an array of rows");
    for (const auto& row : *it) {
      if (!row.is_array()) throw DataError(where(index, "table") + " rows must be arrays");
      TableRow cells;
      for (const auto& cell : row) cells.push_back(cell_to_string(cell, index));
      doc.table.push_back(std::move(cells));
    }
  }

  auto qa = obj.find("qa");
  if (qa == obj.end() || qa->is_null()) return doc;
  if (!qa->is_object()) throw DataError(where(index, "qa") + " must be an object");
  if (auto it = qa->find("question"); it != qa->end() && !it->is_null()) {
    if (!it->is_string()) throw DataError(where(index, "qa.question") + " must be a string");
    doc.question.text = it->get<std::string>();
  }
  if (auto it = qa->find("program"); it != qa->end() && !it->is_null()) {
    if (!it->is_string()) throw DataError(where(index, "qa.program") + " must be a string");
    doc.question.program = it->get<std::string>();
  }
  if (auto it = qa->find("exe_ans"); it != qa->end() && !it->is_null()) {
    if (it->is_number()) {
      doc.question.exe_ans = it->get<double>();
    } else if (it->is_string()) {
      doc.question.exe_ans = it->get<std::string>();
    } else {
      throw DataError(where(index, "qa.exe_ans") + " must be a number or a string");
    }
  }
  if (auto it = qa->find("gold_inds"); it != qa->end() && !it->is_null()) {
    if (!it->is_object()) throw DataError(where(index, "qa.gold_inds") + " must be an object");
    for (const auto& [key, value] : it->items()) {
      if (!value.is_string()) throw DataError(where(index, "qa.gold_inds") + " values must be strings");
      doc.question.gold_inds.emplace(key, value.get<std::string>());
    }
  }
  return doc;
}

[[noreturn]] void rethrow_parse_error(const json::parse_error& e, std::size_t base_offset) {
  std::ostringstream os;
  os << "malformed JSON at byte " << (base_offset + e.byte) << ": " << e.what();
  throw DataError(os.str());
}

json encode_document(const FinDocument& doc) {
  json qa = json::object();
  qa["question"] = doc.question.text;
  if (doc.question.program) qa["program"] = *doc.question.program;
  if (doc.question.exe_ans) {
    std::visit([&](const auto& v) { qa["exe_ans"] = v; }, *doc.question.exe_ans);
  }
  if (!doc.question.gold_inds.empty()) qa["gold_inds"] = doc.question.gold_inds;
  return json{{"id", doc.id},
              {"pre_text", doc.pre_text},
              {"post_text", doc.post_text},
              {"table", doc.table},
              {"qa", std::move(qa)}};
}

}  // namespace

const std::string& FinDocument::sentence(std::size_t index) const {
  if (index < pre_text.size()) return pre_text[index];
  index -= pre_text.size();
  if (index < post_text.size()) return post_text[index];
  throw IndexError("sentence index out of range in document '" + id + "'");
}

bool is_gold_ind_key(std::string_view key) {
  std::string_view digits;
  if (key.starts_with("table_")) {
    digits = key.substr(6);
  } else if (key.starts_with("text_")) {
    digits = key.substr(5);
  } else {
    return false;
  }
  if (digits.empty()) return false;
  for (char c : digits)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

std::vector<FinDocument> read_documents(std::string_view raw) {
  std::size_t first = 0;
  while (first < raw.size() && std::isspace(static_cast<unsigned char>(raw[first]))) ++first;
  std::vector<FinDocument> docs;
  if (first == raw.size()) return docs;

  if (raw[first] == '[') {
    json arr;
    try {
      arr = json::parse(raw);
    } catch (const json::parse_error& e) {
      rethrow_parse_error(e, 0);
    }
    docs.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) docs.push_back(decode_document(arr[i], i));
    return docs;
  }

  // JSONL: one example object per non-blank line
  std::size_t offset = 0;
  while (offset < raw.size()) {
    std::size_t end = raw.find('\n', offset);
    if (end == std::string_view::npos) end = raw.size();
    std::string_view line = raw.substr(offset, end - offset);
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (!blank) {
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::parse_error& e) {
        rethrow_parse_error(e, offset);
      }
      docs.push_back(decode_document(obj, docs.size()));
    }
    offset = end + 1;
  }
  return docs;
}

ValidationReport validate_dataset(std::span<const FinDocument> docs) {
  ValidationReport report;
  report.documents = docs.size();
  std::set<std::string> seen;
  for (const auto& doc : docs) {
    const std::size_t before = report.violations.size();
    auto flag = [&](std::string path, std::string message) {
      report.violations.push_back({doc.id, std::move(path), std::move(message)});
    };

    if (doc.id.empty()) {
      flag("id", "empty id");
    } else if (!seen.insert(doc.id).second) {
      flag("id", "duplicate id");
    }

    if (doc.table.empty()) {
      flag("table", "table has no rows");
    } else {
      const std::size_t width = doc.table.front().size();
      if (width == 0) flag("table[0]", "table has no columns");
      for (std::size_t r = 1; r < doc.table.size(); ++r) {
        if (doc.table[r].size() != width) {
          flag("table[" + std::to_string(r) + "]",
               "ragged table: row " + std::to_string(r) + " has " + std::to_string(doc.table[r].size()) +
                   " cells, expected " + std::to_string(width));
        }
      }
    }

    if (doc.question.exe_ans) {
      const auto& ans = *doc.question.exe_ans;
      bool ok = std::holds_alternative<double>(ans)
                    ? std::isfinite(std::get<double>(ans))
                    : (std::get<std::string>(ans) == "yes" || std::get<std::string>(ans) == "no");
      if (!ok) flag("qa.exe_ans", "answer not number/yes/no");
    }

    for (const auto& [key, _] : doc.question.gold_inds) {
      if (!is_gold_ind_key(key)) flag("qa.gold_inds." + key, "gold_inds key must match (table|text)_<n>");
    }

    if (report.violations.size() == before) ++report.valid_documents;
  }
  return report;
}

std::vector<FinDocument> parse_dataset(std::string_view raw) {
  auto docs = read_documents(raw);
  auto report = validate_dataset(docs);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    throw DataError("invalid example '" + v.doc_id + "' at " + v.path + ": " + v.message);
  }
  return docs;
}

std::string serialize_dataset(std::span<const FinDocument> docs) {
  json arr = json::array();
  for (const auto& doc : docs) arr.push_back(encode_document(doc));
  return arr.dump(2) + "\n";
}

std::string to_json(const ValidationReport& report) {
  json violations = json::array();
  for (const auto& v : report.violations)
    violations.push_back({{"doc_id", v.doc_id}, {"path", v.path}, {"message", v.message}});
  json out{{"documents", report.documents},
           {"valid_documents", report.valid_documents},
           {"violation_count", report.violations.size()},
           {"violations", std::move(violations)}};
  return out.dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::vector<FinDocument> load_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_file(path));
}

}  // namespace numreason
