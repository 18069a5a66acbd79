#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "numreason/document.hpp"

namespace testing_util {

inline numreason::FinDocument make_doc(std::string id, numreason::Table table,
                                       std::vector<std::string> pre = {}, std::string program = "",
                                       std::map<std::string, std::string> gold_inds = {}) {
  numreason::FinDocument d;
  d.id = std::move(id);
  d.pre_text = std::move(pre);
  d.table = std::move(table);
  d.question.text = "what is it?";
  if (!program.empty()) d.question.program = std::move(program);
  d.question.gold_inds = std::move(gold_inds);
  return d;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("numreason-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

inline std::filesystem::path fixtures() { return NUMREASON_FIXTURES; }

}  // namespace testing_util
