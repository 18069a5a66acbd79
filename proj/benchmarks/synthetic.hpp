#pragma once

#include <string>

#include "numreason/document.hpp"

namespace bench {

// A filing-sized document: `rows` x `cols` table plus prose.
inline numreason::FinDocument synthetic_doc(std::size_t rows, std::size_t cols, std::size_t sentences) {
  numreason::FinDocument d;
  d.id = "bench";
  d.table.push_back({""});
  for (std::size_t c = 1; c <= cols; ++c) d.table[0].push_back(std::to_string(2000 + c));
  for (std::size_t r = 1; r <= rows; ++r) {
    numreason::TableRow row{"line item " + std::to_string(r)};
    for (std::size_t c = 1; c <= cols; ++c) row.push_back("$ " + std::to_string(r * 100 + c) + ".5");
    d.table.push_back(std::move(row));
  }
  for (std::size_t s = 0; s < sentences; ++s)
    d.pre_text.push_back("revenue for segment " + std::to_string(s) + " grew by " + std::to_string(s + 3) +
                         " % compared with the prior year .");
  d.question.text = "what was the change in line item 3 between 2001 and 2002?";
  d.question.program = "subtract(302.5, 301.5), divide(#0, 301.5), table_sum(line item 3, none)";
  return d;
}

}  // namespace bench
