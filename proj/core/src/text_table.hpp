#pragma once

// Internal plain-text table alignment shared by the report renderer and the
// CLI. First column left-aligned, remaining columns right-aligned.

#include <algorithm>
#include <string>
#include <vector>

namespace greenmetrics::detail {

inline std::string align_table(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return "";
  std::vector<size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::string out;
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += "  ";
      const size_t pad = widths[c] - row[c].size();
      if (c == 0) {
        out += row[c];
        if (c + 1 < row.size()) out.append(pad, ' ');
      } else {
        out.append(pad, ' ');
        out += row[c];
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace greenmetrics::detail
