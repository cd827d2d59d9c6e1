#pragma once

#include <string>

#include "rbmm/runtime.hpp"

namespace rbmm {

enum class ReportFormat { Text, Json };

struct Report {
  std::string program;
  std::string entry;
  RunStats stats;
};

// Both renderings carry the same numbers; the text form is one
// `key: value` line per number, keys as in the JSON form joined by dots.
std::string render_report(const Report &r, ReportFormat fmt);

}  // namespace rbmm
