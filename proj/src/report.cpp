#include "rbmm/report.hpp"

#include <cstdio>
#include <json.hpp>

namespace rbmm {
namespace {

nlohmann::ordered_json frames_json(const FrameStats &f) {
  nlohmann::ordered_json j;
  j["total"] = f.total;
  j["max"] = f.max;
  j["words"] = f.words;
  j["max_words"] = f.max_words;
  j["size_records"] = f.size_records;
  j["protected"] = f.protected_regions;
  return j;
}

nlohmann::ordered_json to_json(const Report &r) {
  const RunStats &s = r.stats;
  nlohmann::ordered_json j;
  j["program"] = r.program;
  j["entry"] = r.entry;
  j["solutions"] = s.solutions;
  j["steps"] = s.steps;
  j["regions_total"] = s.regions_total;
  j["regions_max"] = s.regions_max;
  j["words_total"] = s.words_total;
  j["words_max"] = s.words_max;
  j["slr"] = s.slr;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", s.saving());
  j["saving"] = nlohmann::ordered_json::parse(buf);
  j["wasted_words"] = s.wasted_words;
  j["instant_reclaim"] = {{"new_alloc_words", s.new_alloc_words},
                          {"new_region_words", s.new_region_words},
                          {"then_words", s.then_words},
                          {"commit_words", s.commit_words}};
  j["frames"] = {{"disj", frames_json(s.disj)}, {"ite", frames_json(s.ite)}, {"commit", frames_json(s.commit)}};
  return j;
}

void flatten(const nlohmann::ordered_json &j, const std::string &prefix, std::string &out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      flatten(*it, key, out);
    } else if (it->is_string()) {
      out += key + ": " + it->get<std::string>() + "\n";
    } else {
      out += key + ": " + it->dump() + "\n";
    }
  }
}

}  // namespace

std::string render_report(const Report &r, ReportFormat fmt) {
  auto j = to_json(r);
  if (fmt == ReportFormat::Json) return j.dump(2) + "\n";
  std::string out;
  flatten(j, "", out);
  return out;
}

}  // namespace rbmm
