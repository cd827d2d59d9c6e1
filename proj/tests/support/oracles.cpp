#include "oracles.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "rbmm/frontend.hpp"
#include "rbmm/pointsto.hpp"

namespace rbmm::testing {

std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string corpus_path(const std::string &name) { return std::string(RBMM_CORPUS_DIR) + "/" + name; }
std::string golden_path(const std::string &name) { return std::string(RBMM_GOLDEN_DIR) + "/" + name; }

std::string normalize_regions(const std::string &annotated) {
  static const std::regex region(R"(\bR[0-9]+\b)");
  std::istringstream in(annotated);
  std::string line, out;
  std::map<std::string, std::string> names;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != ' ' && line[0] != ':') names.clear();
    std::string res;
    auto begin = std::sregex_iterator(line.begin(), line.end(), region);
    size_t last = 0;
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
      res += line.substr(last, static_cast<size_t>(it->position()) - last);
      auto [slot, fresh] = names.emplace(it->str(), "R" + std::to_string(names.size() + 1));
      res += slot->second;
      last = static_cast<size_t>(it->position() + it->length());
    }
    res += line.substr(last);
    out += res + "\n";
  }
  return out;
}

namespace {

std::vector<LiveRow> expand(const std::vector<std::tuple<std::vector<std::pair<int, bool>>, std::set<std::string>,
                                                         std::set<std::string>>> &table) {
  std::vector<LiveRow> rows;
  for (const auto &[points, lv, lr] : table)
    for (const auto &[pt, after] : points) rows.push_back({pt, after, lv, lr});
  std::sort(rows.begin(), rows.end(),
            [](const LiveRow &a, const LiveRow &b) { return std::tie(a.point, a.after) < std::tie(b.point, b.after); });
  return rows;
}

constexpr bool B = false, A = true;

}  // namespace

const std::vector<LiveRow> &expected_split_rows() {
  static const std::vector<LiveRow> rows = expand({
      {{{1, B}}, {"X", "L"}, {"R5", "R1", "R2"}},
      {{{1, A}, {2, B}}, {}, {}},
      {{{2, A}, {3, B}}, {"L1"}, {"R3", "R2"}},
      {{{3, A}}, {"L1", "L2"}, {"R3", "R2", "R4"}},
      {{{4, B}}, {"X", "L"}, {"R5", "R1", "R2"}},
      {{{4, A}, {5, B}}, {"X", "Le", "Ls"}, {"R5", "R2", "R1"}},
      {{{5, A}, {6, B}}, {"X", "Le", "Ls"}, {"R5", "R2", "R1"}},
      {{{6, A}, {7, B}}, {"L2", "Le", "L11"}, {"R4", "R2", "R3"}},
      {{{7, A}}, {"L1", "L2"}, {"R3", "R2", "R4"}},
      {{{8, B}}, {"X", "Le", "Ls"}, {"R5", "R2", "R1"}},
      {{{8, A}, {9, B}}, {"L1", "Le", "L21"}, {"R3", "R2", "R4"}},
      {{{9, A}}, {"L1", "L2"}, {"R3", "R2", "R4"}},
  });
  return rows;
}

const std::vector<LiveRow> &expected_qsort_rows() {
  static const std::vector<LiveRow> rows = expand({
      {{{1, B}}, {"L", "A"}, {"R6", "R7", "R8"}},
      {{{1, A}, {2, B}}, {"A"}, {"R8", "R7"}},
      {{{2, A}}, {"S"}, {"R8", "R7"}},
      {{{3, B}}, {"L", "A"}, {"R6", "R7", "R8"}},
      {{{3, A}, {4, B}}, {"A", "Le", "Ls"}, {"R8", "R7", "R6"}},
      {{{4, A}, {5, B}}, {"A", "Le", "L1", "L2"}, {"R8", "R7", "R9", "R10"}},
      {{{5, A}, {6, B}}, {"Le", "L1", "S2"}, {"R9", "R7", "R8"}},
      {{{6, A}, {7, B}}, {"L1", "A1"}, {"R9", "R7", "R8"}},
      {{{7, A}}, {"S"}, {"R8", "R7"}},
  });
  return rows;
}

std::vector<LiveRow> computed_rows(const Program &prog, const Analysis &a, int proc,
                                   const std::map<std::string, std::string> &rename) {
  const Procedure &p = prog.procs[static_cast<size_t>(proc)];
  const Liveness &lv = a.live[static_cast<size_t>(proc)];
  auto vname = [&](int v) {
    const std::string &n = p.vars[static_cast<size_t>(v)].name;
    auto it = rename.find(n);
    return it == rename.end() ? n : it->second;
  };
  std::vector<LiveRow> rows;
  for (int i = 1; i <= p.num_points; ++i) {
    const PointLiveness &pl = lv.point(i);
    if (!pl.on_path) continue;
    for (bool after : {false, true}) {
      LiveRow r{i, after, {}, {}};
      for (int v : after ? pl.lv_after : pl.lv_before) r.lv.insert(vname(v));
      for (int n : after ? pl.lr_after : pl.lr_before) r.lr.insert(a.pt.region_name(proc, n));
      rows.push_back(r);
    }
  }
  return rows;
}

bool rows_match_up_to_renaming(const std::vector<LiveRow> &want, const std::vector<LiveRow> &got, std::string *why) {
  auto fail = [&](const std::string &m) {
    if (why) *why = m;
    return false;
  };
  if (want.size() != got.size()) return fail("row counts differ");
  std::set<std::string> wn, gn;
  for (size_t i = 0; i < want.size(); ++i) {
    if (want[i].point != got[i].point || want[i].after != got[i].after) return fail("row keys differ");
    if (want[i].lv != got[i].lv) return fail("LV differs at point " + std::to_string(want[i].point));
    wn.insert(want[i].lr.begin(), want[i].lr.end());
    gn.insert(got[i].lr.begin(), got[i].lr.end());
  }
  if (wn.size() != gn.size()) return fail("region counts differ");
  std::vector<std::string> from(wn.begin(), wn.end()), to(gn.begin(), gn.end());
  std::sort(to.begin(), to.end());
  do {
    std::map<std::string, std::string> m;
    for (size_t i = 0; i < from.size(); ++i) m[from[i]] = to[i];
    bool ok = true;
    for (size_t i = 0; ok && i < want.size(); ++i) {
      std::set<std::string> mapped;
      for (const auto &r : want[i].lr) mapped.insert(m[r]);
      ok = mapped == got[i].lr;
    }
    if (ok) return true;
  } while (std::next_permutation(to.begin(), to.end()));
  return fail("no region renaming makes the LR rows equal");
}

int region_of(const Program &prog, const Analysis &a, int proc, const std::string &var) {
  int v = prog.procs[static_cast<size_t>(proc)].var_index(var);
  if (v < 0) throw std::runtime_error("no variable " + var);
  return a.pt.graphs[static_cast<size_t>(proc)].node_of_var(v);
}

namespace {

template <class S>
bool subset(const S &a, const S &b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::string where(const Procedure &p, int i) { return p.display_name() + " point " + std::to_string(i); }

}  // namespace

std::string check_path_inclusion(const Program &prog, const Analysis &a) {
  for (size_t p = 0; p < prog.procs.size(); ++p) {
    const Liveness &lv = a.live[p];
    for (const Path &path : lv.paths)
      for (size_t k = 0; k + 1 < path.size(); ++k) {
        const PointLiveness &i = lv.point(path[k]), &j = lv.point(path[k + 1]);
        if (!subset(j.lv_before, i.lv_after)) return "LV inclusion fails after " + where(prog.procs[p], path[k]);
        if (!subset(j.lr_before, i.lr_after)) return "LR inclusion fails after " + where(prog.procs[p], path[k]);
      }
  }
  return "";
}

std::string check_construction_growth(const Program &prog, const Analysis &a) {
  for (size_t p = 0; p < prog.procs.size(); ++p) {
    const Procedure &proc = prog.procs[p];
    for (const Goal *g : collect_atoms(proc.body)) {
      if (g->kind != GoalKind::Unify) continue;
      const PointLiveness &pl = a.live[p].point(g->point);
      if (!pl.on_path) continue;
      bool grows = subset(pl.lr_before, pl.lr_after) && pl.lr_before != pl.lr_after;
      if (g->ukind == UnifyKind::Construct && !subset(pl.lr_before, pl.lr_after))
        return "construction shrinks LR at " + where(proc, g->point);
      if (grows && g->ukind != UnifyKind::Construct) return "LR grows at a non-construction, " + where(proc, g->point);
    }
  }
  return "";
}

std::string check_unify_shrinks(const Analysis &a) {
  for (size_t p = 0; p < a.pt.graphs.size(); ++p) {
    const RptGraph &g = a.pt.graphs[p];
    auto nodes = g.nodes();
    for (size_t i = 0; i < nodes.size(); ++i)
      for (size_t j = i + 1; j < nodes.size() && j < i + 4; ++j) {
        if (g.type(nodes[i]) != g.type(nodes[j])) continue;
        RptGraph copy = g;
        size_t before = copy.node_count();
        copy.unify(nodes[i], nodes[j]);
        if (copy.node_count() >= before) return "unify did not shrink graph " + std::to_string(p);
      }
  }
  return "";
}

std::string check_idempotent(const Program &prog) {
  Analysis a1 = analyze_program(prog);
  Analysis a2 = analyze_program(prog);
  for (size_t p = 0; p < prog.procs.size(); ++p) {
    int i = static_cast<int>(p);
    if (graph_signature(prog, a1.pt, i) != graph_signature(prog, a2.pt, i)) return "graphs differ between runs";
    if (dump_liveness(prog, a1, i) != dump_liveness(prog, a2, i)) return "liveness differs between runs";
  }
  if (dump_classes(prog, a1) != dump_classes(prog, a2)) return "classes differ between runs";
  if (refine_points_to(prog, a1.pt)) return "a further fixpoint pass changed the graphs";
  return "";
}

uint64_t nrev_words_total(uint64_t n) {
  uint64_t cells = n;  // iota
  for (uint64_t k = 1; k <= n; ++k) cells += 1 + (k - 1);  // [X] and the copy of the reversed tail
  return 2 * cells;
}

uint64_t primes_words_total(int limit) {
  std::vector<int> xs;
  for (int i = 2; i <= limit; ++i) xs.push_back(i);
  uint64_t cells = xs.size();
  while (!xs.empty()) {
    int p = xs.front();
    std::vector<int> rest;
    for (size_t i = 1; i < xs.size(); ++i)
      if (xs[i] % p != 0) rest.push_back(xs[i]);
    cells += rest.size() + 1;  // the filtered list and the output cell for p
    xs = std::move(rest);
  }
  return 2 * cells;
}

uint64_t primes_words_max(int limit) { return 2 * static_cast<uint64_t>(limit - 1); }

}  // namespace rbmm::testing
