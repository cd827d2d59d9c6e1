#pragma once

#include <set>
#include <string>
#include <vector>

#include "rbmm/ast.hpp"
#include "rbmm/pointsto.hpp"

namespace rbmm {

constexpr size_t kDefaultPathCap = 4096;

using Path = std::vector<int>;  // program points

struct PointLiveness {
  std::set<int> lv_before, lv_after;  // variables
  std::set<int> lr_before, lr_after;  // nodes of the procedure's graph
  std::set<int> vv, vr;               // instantly dead variables and their regions
  bool on_path = false;
};

struct Liveness {
  std::vector<Path> paths;
  std::vector<PointLiveness> at;  // index = point - 1

  const PointLiveness &point(int i) const { return at[static_cast<size_t>(i - 1)]; }
};

// Node sets, as graph representatives.
struct RegionClasses {
  std::set<int> local, born, dead, outlived, input, output, alloc;
};

std::vector<Path> execution_paths(const Procedure &p, size_t cap = kDefaultPathCap);
Liveness live_variables(const Program &prog, const Procedure &p, size_t cap = kDefaultPathCap);
void live_regions(Liveness &lv, const Program &prog, const Procedure &p, const RptGraph &g);

// Initial partition, then call-site demotions to outlived until a fixpoint.
std::vector<RegionClasses> classify_regions(const Program &prog, const PointsTo &pt, const std::vector<Liveness> &live);

std::set<int> reach_of_vars(const RptGraph &g, const std::set<int> &vars);

struct Analysis {
  PointsTo pt;
  std::vector<Liveness> live;
  std::vector<RegionClasses> classes;
};

Analysis analyze_program(const Program &prog, size_t path_cap = kDefaultPathCap);

std::string dump_liveness(const Program &prog, const Analysis &a, int proc);
std::string dump_classes(const Program &prog, const Analysis &a);
// `{R1,R2}` with regions ordered by canonical number.
std::string region_set_str(const PointsTo &pt, int proc, const std::set<int> &nodes);

}  // namespace rbmm
