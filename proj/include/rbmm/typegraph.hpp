#pragma once

#include <string>
#include <vector>

#include "rbmm/ast.hpp"

namespace rbmm {

struct TypeGraphEdge {
  int src = 0;
  std::string functor;
  int arg = 0;  // 1-based argument position
  int dst = 0;
};

// Type-based region graph: one node per type reachable from the root type.
struct TypeGraph {
  std::vector<std::string> node_types;  // node id -> housed type
  int principal = 0;                     // node of the root type
  std::vector<TypeGraphEdge> edges;      // sorted by (src, functor, arg)

  int node_of(const std::string &type) const;  // -1 if absent
};

TypeGraph build_type_graph(const TypeTable &types, const std::string &type);

// Edge list rendering: `R^src -(f,i)-> R^dst`, one edge per line.
std::string dump_type_graph(const TypeGraph &g);

}  // namespace rbmm
