#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rbmm/ast.hpp"

namespace rbmm {

using EdgeLabel = std::pair<std::string, int>;  // (functor, 1-based arg)

// Region points-to graph of one procedure. Merged nodes are kept behind a
// union-find so that ids held elsewhere (alpha maps, variable table) stay
// valid; `find` yields the representative.
class RptGraph {
public:
  int add_node(const std::string &type);
  void add_edge(int src, const EdgeLabel &label, int dst);

  int find(int n) const;
  // Merges m into n, cascading over children that share a label.
  // Returns the surviving representative.
  int unify(int n, int m);

  std::optional<int> child(int n, const EdgeLabel &label) const;
  // Out edges of a representative, destinations resolved.
  std::vector<std::pair<EdgeLabel, int>> out_edges(int n) const;

  std::vector<int> nodes() const;  // representatives, ascending
  size_t node_count() const;
  size_t edge_count() const;
  std::set<int> reach(int n) const;

  const std::set<int> &vars(int n) const { return vars_[static_cast<size_t>(find(n))]; }
  bool allocated(int n) const { return alloc_[static_cast<size_t>(find(n))] != 0; }
  bool mark_allocated(int n);  // true if the mark is new
  void add_var(int n, int v) { vars_[static_cast<size_t>(find(n))].insert(v); }
  const std::string &type(int n) const { return type_[static_cast<size_t>(find(n))]; }

  // Variable -> node; -1 for variables without regions (io).
  std::vector<int> var_node;
  int node_of_var(int v) const { return var_node[static_cast<size_t>(v)] < 0 ? -1 : find(var_node[static_cast<size_t>(v)]); }

private:
  mutable std::vector<int> parent_;
  std::vector<std::set<int>> vars_;
  std::vector<char> alloc_;
  std::vector<std::map<EdgeLabel, int>> out_;
  std::vector<std::string> type_;
};

struct CallSite {
  int point = 0;
  int callee = -1;
  std::map<int, int> alpha;  // callee node -> caller node (representatives)
};

struct PointsTo {
  std::vector<RptGraph> graphs;
  std::vector<std::vector<CallSite>> sites;  // per procedure, by program point
  // Canonical region numbering: regions[p][k] is the node named R<k+1>.
  std::vector<std::vector<int>> regions;
  std::vector<std::map<int, int>> slot_of;  // node -> k

  int slot(int proc, int node) const;  // -1 if not a region of proc
  std::string region_name(int proc, int node) const;
  const CallSite *site_at(int proc, int point) const;
  int alpha(int proc, int point, int callee_node) const;  // -1 if undefined
};

// True for types whose values carry regions; io is regionless.
bool has_region(const std::string &type);

RptGraph init_graph(const Program &prog, const Procedure &p);
RptGraph intraproc(const Program &prog, const Procedure &p);

// One interproc pass over procedure `p`; returns true if its graph
// or any alpha map changed.
bool interproc(const Program &prog, int p, PointsTo &pt);

// SCCs of the call graph, callees before callers.
std::vector<std::vector<int>> call_graph_sccs(const Program &prog);

PointsTo analyze_points_to(const Program &prog);
// Runs the SCC fixpoint again on existing graphs; returns true on any change.
bool refine_points_to(const Program &prog, PointsTo &pt);
void name_regions(const Program &prog, PointsTo &pt);

// Nodes marked allocated, per procedure.
std::set<int> allocation(const PointsTo &pt, int proc);

// `R<k>{vars}[A]` per node plus an edge list.
std::string dump_rptg(const Program &prog, const PointsTo &pt, int proc);
// Renaming-independent rendering used for idempotence checks.
std::string graph_signature(const Program &prog, const PointsTo &pt, int proc);

}  // namespace rbmm
