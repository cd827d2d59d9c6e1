#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rbmm/ast.hpp"
#include "rbmm/liveness.hpp"

namespace rbmm {

// Region variables of a procedure are numbered slots; slot k prints as
// names[k]. Slots of word-sized types are virtual: they take part in the
// analysis but no region is materialized for them at runtime.
struct AnnotatedProc {
  std::vector<std::string> names;
  std::vector<char> virt;
  std::vector<int> var_slot;  // var -> slot, -1 for regionless variables
  std::vector<int> formals;
  std::map<int, std::vector<int>> actuals;  // call point -> caller slots
  std::map<int, int> construct_slot;        // construction point -> slot
  // Indexed by point - 1. Executed as removes_before, creates_before, atom,
  // removes_after. The transformer keeps each list sorted and free of
  // repeats; a parsed file keeps what it says, repeats included.
  std::vector<std::vector<int>> removes_before, creates_before, removes_after;

  // Analysis facts used by the runtime support code, as slots.
  std::vector<std::set<int>> live_before;                    // LRbefore per point
  std::vector<std::vector<std::pair<EdgeLabel, int>>> edges;  // per slot
  std::set<int> dead, born;

  int slot_named(const std::string &name) const;  // -1 if absent
};

struct AnnotatedProgram {
  std::vector<AnnotatedProc> procs;
};

// Formal lists: deadR, then bornR, then the rest of allocR, each by slot.
std::vector<int> region_formals(const Analysis &a, int proc);

AnnotatedProgram transform_program(const Program &prog, const Analysis &a);

// Moves removes_before of an atom into removes_after of the atom right
// before it in the same conjunction. Both execute at the same moment; the
// printed form cannot tell them apart.
void canonicalize(const Program &prog, AnnotatedProgram &ann);

std::string emit_annotated(const Program &prog, const AnnotatedProgram &ann);

struct LoadedProgram {
  Program prog;
  AnnotatedProgram ann;
};

// Plain source: analyze and transform. Annotated source (as written by
// emit_annotated, possibly edited): the base program is analyzed to recover
// slot names and variable regions, then the parsed region arguments,
// construction regions and instructions replace the computed ones.
LoadedProgram load_and_transform(const std::string &text, size_t path_cap = kDefaultPathCap);
LoadedProgram load_annotated(const std::string &text, size_t path_cap = kDefaultPathCap);

}  // namespace rbmm
