#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "rbmm/liveness.hpp"
#include "rbmm/transform.hpp"

namespace rbmm::testing {

std::string read_text(const std::string &path);
std::string corpus_path(const std::string &name);
std::string golden_path(const std::string &name);

// Renames region variables R<k> to R1, R2, ... in order of first occurrence
// within each clause (a clause starts at a non-indented line).
std::string normalize_regions(const std::string &annotated);

// Liveness row of the quicksort tables: variable names and region names as
// printed in the reference tables.
struct LiveRow {
  int point;
  bool after;
  std::set<std::string> lv, lr;
};

const std::vector<LiveRow> &expected_split_rows();
const std::vector<LiveRow> &expected_qsort_rows();

// Rows of `proc` from an analysis, with variable names passed through
// `rename` (for compiler-introduced names) and regions as R<k>.
std::vector<LiveRow> computed_rows(const Program &prog, const Analysis &a, int proc,
                                   const std::map<std::string, std::string> &rename);

// True if some bijection of region names maps `got` onto `want` row by row
// (same points, same variables).
bool rows_match_up_to_renaming(const std::vector<LiveRow> &want, const std::vector<LiveRow> &got, std::string *why);

// Region node of a variable of a procedure.
int region_of(const Program &prog, const Analysis &a, int proc, const std::string &var);

// Liveness property checks; each returns a description of the first failure or "".
std::string check_path_inclusion(const Program &prog, const Analysis &a);
std::string check_construction_growth(const Program &prog, const Analysis &a);
// Unifies each pair of distinct nodes of every graph on a copy and checks
// the node count drops.
std::string check_unify_shrinks(const Analysis &a);
std::string check_idempotent(const Program &prog);

// Independent allocation oracles.
uint64_t nrev_words_total(uint64_t n);   // iota, singleton lists and append copies
uint64_t primes_words_total(int limit);  // candidate list, filtered lists, primes
uint64_t primes_words_max(int limit);    // the candidate list

}  // namespace rbmm::testing
