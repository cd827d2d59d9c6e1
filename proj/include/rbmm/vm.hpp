#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rbmm/ast.hpp"
#include "rbmm/runtime.hpp"
#include "rbmm/transform.hpp"

namespace rbmm {

// Ground term given on the command line for an entry input.
struct ArgTerm {
  bool is_int = false;
  int64_t value = 0;
  std::string functor;
  std::vector<ArgTerm> args;
};

// Parses whitespace- or comma-separated terms: integers, constants,
// f(..) and list syntax.
std::vector<ArgTerm> parse_arg_terms(const std::string &text);

struct VmOptions {
  RuntimeConfig runtime;
  bool check_safety = false;
  uint64_t step_limit = 0;  // 0: unlimited
  bool all_solutions = false;
};

struct RunResult {
  std::string output;  // program output, then one line per solution
  RunStats stats;
  uint64_t solutions = 0;
  uint64_t live_words_at_exit = 0;
  uint64_t live_regions_at_exit = 0;
};

// Entry lookup by `name` (first mode) or display name `name/arity#mode`.
int find_entry(const Program &prog, const std::string &name);

RunResult run_program(const Program &prog, const AnnotatedProgram &ann, int entry, const std::vector<ArgTerm> &args,
                      const VmOptions &opts);

// Region-free interpreter over the base program. Used as the behavioral
// oracle; words_total counts words of constructed cells.
struct ReferenceResult {
  std::string output;
  uint64_t solutions = 0;
  uint64_t words_total = 0;
};

ReferenceResult run_reference(const Program &prog, int entry, const std::vector<ArgTerm> &args, bool all_solutions,
                              uint64_t step_limit = 0);

// Runs `fn` on a thread with a large stack; exceptions are rethrown.
void with_big_stack(const std::function<void()> &fn);

}  // namespace rbmm
