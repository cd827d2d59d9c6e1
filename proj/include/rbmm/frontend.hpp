#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rbmm/ast.hpp"

namespace rbmm {

// ---------------------------------------------------------------------------
// Surface syntax

struct Term {
  enum class Kind { Var, Functor, Int };
  Kind kind = Kind::Var;
  std::string name;  // variable name or functor name
  int64_t value = 0;
  std::vector<Term> args;
  std::string region;  // `X@R` in annotated input
  SrcLoc loc;

  bool is_var() const { return kind == Kind::Var; }
  std::string functor_name() const { return kind == Kind::Int ? std::to_string(value) : name; }
};

struct SGoal {
  enum class Kind { Call, Unify, Conj, Disj, Ite, Not, Some, All, Instr };
  Kind kind = Kind::Conj;
  SrcLoc loc;

  Term call;                  // Call: the goal term (name/args)
  std::string op;             // Unify/compare operator, or "create"/"remove" for Instr
  Term lhs, rhs;
  std::vector<SGoal> sub;     // Conj/Disj items; Ite {c,t,e}; Not/Some/All {g}
  std::vector<std::string> vars;

  // annotated input only
  std::string in_region;               // `<= f(..) in R`
  std::vector<std::string> region_args;  // `p<R1,R2>(...)`
  bool has_region_args = false;
  int label = 0;                       // `(k)` program point label
};

struct Clause {
  Term head;
  SGoal body;
  bool has_body = false;
  std::vector<std::string> head_region_args;  // annotated input only
  SrcLoc loc;
};

struct PredDecl {
  std::string name;
  std::vector<std::string> arg_types;
  std::vector<std::vector<Mode>> modes;
  std::vector<Determinism> dets;
  SrcLoc loc;
};

struct SurfaceProgram {
  bool annotated = false;  // clause k of a multi-mode predicate is mode k
  std::vector<TypeDef> types;
  std::vector<PredDecl> preds;
  std::vector<Clause> clauses;
};

struct ParseOptions {
  bool allow_annotations = false;
};

SurfaceProgram parse_surface(const std::string &text, ParseOptions opts = {});

// ---------------------------------------------------------------------------
// Pipeline stages

// parse + type resolution + clause merging and flattening (no mode analysis).
Program parse_program(const std::string &text, ParseOptions opts = {});
Program normalize(const SurfaceProgram &sp);

// Conjunction ordering, unification specialization, determinism, unused
// construction elimination and program point numbering.
void mode_order_and_annotate(Program &prog);

// parse_program followed by mode_order_and_annotate.
Program load_program(const std::string &text, ParseOptions opts = {});

// Hooks used by the annotated-program emitter. The default prints the plain
// program.
struct PrintDecor {
  virtual ~PrintDecor() = default;
  virtual bool labels() const { return false; }
  virtual std::string head_regions(const Procedure &) const { return {}; }
  virtual std::string call_regions(const Procedure &, const Goal &) const { return {}; }
  virtual std::string var_region(const Procedure &, int) const { return {}; }
  virtual std::string construct_region(const Procedure &, const Goal &) const { return {}; }
  virtual std::vector<std::string> before(const Procedure &, const Goal &) const { return {}; }
  virtual std::vector<std::string> after(const Procedure &, const Goal &) const { return {}; }
};

// Pretty printer for normalized programs. Declarations are included so the
// output is itself a valid program.
std::string print_program(const Program &prog, const PrintDecor *decor = nullptr);
std::string print_declarations(const Program &prog);
std::string print_goal(const Program &prog, const Procedure &p, const Goal &g);
std::string print_atom(const Program &prog, const Procedure &p, const Goal &g);

}  // namespace rbmm
