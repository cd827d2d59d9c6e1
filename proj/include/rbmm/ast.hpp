#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rbmm/common.hpp"

namespace rbmm {

// ---------------------------------------------------------------------------
// Types

struct Constructor {
  std::string name;
  std::vector<std::string> args;
};

struct TypeDef {
  std::string name;
  std::vector<Constructor> ctors;
  bool builtin = false;
  SrcLoc loc;

  const Constructor *find_ctor(const std::string &name, int arity) const;
  // int, io and enumerations: values fit in a word and never need heap cells.
  bool word_sized() const;
};

class TypeTable {
public:
  TypeTable();

  void add(TypeDef def);
  const TypeDef *find(const std::string &name) const;
  const TypeDef &get(const std::string &name) const;
  bool contains(const std::string &name) const { return find(name) != nullptr; }
  const std::vector<TypeDef> &all() const { return defs_; }

  // Types declaring a constructor `name/arity`.
  std::vector<std::string> types_with_ctor(const std::string &name, int arity) const;

private:
  std::vector<TypeDef> defs_;
  std::map<std::string, size_t> index_;
};

inline const std::string kIntType = "int";
inline const std::string kIoType = "io";
inline const std::string kNilName = "[]";
inline const std::string kConsName = "[|]";

bool is_int_literal(const std::string &functor);

// ---------------------------------------------------------------------------
// Expressions used by arithmetic builtins

struct Expr {
  enum class Kind { Var, Int, Add, Sub, Mul, Div, Mod, Neg };
  Kind kind = Kind::Int;
  int var = -1;
  int64_t value = 0;
  std::vector<Expr> args;

  void collect_vars(std::vector<int> &out) const;
};

// ---------------------------------------------------------------------------
// Goals (normalized, superhomogeneous form)

enum class GoalKind { Unify, Call, Builtin, Conj, Disj, Ite, Some };

enum class UnifyKind { Unspecified, Assign, Test, Construct, Deconstruct };

enum class BuiltinOp { Is, Lt, Gt, Le, Ge, Eq, Ne, Print, Write, Nl, True, Fail };

struct Goal {
  GoalKind kind = GoalKind::Conj;
  SrcLoc loc;

  // Unify: `lhs = rhs` (var-var) or `lhs = functor(args)`.
  UnifyKind ukind = UnifyKind::Unspecified;
  bool fixed_dir = false;  // direction fixed by the source operator
  int lhs = -1;
  int rhs = -1;
  std::string functor;

  // Call: callee predicate name (resolved to a procedure by mode analysis).
  std::string pred;
  int callee = -1;

  // Builtin.
  BuiltinOp bop = BuiltinOp::True;
  std::vector<Expr> exprs;
  int out = -1;  // result variable (Is) or io output (Write/Nl)

  // Unify args, call args, builtin value args (print/write) plus io input.
  std::vector<int> args;

  // Compound goals. Ite: sub = {cond, then, else}. Some: sub = {inner}.
  std::vector<Goal> sub;
  std::vector<int> qvars;
  bool commit = false;
  int chain_root = -1;  // conjunction produced by flattening a term

  // Set by mode analysis.
  DetInfo det;
  int point = 0;  // program point for atomic goals
  bool is_switch = false;
  int switch_var = -1;

  bool is_atomic() const {
    return kind == GoalKind::Unify || kind == GoalKind::Call || kind == GoalKind::Builtin;
  }
  bool is_construct() const { return kind == GoalKind::Unify && ukind == UnifyKind::Construct; }

  static Goal conj(std::vector<Goal> gs, SrcLoc loc = {});
  static Goal disj(std::vector<Goal> gs, SrcLoc loc = {});
  static Goal truth(SrcLoc loc = {});
  static Goal failure(SrcLoc loc = {});
};

struct VarInfo {
  std::string name;
  std::string type;
};

struct Procedure {
  std::string name;
  int arity = 0;
  int mode_index = 0;
  std::vector<std::string> arg_types;
  std::vector<Mode> modes;
  Determinism det = Determinism::Det;
  SrcLoc loc;

  std::vector<int> head_vars;
  Goal body;
  std::vector<VarInfo> vars;
  int num_points = 0;

  std::string display_name() const;
  int var_index(const std::string &name) const;  // -1 if absent
  int add_var(const std::string &name, const std::string &type);
  std::string fresh_name();

  std::vector<int> in_args() const;
  std::vector<int> out_args() const;

  int fresh_counter = 0;
};

struct Program {
  TypeTable types;
  std::vector<Procedure> procs;

  // procedures of predicate name/arity, one per declared mode
  std::vector<int> procs_of(const std::string &name, int arity) const;
  int find_proc(const std::string &display) const;  // -1 if absent
};

// in_args / out_args of an atomic goal after mode analysis.
std::vector<int> atom_inputs(const Program &prog, const Goal &g);
std::vector<int> atom_outputs(const Program &prog, const Goal &g);

// Atomic goals of a procedure indexed by program point - 1.
std::vector<const Goal *> collect_atoms(const Goal &body);
std::vector<Goal *> collect_atoms_mut(Goal &body);

}  // namespace rbmm
