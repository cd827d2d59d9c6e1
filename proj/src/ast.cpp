#include "rbmm/ast.hpp"

#include <algorithm>
#include <cctype>

namespace rbmm {

const Constructor *TypeDef::find_ctor(const std::string &cname, int arity) const {
  for (const auto &c : ctors)
    if (c.name == cname && static_cast<int>(c.args.size()) == arity) return &c;
  return nullptr;
}

bool TypeDef::word_sized() const {
  if (builtin) return true;
  return std::all_of(ctors.begin(), ctors.end(), [](const Constructor &c) { return c.args.empty(); });
}

TypeTable::TypeTable() {
  add(TypeDef{kIntType, {}, true, {}});
  add(TypeDef{kIoType, {}, true, {}});
}

void TypeTable::add(TypeDef def) {
  auto it = index_.find(def.name);
  if (it != index_.end()) {
    defs_[it->second] = std::move(def);
    return;
  }
  index_[def.name] = defs_.size();
  defs_.push_back(std::move(def));
}

const TypeDef *TypeTable::find(const std::string &name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &defs_[it->second];
}

const TypeDef &TypeTable::get(const std::string &name) const {
  const TypeDef *d = find(name);
  if (!d) throw Error(Error::Kind::Type, {}, "unknown type " + name);
  return *d;
}

std::vector<std::string> TypeTable::types_with_ctor(const std::string &name, int arity) const {
  std::vector<std::string> out;
  if (arity == 0 && is_int_literal(name)) {
    out.push_back(kIntType);
    return out;
  }
  for (const auto &d : defs_)
    if (d.find_ctor(name, arity)) out.push_back(d.name);
  return out;
}

bool is_int_literal(const std::string &f) {
  if (f.empty()) return false;
  size_t i = (f[0] == '-') ? 1 : 0;
  if (i == f.size()) return false;
  for (; i < f.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(f[i]))) return false;
  return true;
}

void Expr::collect_vars(std::vector<int> &out) const {
  if (kind == Kind::Var) {
    if (std::find(out.begin(), out.end(), var) == out.end()) out.push_back(var);
    return;
  }
  for (const auto &a : args) a.collect_vars(out);
}

Goal Goal::conj(std::vector<Goal> gs, SrcLoc loc) {
  Goal g;
  g.kind = GoalKind::Conj;
  g.sub = std::move(gs);
  g.loc = loc;
  return g;
}

Goal Goal::disj(std::vector<Goal> gs, SrcLoc loc) {
  Goal g;
  g.kind = GoalKind::Disj;
  g.sub = std::move(gs);
  g.loc = loc;
  return g;
}

Goal Goal::truth(SrcLoc loc) {
  Goal g;
  g.kind = GoalKind::Builtin;
  g.bop = BuiltinOp::True;
  g.loc = loc;
  return g;
}

Goal Goal::failure(SrcLoc loc) {
  Goal g;
  g.kind = GoalKind::Builtin;
  g.bop = BuiltinOp::Fail;
  g.loc = loc;
  return g;
}

std::string Procedure::display_name() const {
  std::string s = name + "/" + std::to_string(arity);
  if (mode_index > 0) s += "#" + std::to_string(mode_index);
  return s;
}

int Procedure::var_index(const std::string &n) const {
  for (size_t i = 0; i < vars.size(); ++i)
    if (vars[i].name == n) return static_cast<int>(i);
  return -1;
}

int Procedure::add_var(const std::string &n, const std::string &type) {
  vars.push_back({n, type});
  return static_cast<int>(vars.size()) - 1;
}

std::string Procedure::fresh_name() {
  for (;;) {
    std::string n = "V_" + std::to_string(fresh_counter++);
    if (var_index(n) < 0) return n;
  }
}

std::vector<int> Procedure::in_args() const {
  std::vector<int> out;
  for (size_t i = 0; i < head_vars.size(); ++i)
    if (modes[i] == Mode::In) out.push_back(head_vars[i]);
  return out;
}

std::vector<int> Procedure::out_args() const {
  std::vector<int> out;
  for (size_t i = 0; i < head_vars.size(); ++i)
    if (modes[i] == Mode::Out) out.push_back(head_vars[i]);
  return out;
}

std::vector<int> Program::procs_of(const std::string &n, int arity) const {
  std::vector<int> out;
  for (size_t i = 0; i < procs.size(); ++i)
    if (procs[i].name == n && procs[i].arity == arity) out.push_back(static_cast<int>(i));
  return out;
}

int Program::find_proc(const std::string &display) const {
  for (size_t i = 0; i < procs.size(); ++i)
    if (procs[i].display_name() == display) return static_cast<int>(i);
  for (size_t i = 0; i < procs.size(); ++i)
    if (procs[i].name == display && procs[i].mode_index == 0) return static_cast<int>(i);
  return -1;
}

std::vector<int> atom_inputs(const Program &prog, const Goal &g) {
  std::vector<int> out;
  switch (g.kind) {
    case GoalKind::Unify:
      switch (g.ukind) {
        case UnifyKind::Construct: out = g.args; break;
        case UnifyKind::Deconstruct: out = {g.lhs}; break;
        case UnifyKind::Test:
          out = {g.lhs};
          if (g.rhs >= 0) out.push_back(g.rhs);
          break;
        case UnifyKind::Assign: out = {g.rhs}; break;
        case UnifyKind::Unspecified: break;
      }
      break;
    case GoalKind::Call: {
      const Procedure &q = prog.procs.at(g.callee);
      for (size_t i = 0; i < g.args.size(); ++i)
        if (q.modes[i] == Mode::In) out.push_back(g.args[i]);
      break;
    }
    case GoalKind::Builtin:
      for (const auto &e : g.exprs) e.collect_vars(out);
      for (int a : g.args)
        if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
      break;
    default: break;
  }
  return out;
}

std::vector<int> atom_outputs(const Program &prog, const Goal &g) {
  std::vector<int> out;
  switch (g.kind) {
    case GoalKind::Unify:
      switch (g.ukind) {
        case UnifyKind::Construct:
        case UnifyKind::Assign: out = {g.lhs}; break;
        case UnifyKind::Deconstruct: out = g.args; break;
        default: break;
      }
      break;
    case GoalKind::Call: {
      const Procedure &q = prog.procs.at(g.callee);
      for (size_t i = 0; i < g.args.size(); ++i)
        if (q.modes[i] == Mode::Out) out.push_back(g.args[i]);
      break;
    }
    case GoalKind::Builtin:
      if (g.out >= 0) out.push_back(g.out);
      break;
    default: break;
  }
  return out;
}

namespace {
template <typename G, typename Out>
void collect(G &g, Out &out) {
  if (g.is_atomic()) {
    out.push_back(&g);
    return;
  }
  for (auto &s : g.sub) collect(s, out);
}
}  // namespace

std::vector<const Goal *> collect_atoms(const Goal &body) {
  std::vector<const Goal *> out;
  collect(body, out);
  return out;
}

std::vector<Goal *> collect_atoms_mut(Goal &body) {
  std::vector<Goal *> out;
  collect(body, out);
  return out;
}

}  // namespace rbmm
