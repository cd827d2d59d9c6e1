#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "rbmm/frontend.hpp"

namespace rbmm {

namespace {

std::string pa(const std::string &name, size_t arity) { return name + "/" + std::to_string(arity); }

bool is_arith_op(const Term &t) {
  if (t.kind != Term::Kind::Functor) return false;
  if (t.args.size() == 2)
    return t.name == "+" || t.name == "-" || t.name == "*" || t.name == "//" || t.name == "mod";
  return t.args.size() == 1 && t.name == "-";
}

struct BuiltinSig {
  BuiltinOp op;
  int arity;
};

std::optional<BuiltinOp> builtin_of(const std::string &name, size_t arity) {
  static const std::map<std::string, BuiltinSig> table = {
      {"true", {BuiltinOp::True, 0}},      {"fail", {BuiltinOp::Fail, 0}},
      {"print", {BuiltinOp::Print, 1}},    {"write", {BuiltinOp::Print, 1}},
      {"io.write", {BuiltinOp::Write, 3}}, {"io.nl", {BuiltinOp::Nl, 2}},
  };
  auto it = table.find(name);
  if (it == table.end() || it->second.arity != static_cast<int>(arity)) return std::nullopt;
  return it->second.op;
}

// ---------------------------------------------------------------------------
// State variable expansion: `!S` in a head stands for S_0, S; in body calls
// each occurrence threads a new version, the last one being S.

class StateVarExpander {
public:
  void run(Clause &c) {
    std::vector<Term> head_args;
    for (auto &a : c.head.args) {
      if (a.is_var() && a.name[0] == '!') {
        std::string base = a.name.substr(1);
        states_.push_back(base);
        head_args.push_back(var(base + "_0", a.loc));
        head_args.push_back(var(base, a.loc));
      } else {
        head_args.push_back(a);
      }
    }
    c.head.args = std::move(head_args);
    if (!c.has_body) {
      c.body.kind = SGoal::Kind::Conj;
      c.body.loc = c.loc;
    }
    for (const auto &s : states_) {
      int uses = 0;
      count(c.body, s, uses, false);
      total_[s] = uses;
      used_[s] = 0;
    }
    rewrite(c.body);
    for (const auto &s : states_) {
      if (total_[s] != 0) continue;
      SGoal u;
      u.kind = SGoal::Kind::Unify;
      u.op = ":=";
      u.loc = c.loc;
      u.lhs = var(s, c.loc);
      u.rhs = var(s + "_0", c.loc);
      if (c.body.kind != SGoal::Kind::Conj) {
        SGoal wrap;
        wrap.kind = SGoal::Kind::Conj;
        wrap.loc = c.body.loc;
        wrap.sub.push_back(std::move(c.body));
        c.body = std::move(wrap);
      }
      c.body.sub.push_back(std::move(u));
      c.has_body = true;
    }
  }

private:
  static Term var(const std::string &n, SrcLoc loc) {
    Term t;
    t.kind = Term::Kind::Var;
    t.name = n;
    t.loc = loc;
    return t;
  }

  void count(const SGoal &g, const std::string &s, int &uses, bool nested) {
    if (g.kind == SGoal::Kind::Call) {
      for (const auto &a : g.call.args)
        if (a.is_var() && a.name == "!" + s) {
          if (nested)
            throw Error(Error::Kind::Mode, a.loc,
                        "state variable !" + s + " used inside a disjunction, if-then-else or negation");
          ++uses;
        }
      return;
    }
    bool inner = nested || (g.kind != SGoal::Kind::Conj);
    for (const auto &sg : g.sub) count(sg, s, uses, inner);
  }

  void rewrite(SGoal &g) {
    if (g.kind == SGoal::Kind::Call) {
      std::vector<Term> args;
      for (auto &a : g.call.args) {
        if (a.is_var() && a.name[0] == '!') {
          std::string s = a.name.substr(1);
          if (!total_.count(s))
            throw Error(Error::Kind::Mode, a.loc, "state variable !" + s + " is not a head argument");
          int k = ++used_[s];
          args.push_back(var(k == 1 ? s + "_0" : s + "_" + std::to_string(k - 1), a.loc));
          args.push_back(var(k == total_[s] ? s : s + "_" + std::to_string(k), a.loc));
        } else {
          args.push_back(a);
        }
      }
      g.call.args = std::move(args);
      return;
    }
    for (auto &sg : g.sub) rewrite(sg);
  }

  std::vector<std::string> states_;
  std::map<std::string, int> total_, used_;
};

void check_no_state_vars(const Term &t) {
  if (t.is_var() && !t.name.empty() && t.name[0] == '!')
    throw Error(Error::Kind::Mode, t.loc, "state variable " + t.name + " may only appear as a call argument");
  for (const auto &a : t.args) check_no_state_vars(a);
}

// ---------------------------------------------------------------------------

class ProcBuilder {
public:
  ProcBuilder(const Program &prog, const std::set<std::string> &declared, Procedure &proc)
      : prog_(prog), declared_(declared), p_(proc) {}

  void build(std::vector<Clause> clauses) {
    for (auto &c : clauses) {
      StateVarExpander e;
      e.run(c);
      if (c.head.args.size() != static_cast<size_t>(p_.arity))
        throw Error(Error::Kind::Syntax, c.loc, "arity mismatch in clause for " + pa(p_.name, p_.arity));
    }
    choose_head_vars(clauses);
    std::vector<Goal> bodies;
    for (auto &c : clauses) bodies.push_back(clause_body(c));
    if (bodies.size() == 1)
      p_.body = std::move(bodies[0]);
    else
      p_.body = Goal::disj(std::move(bodies), p_.loc);
    infer_types();
  }

private:
  void choose_head_vars(const std::vector<Clause> &clauses) {
    p_.head_vars.assign(p_.arity, -1);
    std::set<std::string> taken;
    for (int i = 0; i < p_.arity; ++i) {
      for (const auto &c : clauses) {
        const Term &t = c.head.args[i];
        if (t.is_var() && t.name != "_" && !taken.count(t.name)) {
          taken.insert(t.name);
          p_.head_vars[i] = p_.add_var(t.name, p_.arg_types[i]);
          break;
        }
      }
    }
    for (int i = 0; i < p_.arity; ++i) {
      if (p_.head_vars[i] >= 0) continue;
      std::string n = fresh_name(taken);
      taken.insert(n);
      p_.head_vars[i] = p_.add_var(n, p_.arg_types[i]);
    }
  }

  std::string fresh_name(const std::set<std::string> &also) {
    for (;;) {
      std::string n = "V_" + std::to_string(p_.fresh_counter++);
      if (p_.var_index(n) < 0 && !also.count(n)) return n;
    }
  }

  int fresh_var() { return p_.add_var(fresh_name({}), ""); }

  int clause_var(const std::string &name) {
    if (name == "_") return fresh_var();
    auto it = vm_.find(name);
    if (it != vm_.end()) return it->second;
    std::string n = name;
    for (int k = 1; p_.var_index(n) >= 0; ++k) n = name + "_" + std::to_string(k);
    int v = p_.add_var(n, "");
    vm_[name] = v;
    return v;
  }

  Goal clause_body(const Clause &c) {
    vm_.clear();
    std::vector<Goal> items;
    for (int i = 0; i < p_.arity; ++i) {
      const Term &t = c.head.args[i];
      int hv = p_.head_vars[i];
      check_no_state_vars(t);
      if (t.is_var()) {
        if (t.name == "_") continue;
        auto it = vm_.find(t.name);
        if (it == vm_.end()) {
          vm_[t.name] = hv;
        } else {
          items.push_back(unify_vv(hv, it->second, "=", t.loc));
        }
      } else {
        items.push_back(unify_term(hv, t, "=", t.loc));
      }
    }
    if (c.has_body) items.push_back(goal(c.body));
    return Goal::conj(std::move(items), c.loc);
  }

  static Goal unify_vv(int a, int b, const std::string &op, SrcLoc loc) {
    Goal g;
    g.kind = GoalKind::Unify;
    g.loc = loc;
    g.lhs = a;
    g.rhs = b;
    if (op == ":=") {
      g.ukind = UnifyKind::Assign;
      g.fixed_dir = true;
    } else if (op == "==") {
      g.ukind = UnifyKind::Test;
      g.fixed_dir = true;
    } else if (op != "=") {
      throw Error(Error::Kind::Mode, loc, "operator " + op + " requires a functor on the right-hand side");
    }
    return g;
  }

  // `x = t` for a non-variable term t, as a chain conjunction built
  // post-order, right to left.
  Goal unify_term(int x, const Term &t, const std::string &op, SrcLoc loc) {
    std::vector<Goal> chain;
    bool fixed = op == "<=" || op == "=>";
    UnifyKind k = op == "<=" ? UnifyKind::Construct : op == "=>" ? UnifyKind::Deconstruct : UnifyKind::Unspecified;
    if (op != "=" && !fixed) throw Error(Error::Kind::Mode, loc, "operator " + op + " cannot take a functor");
    emit_chain(x, t, chain, k, fixed);
    if (chain.size() == 1) return std::move(chain[0]);
    Goal g = Goal::conj(std::move(chain), loc);
    g.chain_root = x;
    return g;
  }

  void emit_chain(int x, const Term &t, std::vector<Goal> &out, UnifyKind k, bool fixed) {
    check_no_state_vars(t);
    if (is_arith_op(t)) throw Error(Error::Kind::Syntax, t.loc, "arithmetic expression inside a term");
    Goal g;
    g.kind = GoalKind::Unify;
    g.loc = t.loc;
    g.lhs = x;
    g.functor = t.functor_name();
    g.ukind = k;
    g.fixed_dir = fixed;
    std::vector<int> argv(t.args.size(), -1);
    for (size_t i = t.args.size(); i-- > 0;) {
      const Term &a = t.args[i];
      if (a.is_var()) {
        argv[i] = clause_var(a.name);
      } else {
        int v = fresh_var();
        emit_chain(v, a, out, k, fixed);
        argv[i] = v;
      }
    }
    g.args = std::move(argv);
    out.push_back(std::move(g));
  }

  Expr expr(const Term &t) {
    Expr e;
    switch (t.kind) {
      case Term::Kind::Var:
        check_no_state_vars(t);
        e.kind = Expr::Kind::Var;
        e.var = clause_var(t.name);
        return e;
      case Term::Kind::Int:
        e.kind = Expr::Kind::Int;
        e.value = t.value;
        return e;
      case Term::Kind::Functor:
        if (is_int_literal(t.name)) {
          e.kind = Expr::Kind::Int;
          e.value = std::stoll(t.name);
          return e;
        }
        if (!is_arith_op(t)) throw Error(Error::Kind::Type, t.loc, "expected an arithmetic expression");
        if (t.args.size() == 1) {
          e.kind = Expr::Kind::Neg;
        } else if (t.name == "+") {
          e.kind = Expr::Kind::Add;
        } else if (t.name == "-") {
          e.kind = Expr::Kind::Sub;
        } else if (t.name == "*") {
          e.kind = Expr::Kind::Mul;
        } else if (t.name == "//") {
          e.kind = Expr::Kind::Div;
        } else {
          e.kind = Expr::Kind::Mod;
        }
        for (const auto &a : t.args) e.args.push_back(expr(a));
        return e;
    }
    return e;
  }

  Goal goal(const SGoal &s) {
    switch (s.kind) {
      case SGoal::Kind::Conj: {
        std::vector<Goal> items;
        for (const auto &g : s.sub) items.push_back(goal(g));
        return Goal::conj(std::move(items), s.loc);
      }
      case SGoal::Kind::Disj: {
        std::vector<Goal> items;
        for (const auto &g : s.sub) items.push_back(goal(g));
        return Goal::disj(std::move(items), s.loc);
      }
      case SGoal::Kind::Ite: {
        Goal g;
        g.kind = GoalKind::Ite;
        g.loc = s.loc;
        for (const auto &sg : s.sub) g.sub.push_back(goal(sg));
        return g;
      }
      case SGoal::Kind::Not: return negate(goal(s.sub[0]), s.loc);
      case SGoal::Kind::Some:
      case SGoal::Kind::All: {
        Goal g;
        g.kind = GoalKind::Some;
        g.loc = s.loc;
        for (const auto &v : s.vars) g.qvars.push_back(clause_var(v));
        if (s.kind == SGoal::Kind::Some) {
          g.sub.push_back(goal(s.sub[0]));
          return g;
        }
        // all [Vs] G  ==  not (some [Vs] not G)
        g.sub.push_back(negate(goal(s.sub[0]), s.loc));
        return negate(std::move(g), s.loc);
      }
      case SGoal::Kind::Instr: return Goal::conj({}, s.loc);
      case SGoal::Kind::Unify: return unify(s);
      case SGoal::Kind::Call: return call(s);
    }
    return Goal::conj({}, s.loc);
  }

  static Goal negate(Goal g, SrcLoc loc) {
    Goal ite;
    ite.kind = GoalKind::Ite;
    ite.loc = loc;
    ite.sub.push_back(std::move(g));
    ite.sub.push_back(Goal::failure(loc));
    ite.sub.push_back(Goal::truth(loc));
    return ite;
  }

  Goal compare(BuiltinOp op, const Term &l, const Term &r, SrcLoc loc) {
    Goal g;
    g.kind = GoalKind::Builtin;
    g.loc = loc;
    g.bop = op;
    g.exprs.push_back(expr(l));
    g.exprs.push_back(expr(r));
    return g;
  }

  Goal is_goal(const Term &lhs, const Term &rhs, SrcLoc loc) {
    if (!lhs.is_var()) return compare(BuiltinOp::Eq, lhs, rhs, loc);
    check_no_state_vars(lhs);
    Goal g;
    g.kind = GoalKind::Builtin;
    g.loc = loc;
    g.bop = BuiltinOp::Is;
    g.exprs.push_back(expr(rhs));
    g.out = clause_var(lhs.name);
    return g;
  }

  Goal unify(const SGoal &s) {
    const std::string &op = s.op;
    static const std::map<std::string, BuiltinOp> cmp = {
        {"<", BuiltinOp::Lt}, {">", BuiltinOp::Gt},    {"=<", BuiltinOp::Le},
        {">=", BuiltinOp::Ge}, {"=:=", BuiltinOp::Eq}, {"=\\=", BuiltinOp::Ne}};
    if (auto it = cmp.find(op); it != cmp.end()) return compare(it->second, s.lhs, s.rhs, s.loc);
    if (op == "is") return is_goal(s.lhs, s.rhs, s.loc);
    if (op == "\\=") {
      SGoal u = s;
      u.op = "=";
      return negate(unify(u), s.loc);
    }
    const Term *l = &s.lhs, *r = &s.rhs;
    if (op == "=") {
      if (is_arith_op(*r)) return is_goal(*l, *r, s.loc);
      if (is_arith_op(*l)) return is_goal(*r, *l, s.loc);
      if (!l->is_var() && r->is_var()) std::swap(l, r);
    }
    check_no_state_vars(*l);
    if (l->is_var()) {
      int x = clause_var(l->name);
      if (r->is_var()) {
        check_no_state_vars(*r);
        return unify_vv(x, clause_var(r->name), op, s.loc);
      }
      return unify_term(x, *r, op, s.loc);
    }
    if (op != "=") throw Error(Error::Kind::Mode, s.loc, "left-hand side of " + op + " must be a variable");
    int v = fresh_var();
    std::vector<Goal> items;
    items.push_back(unify_term(v, *l, "=", s.loc));
    items.push_back(unify_term(v, *r, "=", s.loc));
    return Goal::conj(std::move(items), s.loc);
  }

  Goal call(const SGoal &s) {
    const Term &t = s.call;
    auto bop = builtin_of(t.name, t.args.size());
    std::vector<Goal> pre, post;
    std::vector<int> args;
    std::set<int> seen;
    for (const auto &a : t.args) {
      check_no_state_vars(a);
      if (a.is_var()) {
        int v = clause_var(a.name);
        if (seen.count(v)) {
          int f = fresh_var();
          post.push_back(unify_vv(f, v, "=", a.loc));
          v = f;
        }
        seen.insert(v);
        args.push_back(v);
      } else {
        int f = fresh_var();
        (bop ? pre : post).push_back(unify_term(f, a, "=", a.loc));
        args.push_back(f);
      }
    }
    Goal g;
    g.loc = s.loc;
    if (bop) {
      g.kind = GoalKind::Builtin;
      g.bop = *bop;
      if (*bop == BuiltinOp::Write || *bop == BuiltinOp::Nl) {
        g.out = args.back();
        args.pop_back();
      }
      g.args = std::move(args);
    } else {
      if (!declared_.count(pa(t.name, t.args.size())))
        throw Error(Error::Kind::Syntax, s.loc, "undeclared predicate " + pa(t.name, t.args.size()));
      g.kind = GoalKind::Call;
      g.pred = t.name;
      g.args = std::move(args);
    }
    if (pre.empty() && post.empty()) return g;
    std::vector<Goal> items = std::move(pre);
    items.push_back(std::move(g));
    for (auto &x : post) items.push_back(std::move(x));
    return Goal::conj(std::move(items), s.loc);
  }

  // ---- types

  std::string &ty(int v) { return p_.vars[v].type; }

  bool set_type(int v, const std::string &t, SrcLoc loc) {
    if (t.empty()) return false;
    if (ty(v).empty()) {
      if (!prog_.types.contains(t)) throw Error(Error::Kind::Type, loc, "unknown type " + t);
      ty(v) = t;
      return true;
    }
    if (ty(v) != t)
      throw Error(Error::Kind::Type, loc,
                  "type error: variable " + p_.vars[v].name + " has type " + ty(v) + ", expected " + t);
    return false;
  }

  void expr_int(const Expr &e, SrcLoc loc, bool &changed) {
    std::vector<int> vs;
    e.collect_vars(vs);
    for (int v : vs) changed |= set_type(v, kIntType, loc);
  }

  void infer_goal(const Goal &g, bool &changed, bool final) {
    switch (g.kind) {
      case GoalKind::Unify:
        if (g.functor.empty() && g.rhs >= 0) {
          changed |= set_type(g.lhs, ty(g.rhs), g.loc);
          changed |= set_type(g.rhs, ty(g.lhs), g.loc);
          return;
        }
        {
          int n = static_cast<int>(g.args.size());
          std::string lt = ty(g.lhs);
          if (lt.empty()) {
            auto cands = prog_.types.types_with_ctor(g.functor, n);
            if (cands.empty())
              throw Error(Error::Kind::Type, g.loc, "unknown constructor " + g.functor + "/" + std::to_string(n));
            if (cands.size() > 1) {
              if (final)
                throw Error(Error::Kind::Type, g.loc,
                            "ambiguous constructor " + g.functor + "/" + std::to_string(n));
              return;
            }
            changed |= set_type(g.lhs, cands[0], g.loc);
            lt = cands[0];
          }
          if (lt == kIntType) {
            if (n != 0 || !is_int_literal(g.functor))
              throw Error(Error::Kind::Type, g.loc, "type error: " + g.functor + " is not an int");
            return;
          }
          const Constructor *c = prog_.types.get(lt).find_ctor(g.functor, n);
          if (!c)
            throw Error(Error::Kind::Type, g.loc,
                        "type error: constructor " + g.functor + "/" + std::to_string(n) + " is not of type " + lt);
          for (int i = 0; i < n; ++i) changed |= set_type(g.args[i], c->args[i], g.loc);
        }
        return;
      case GoalKind::Call: {
        auto ids = prog_.procs_of(g.pred, static_cast<int>(g.args.size()));
        const std::vector<std::string> *types = nullptr;
        if (!ids.empty())
          types = &prog_.procs[ids[0]].arg_types;
        else if (g.pred == p_.name && static_cast<int>(g.args.size()) == p_.arity)
          types = &p_.arg_types;
        else
          types = &decl_types(g.pred, g.args.size());
        for (size_t i = 0; i < g.args.size(); ++i) changed |= set_type(g.args[i], (*types)[i], g.loc);
        return;
      }
      case GoalKind::Builtin:
        for (const auto &e : g.exprs) expr_int(e, g.loc, changed);
        if (g.bop == BuiltinOp::Is) changed |= set_type(g.out, kIntType, g.loc);
        if (g.bop == BuiltinOp::Write) {
          changed |= set_type(g.args[1], kIoType, g.loc);
          changed |= set_type(g.out, kIoType, g.loc);
        }
        if (g.bop == BuiltinOp::Nl) {
          changed |= set_type(g.args[0], kIoType, g.loc);
          changed |= set_type(g.out, kIoType, g.loc);
        }
        return;
      default:
        for (const auto &s : g.sub) infer_goal(s, changed, final);
        return;
    }
  }

  const std::vector<std::string> &decl_types(const std::string &name, size_t arity) const {
    auto it = decl_types_->find(pa(name, arity));
    return it->second;
  }

  void infer_types() {
    bool changed = true;
    while (changed) {
      changed = false;
      infer_goal(p_.body, changed, false);
    }
    infer_goal(p_.body, changed, true);
    for (const auto &v : p_.vars)
      if (v.type.empty()) throw Error(Error::Kind::Type, p_.loc, "cannot determine the type of variable " + v.name + " in " + pa(p_.name, p_.arity));
  }

public:
  const std::map<std::string, std::vector<std::string>> *decl_types_ = nullptr;

private:
  const Program &prog_;
  const std::set<std::string> &declared_;
  Procedure &p_;
  std::map<std::string, int> vm_;
};

size_t head_arity(const Term &head) {
  size_t n = 0;
  for (const auto &a : head.args) n += (a.is_var() && !a.name.empty() && a.name[0] == '!') ? 2 : 1;
  return n;
}

void check_calls_declared(const SGoal &g, const std::set<std::string> &declared) {
  if (g.kind == SGoal::Kind::Call) {
    size_t n = head_arity(g.call);
    if (!builtin_of(g.call.name, n) && !declared.count(pa(g.call.name, n)))
      throw Error(Error::Kind::Syntax, g.loc, "undeclared predicate " + pa(g.call.name, n));
    return;
  }
  for (const auto &s : g.sub) check_calls_declared(s, declared);
}

}  // namespace

Program normalize(const SurfaceProgram &sp) {
  Program prog;
  std::set<std::string> type_names;
  for (const auto &t : sp.types) {
    if (prog.types.contains(t.name))
      throw Error(Error::Kind::Type, t.loc, "duplicate type " + t.name);
    std::set<std::pair<std::string, size_t>> seen;
    for (const auto &c : t.ctors)
      if (!seen.insert({c.name, c.args.size()}).second)
        throw Error(Error::Kind::Type, t.loc, "duplicate constructor " + c.name + " in type " + t.name);
    prog.types.add(t);
  }
  for (const auto &t : sp.types)
    for (const auto &c : t.ctors)
      for (const auto &a : c.args)
        if (!prog.types.contains(a)) throw Error(Error::Kind::Type, t.loc, "unknown type " + a);

  std::set<std::string> declared;
  std::map<std::string, std::vector<std::string>> decl_types;
  for (const auto &d : sp.preds) {
    std::string key = pa(d.name, d.arg_types.size());
    if (!declared.insert(key).second) throw Error(Error::Kind::Syntax, d.loc, "duplicate declaration of " + key);
    for (const auto &t : d.arg_types)
      if (!prog.types.contains(t)) throw Error(Error::Kind::Type, d.loc, "unknown type " + t);
    if (d.modes.empty()) throw Error(Error::Kind::Mode, d.loc, "no mode declaration for " + key);
    decl_types[key] = d.arg_types;
  }

  std::map<std::string, std::vector<Clause>> by_pred;
  for (const auto &c : sp.clauses) {
    if (c.has_body) check_calls_declared(c.body, declared);
    std::string key = pa(c.head.name, head_arity(c.head));
    if (!declared.count(key)) throw Error(Error::Kind::Syntax, c.loc, "undeclared predicate " + key);
    by_pred[key].push_back(c);
  }

  for (const auto &d : sp.preds) {
    for (size_t m = 0; m < d.modes.size(); ++m) {
      Procedure p;
      p.name = d.name;
      p.arity = static_cast<int>(d.arg_types.size());
      p.mode_index = static_cast<int>(m);
      p.arg_types = d.arg_types;
      p.modes = d.modes[m];
      p.det = d.dets[m];
      p.loc = d.loc;
      prog.procs.push_back(std::move(p));
    }
  }
  for (auto &p : prog.procs) {
    std::string key = pa(p.name, p.arity);
    auto it = by_pred.find(key);
    if (it == by_pred.end()) throw Error(Error::Kind::Syntax, p.loc, "no clauses for " + key);
    std::vector<Clause> clauses = it->second;
    size_t nmodes = prog.procs_of(p.name, p.arity).size();
    if (sp.annotated && nmodes > 1 && clauses.size() == nmodes)
      clauses = {clauses[static_cast<size_t>(p.mode_index)]};
    ProcBuilder b(prog, declared, p);
    b.decl_types_ = &decl_types;
    b.build(clauses);
  }
  return prog;
}

Program parse_program(const std::string &text, ParseOptions opts) { return normalize(parse_surface(text, opts)); }

Program load_program(const std::string &text, ParseOptions opts) {
  Program p = parse_program(text, opts);
  mode_order_and_annotate(p);
  return p;
}

}  // namespace rbmm
