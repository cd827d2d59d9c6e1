#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <functional>

#include "rbmm/frontend.hpp"

namespace rbmm {

namespace {

using VarSet = std::set<int>;

VarSet intersect(const VarSet &a, const VarSet &b) {
  VarSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

class ModeChecker {
public:
  ModeChecker(Program &prog, Procedure &p) : prog_(prog), p_(p) {}

  void run() {
    VarSet bound;
    for (int v : p_.in_args()) bound.insert(v);
    VarSet produced;
    auto g = try_goal(p_.body, bound, produced);
    if (!g) {
      SrcLoc loc = reason_loc_.line ? reason_loc_ : p_.loc;
      throw Error(Error::Kind::Mode, loc, "mode error in " + p_.display_name() + ": " + reason_);
    }
    for (int v : p_.out_args())
      if (!bound.count(v) && !produced.count(v))
        throw Error(Error::Kind::Mode, p_.loc,
                    "mode error in " + p_.display_name() + ": output variable " + name(v) + " is not produced");
    p_.body = std::move(*g);
  }

private:
  const std::string &name(int v) const { return p_.vars[v].name; }

  bool not_ready(const Goal &g, const std::string &why) {
    reason_ = why;
    reason_loc_ = g.loc;
    return false;
  }

  [[noreturn]] void two_producers(const Goal &g, int v) {
    throw Error(Error::Kind::Mode, g.loc,
                "mode error in " + p_.display_name() + ": variable " + name(v) + " has two producers");
  }

  int fresh_like(int v) {
    std::string n = p_.fresh_name();
    return p_.add_var(n, p_.vars[v].type);
  }

  Goal make_test(int a, int b, SrcLoc loc) {
    Goal t;
    t.kind = GoalKind::Unify;
    t.ukind = UnifyKind::Test;
    t.lhs = a;
    t.rhs = b;
    t.loc = loc;
    return t;
  }

  Goal make_assign(int a, int b, SrcLoc loc) {
    Goal t = make_test(a, b, loc);
    t.ukind = UnifyKind::Assign;
    return t;
  }

  std::string first_unbound(const std::vector<int> &vs, const VarSet &bound) {
    for (int v : vs)
      if (!bound.count(v)) return name(v);
    return "?";
  }

  std::optional<Goal> try_goal(const Goal &g, const VarSet &bound, VarSet &produced) {
    switch (g.kind) {
      case GoalKind::Unify: return try_unify(g, bound, produced);
      case GoalKind::Call: return try_call(g, bound, produced);
      case GoalKind::Builtin: return try_builtin(g, bound, produced);
      case GoalKind::Conj: return try_conj(g, bound, produced);
      case GoalKind::Disj: {
        Goal out = g;
        std::optional<VarSet> common;
        for (auto &s : out.sub) {
          VarSet pr;
          auto r = try_goal(s, bound, pr);
          if (!r) return std::nullopt;
          s = std::move(*r);
          common = common ? intersect(*common, pr) : pr;
        }
        if (common) produced.insert(common->begin(), common->end());
        return out;
      }
      case GoalKind::Ite: {
        Goal out = g;
        VarSet pc, pt, pe;
        auto c = try_goal(g.sub[0], bound, pc);
        if (!c) return std::nullopt;
        VarSet b2 = bound;
        b2.insert(pc.begin(), pc.end());
        auto t = try_goal(g.sub[1], b2, pt);
        if (!t) return std::nullopt;
        auto e = try_goal(g.sub[2], bound, pe);
        if (!e) return std::nullopt;
        out.sub = {std::move(*c), std::move(*t), std::move(*e)};
        pt.insert(pc.begin(), pc.end());
        VarSet both = intersect(pt, pe);
        produced.insert(both.begin(), both.end());
        return out;
      }
      case GoalKind::Some: {
        Goal out = g;
        VarSet pi;
        auto r = try_goal(g.sub[0], bound, pi);
        if (!r) return std::nullopt;
        out.sub[0] = std::move(*r);
        for (int v : pi)
          if (std::find(g.qvars.begin(), g.qvars.end(), v) == g.qvars.end()) produced.insert(v);
        return out;
      }
    }
    return std::nullopt;
  }

  std::optional<Goal> try_conj(const Goal &g, const VarSet &bound, VarSet &produced) {
    std::vector<const Goal *> pending;
    for (const auto &s : g.sub) pending.push_back(&s);
    VarSet b = bound;
    Goal out = g;
    out.sub.clear();
    while (!pending.empty()) {
      bool progressed = false;
      for (size_t i = 0; i < pending.size(); ++i) {
        VarSet pr;
        auto r = try_goal(*pending[i], b, pr);
        if (!r) continue;
        b.insert(pr.begin(), pr.end());
        produced.insert(pr.begin(), pr.end());
        out.sub.push_back(std::move(*r));
        pending.erase(pending.begin() + static_cast<long>(i));
        progressed = true;
        break;
      }
      if (!progressed) {
        VarSet pr;
        try_goal(*pending[0], b, pr);  // refresh the diagnostic for the first stuck goal
        return std::nullopt;
      }
    }
    return out;
  }

  std::optional<Goal> try_unify(const Goal &g, const VarSet &bound, VarSet &produced) {
    Goal u = g;
    bool lb = bound.count(g.lhs) > 0;
    if (g.functor.empty()) {
      bool rb = bound.count(g.rhs) > 0;
      if (g.ukind == UnifyKind::Assign) {
        if (lb) two_producers(g, g.lhs);
        if (!rb) return not_ready(g, "variable " + name(g.rhs) + " is used before it is produced"), std::nullopt;
        produced.insert(g.lhs);
        return u;
      }
      if (g.ukind == UnifyKind::Test) {
        if (!lb || !rb)
          return not_ready(g, "variable " + name(lb ? g.rhs : g.lhs) + " is used before it is produced"),
                 std::nullopt;
        return u;
      }
      if (lb && rb) {
        u.ukind = UnifyKind::Test;
      } else if (rb) {
        u.ukind = UnifyKind::Assign;
        produced.insert(g.lhs);
      } else if (lb) {
        u.ukind = UnifyKind::Assign;
        std::swap(u.lhs, u.rhs);
        produced.insert(g.rhs);
      } else {
        return not_ready(g, "variables " + name(g.lhs) + " and " + name(g.rhs) + " are both free"), std::nullopt;
      }
      return u;
    }
    if (lb) {
      if (g.ukind == UnifyKind::Construct) two_producers(g, g.lhs);
      u.ukind = UnifyKind::Deconstruct;
      std::vector<Goal> tests;
      VarSet seen;
      for (auto &a : u.args) {
        if (bound.count(a) || seen.count(a)) {
          int f = fresh_like(a);
          tests.push_back(make_test(f, a, g.loc));
          a = f;
        }
        seen.insert(a);
        produced.insert(a);
      }
      if (tests.empty()) return u;
      std::vector<Goal> items;
      items.push_back(std::move(u));
      for (auto &t : tests) items.push_back(std::move(t));
      return Goal::conj(std::move(items), g.loc);
    }
    if (g.ukind == UnifyKind::Deconstruct)
      return not_ready(g, "variable " + name(g.lhs) + " is used before it is produced"), std::nullopt;
    for (int a : g.args)
      if (!bound.count(a))
        return not_ready(g, "cannot construct " + name(g.lhs) + ": variable " + name(a) + " is free"), std::nullopt;
    u.ukind = UnifyKind::Construct;
    std::vector<Goal> assigns;
    VarSet seen;
    for (auto &a : u.args) {
      if (seen.count(a)) {
        int f = fresh_like(a);
        assigns.push_back(make_assign(f, a, g.loc));
        a = f;
      }
      seen.insert(a);
    }
    produced.insert(g.lhs);
    if (assigns.empty()) return u;
    assigns.push_back(std::move(u));
    return Goal::conj(std::move(assigns), g.loc);
  }

  std::optional<Goal> try_call(const Goal &g, const VarSet &bound, VarSet &produced) {
    auto ids = prog_.procs_of(g.pred, static_cast<int>(g.args.size()));
    for (int id : ids) {
      const Procedure &q = prog_.procs[id];
      bool ok = true;
      for (size_t i = 0; i < g.args.size() && ok; ++i)
        if (q.modes[i] == Mode::In && !bound.count(g.args[i])) ok = false;
      if (!ok) continue;
      Goal c = g;
      c.callee = id;
      std::vector<Goal> tests;
      VarSet seen;
      for (size_t i = 0; i < c.args.size(); ++i) {
        if (q.modes[i] != Mode::Out) continue;
        int a = c.args[i];
        if (bound.count(a) || seen.count(a)) {
          int f = fresh_like(a);
          tests.push_back(make_test(f, a, g.loc));
          c.args[i] = f;
          a = f;
        }
        seen.insert(a);
        produced.insert(a);
      }
      if (tests.empty()) return c;
      std::vector<Goal> items;
      items.push_back(std::move(c));
      for (auto &t : tests) items.push_back(std::move(t));
      return Goal::conj(std::move(items), g.loc);
    }
    std::vector<int> ins;
    for (int a : g.args)
      if (!bound.count(a)) ins.push_back(a);
    return not_ready(g, "no mode of " + g.pred + "/" + std::to_string(g.args.size()) +
                            " matches: variable " + first_unbound(g.args, bound) + " is free"),
           std::nullopt;
  }

  std::optional<Goal> try_builtin(const Goal &g, const VarSet &bound, VarSet &produced) {
    std::vector<int> ins;
    for (const auto &e : g.exprs) e.collect_vars(ins);
    for (int a : g.args) ins.push_back(a);
    for (int v : ins)
      if (!bound.count(v))
        return not_ready(g, "variable " + name(v) + " is used before it is produced"), std::nullopt;
    Goal b = g;
    if (g.out >= 0) {
      if (bound.count(g.out)) {
        if (g.bop != BuiltinOp::Is) two_producers(g, g.out);
        b.bop = BuiltinOp::Eq;
        Expr lhs;
        lhs.kind = Expr::Kind::Var;
        lhs.var = g.out;
        b.exprs.insert(b.exprs.begin(), lhs);
        b.out = -1;
        return b;
      }
      produced.insert(g.out);
    }
    return b;
  }

  Program &prog_;
  Procedure &p_;
  std::string reason_ = "goal cannot be scheduled";
  SrcLoc reason_loc_;
};

// ---------------------------------------------------------------------------

void flatten_conj(Goal &g) {
  for (auto &s : g.sub) flatten_conj(s);
  if (g.kind != GoalKind::Conj) return;
  std::vector<Goal> items;
  for (auto &s : g.sub) {
    if (s.kind == GoalKind::Conj) {
      for (auto &x : s.sub) items.push_back(std::move(x));
    } else {
      items.push_back(std::move(s));
    }
  }
  g.sub = std::move(items);
  g.chain_root = -1;
}

// Counts reads only; a variable that is bound but never read has no uses.
void count_uses(const Program &prog, const Goal &g, std::vector<int> &uses) {
  if (g.is_atomic()) {
    for (int v : atom_inputs(prog, g)) ++uses[v];
    return;
  }
  for (const auto &s : g.sub) count_uses(prog, s, uses);
}

bool drop_dead_constructions(Goal &g, const std::vector<int> &uses) {
  bool changed = false;
  for (auto &s : g.sub) {
    if (s.is_construct() && uses[s.lhs] == 0 && g.kind != GoalKind::Conj) {
      // A branch made of one dead construction becomes `true`.
      Goal t;
      t.kind = GoalKind::Conj;
      t.loc = s.loc;
      s = std::move(t);
      changed = true;
      continue;
    }
    changed |= drop_dead_constructions(s, uses);
  }
  if (g.kind != GoalKind::Conj) return changed;
  auto it = std::remove_if(g.sub.begin(), g.sub.end(),
                           [&](const Goal &s) { return s.is_construct() && uses[s.lhs] == 0; });
  if (it != g.sub.end()) {
    g.sub.erase(it, g.sub.end());
    changed = true;
  }
  return changed;
}

void eliminate_unused_constructions(const Program &prog, Procedure &p) {
  for (;;) {
    std::vector<int> uses(p.vars.size(), 0);
    count_uses(prog, p.body, uses);
    for (int v : p.head_vars) uses[v] += 2;
    if (!drop_dead_constructions(p.body, uses)) return;
  }
}

// ---- determinism

class DetChecker {
public:
  DetChecker(const Program &prog, Procedure &p) : prog_(prog), p_(p) {}

  void run() {
    auto ins = p_.in_args();
    VarSet bound(ins.begin(), ins.end());
    VarSet produced;
    count_occurrences(p_.body, total_);
    for (int v : p_.head_vars) ++total_[v];
    DetInfo d = check(p_.body, bound, produced);
    DetInfo decl = DetInfo::of(p_.det);
    if (d.many && !decl.many)
      throw Error(Error::Kind::Determinism, p_.loc,
                  "determinism error: " + p_.display_name() + " is declared " + det_name(p_.det) +
                      " but may have more than one solution");
    if (d.can_fail && !decl.can_fail)
      throw Error(Error::Kind::Determinism, p_.loc,
                  "determinism error: " + p_.display_name() + " is declared " + det_name(p_.det) + " but may fail");
  }

private:
  static void count_occurrences(const Goal &g, std::map<int, int> &out) {
    auto add = [&](int v) {
      if (v >= 0) ++out[v];
    };
    add(g.lhs);
    add(g.rhs);
    add(g.out);
    for (int v : g.args) add(v);
    std::vector<int> ev;
    for (const auto &e : g.exprs) e.collect_vars(ev);
    for (int v : ev) add(v);
    for (const auto &s : g.sub) count_occurrences(s, out);
  }

  // Variables of g that also occur outside it.
  VarSet visible(const Goal &g, const VarSet &vars) {
    std::map<int, int> inner;
    count_occurrences(g, inner);
    VarSet out;
    for (int v : vars)
      if (total_[v] > inner[v]) out.insert(v);
    return out;
  }

  const Goal *first_atom(const Goal &g) {
    if (g.is_atomic()) return &g;
    if (g.kind == GoalKind::Conj && !g.sub.empty()) return first_atom(g.sub[0]);
    return nullptr;
  }

  bool detect_switch(Goal &g) {
    int var = -1;
    std::set<std::string> functors;
    for (const auto &s : g.sub) {
      const Goal *a = first_atom(s);
      if (!a || a->kind != GoalKind::Unify || a->ukind != UnifyKind::Deconstruct) return false;
      if (var >= 0 && a->lhs != var) return false;
      var = a->lhs;
      std::string key = a->functor + "/" + std::to_string(a->args.size());
      if (!functors.insert(key).second) return false;
    }
    if (var < 0) return false;
    g.is_switch = true;
    g.switch_var = var;
    const TypeDef *t = prog_.types.find(p_.vars[var].type);
    covers_ = t && !t->builtin && functors.size() == t->ctors.size();
    return true;
  }

  DetInfo atom_det(const Goal &g) {
    switch (g.kind) {
      case GoalKind::Unify:
        if (g.ukind == UnifyKind::Test) return DetInfo::of(Determinism::Semidet);
        if (g.ukind == UnifyKind::Deconstruct) {
          const TypeDef *t = prog_.types.find(p_.vars[g.lhs].type);
          bool single = t && !t->builtin && t->ctors.size() == 1;
          return DetInfo::of(single ? Determinism::Det : Determinism::Semidet);
        }
        return DetInfo::of(Determinism::Det);
      case GoalKind::Call: return DetInfo::of(prog_.procs[g.callee].det);
      case GoalKind::Builtin:
        switch (g.bop) {
          case BuiltinOp::Lt:
          case BuiltinOp::Gt:
          case BuiltinOp::Le:
          case BuiltinOp::Ge:
          case BuiltinOp::Eq:
          case BuiltinOp::Ne: return DetInfo::of(Determinism::Semidet);
          case BuiltinOp::Fail: return DetInfo::of(Determinism::Failure);
          default: return DetInfo::of(Determinism::Det);
        }
      default: return {};
    }
  }

  DetInfo check(Goal &g, const VarSet &bound, VarSet &produced) {
    DetInfo d;
    switch (g.kind) {
      case GoalKind::Unify:
      case GoalKind::Call:
      case GoalKind::Builtin:
        d = switch_heads_.count(&g) ? DetInfo::of(Determinism::Det) : atom_det(g);
        for (int v : atom_outputs(prog_, g)) produced.insert(v);
        break;
      case GoalKind::Conj: {
        VarSet b = bound;
        for (auto &s : g.sub) {
          VarSet pr;
          DetInfo sd = check(s, b, pr);
          b.insert(pr.begin(), pr.end());
          produced.insert(pr.begin(), pr.end());
          d.can_fail |= sd.can_fail;
          d.many |= sd.many;
          d.never_succeeds |= sd.never_succeeds;
        }
        break;
      }
      case GoalKind::Disj: {
        std::optional<VarSet> common;
        std::vector<DetInfo> ds;
        covers_ = false;
        bool sw = detect_switch(g);
        if (sw)
          for (const auto &s : g.sub) switch_heads_.insert(first_atom(s));
        bool covers = covers_;
        for (auto &s : g.sub) {
          VarSet pr;
          ds.push_back(check(s, bound, pr));
          common = common ? intersect(*common, pr) : pr;
        }
        VarSet outs;
        if (common)
          for (int v : *common)
            if (!bound.count(v)) outs.insert(v);
        outs = visible(g, outs);
        produced.insert(outs.begin(), outs.end());
        d.never_succeeds = true;
        int succeeding = 0;
        bool any_fail = false, all_fail = true, any_many = false;
        for (const auto &x : ds) {
          d.never_succeeds &= x.never_succeeds;
          if (!x.never_succeeds) ++succeeding;
          any_fail |= x.can_fail;
          all_fail &= x.can_fail;
          any_many |= x.many;
        }
        if (ds.empty()) {
          d = DetInfo::of(Determinism::Failure);
          break;
        }
        if (sw) {
          d.can_fail = any_fail || !covers;
          d.many = any_many;
        } else {
          d.can_fail = all_fail;
          d.many = outs.empty() ? false : (any_many || succeeding > 1);
        }
        break;
      }
      case GoalKind::Ite: {
        VarSet pc, pt, pe;
        DetInfo c = check(g.sub[0], bound, pc);
        VarSet b2 = bound;
        b2.insert(pc.begin(), pc.end());
        DetInfo t = check(g.sub[1], b2, pt);
        DetInfo e = check(g.sub[2], bound, pe);
        d.can_fail = t.can_fail || (c.can_fail && e.can_fail);
        d.many = (c.many && !t.never_succeeds) || t.many || e.many;
        d.never_succeeds = (c.never_succeeds || t.never_succeeds) && e.never_succeeds;
        if (!c.can_fail) d.never_succeeds = c.never_succeeds || t.never_succeeds;
        pt.insert(pc.begin(), pc.end());
        VarSet both = intersect(pt, pe);
        produced.insert(both.begin(), both.end());
        break;
      }
      case GoalKind::Some: {
        VarSet pi;
        DetInfo i = check(g.sub[0], bound, pi);
        VarSet outs;
        for (int v : pi)
          if (std::find(g.qvars.begin(), g.qvars.end(), v) == g.qvars.end()) outs.insert(v);
        outs = visible(g, outs);
        produced.insert(outs.begin(), outs.end());
        d = i;
        g.commit = i.many && outs.empty();
        if (g.commit) d.many = false;
        break;
      }
    }
    g.det = d;
    return d;
  }

  const Program &prog_;
  Procedure &p_;
  bool covers_ = false;
  std::set<const Goal *> switch_heads_;
  std::map<int, int> total_;
};

// ---- variable table compaction

void mark_used(const Goal &g, std::vector<char> &used) {
  auto mark = [&](int v) {
    if (v >= 0) used[v] = 1;
  };
  mark(g.lhs);
  mark(g.rhs);
  mark(g.out);
  for (int v : g.args) mark(v);
  for (int v : g.qvars) mark(v);
  std::vector<int> ev;
  for (const auto &e : g.exprs) e.collect_vars(ev);
  for (int v : ev) mark(v);
  for (const auto &s : g.sub) mark_used(s, used);
}

void renumber(Goal &g, const std::vector<int> &m) {
  auto fix = [&](int &v) {
    if (v >= 0) v = m[v];
  };
  fix(g.lhs);
  fix(g.rhs);
  fix(g.out);
  fix(g.switch_var);
  for (int &v : g.args) fix(v);
  for (int &v : g.qvars) fix(v);
  std::function<void(Expr &)> fe = [&](Expr &e) {
    if (e.kind == Expr::Kind::Var) fix(e.var);
    for (auto &a : e.args) fe(a);
  };
  for (auto &e : g.exprs) fe(e);
  for (auto &s : g.sub) renumber(s, m);
}

void compact_vars(Procedure &p) {
  std::vector<char> used(p.vars.size(), 0);
  for (int v : p.head_vars) used[v] = 1;
  mark_used(p.body, used);
  std::vector<int> m(p.vars.size(), -1);
  std::vector<VarInfo> vars;
  for (size_t i = 0; i < p.vars.size(); ++i) {
    if (!used[i]) continue;
    m[i] = static_cast<int>(vars.size());
    vars.push_back(p.vars[i]);
  }
  p.vars = std::move(vars);
  for (int &v : p.head_vars) v = m[v];
  renumber(p.body, m);
}

}  // namespace

void mode_order_and_annotate(Program &prog) {
  for (auto &p : prog.procs) {
    ModeChecker mc(prog, p);
    mc.run();
    flatten_conj(p.body);
  }
  for (auto &p : prog.procs) {
    eliminate_unused_constructions(prog, p);
    compact_vars(p);
    DetChecker dc(prog, p);
    dc.run();
    int k = 0;
    for (Goal *a : collect_atoms_mut(p.body)) a->point = ++k;
    p.num_points = k;
  }
}

}  // namespace rbmm
