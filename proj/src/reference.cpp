#include <functional>
#include <memory>

#include "rbmm/common.hpp"
#include "rbmm/vm.hpp"

namespace rbmm {
namespace {

struct Cell;

struct RValue {
  int64_t i = 0;
  const Constructor *ctor = nullptr;  // null for integers and io
  std::shared_ptr<Cell> cell;
};

struct Cell {
  std::vector<RValue> args;
};

using Cont = std::function<bool()>;

bool is_many(const Goal &g) { return g.det.many || (g.kind == GoalKind::Ite && g.sub[0].det.many); }

class Reference {
public:
  Reference(const Program &prog, uint64_t step_limit) : prog_(prog), limit_(step_limit) {}

  ReferenceResult run(int entry, const std::vector<ArgTerm> &args, bool all) {
    const Procedure &proc = prog_.procs[static_cast<size_t>(entry)];
    size_t nin = 0;
    for (size_t i = 0; i < proc.head_vars.size(); ++i)
      if (proc.modes[i] == Mode::In && proc.vars[static_cast<size_t>(proc.head_vars[i])].type != kIoType) ++nin;
    if (args.size() != nin) throw RuntimeError(proc.display_name() + ": wrong number of input arguments");
    std::vector<RValue> env(proc.vars.size());
    size_t k = 0;
    for (size_t i = 0; i < proc.head_vars.size(); ++i)
      if (proc.modes[i] == Mode::In) {
        int v = proc.head_vars[i];
        if (proc.vars[static_cast<size_t>(v)].type == kIoType) continue;
        env[static_cast<size_t>(v)] = build(args[k++], proc.vars[static_cast<size_t>(v)].type);
      }
    ReferenceResult res;
    solve(proc.body, proc, env, [&]() {
      ++res.solutions;
      std::string line;
      bool any = false;
      for (size_t i = 0; i < proc.head_vars.size(); ++i) {
        int v = proc.head_vars[i];
        if (proc.modes[i] != Mode::Out || proc.vars[static_cast<size_t>(v)].type == kIoType) continue;
        if (any) line += ", ";
        write(line, env[static_cast<size_t>(v)]);
        any = true;
      }
      if (any) out_ += line + "\n";
      return !all;
    });
    res.output = std::move(out_);
    res.words_total = words_;
    return res;
  }

private:
  using Env = std::vector<RValue>;

  RValue build(const ArgTerm &t, const std::string &type) {
    if (type == kIntType) {
      if (!t.is_int) throw RuntimeError("expected an integer argument");
      return {t.value, nullptr, nullptr};
    }
    const TypeDef *td = prog_.types.find(type);
    const Constructor *c = td && !t.is_int ? td->find_ctor(t.functor, static_cast<int>(t.args.size())) : nullptr;
    if (!c) throw RuntimeError("argument does not match type " + type);
    RValue v{0, c, nullptr};
    if (!c->args.empty()) {
      v.cell = std::make_shared<Cell>();
      for (size_t i = 0; i < t.args.size(); ++i) v.cell->args.push_back(build(t.args[i], c->args[i]));
    }
    return v;
  }

  static bool same_ctor(const Constructor *c, const std::string &name, size_t arity) {
    return c && c->name == name && c->args.size() == arity;
  }

  void write(std::string &out, const RValue &v) {
    if (!v.ctor) {
      out += std::to_string(v.i);
      return;
    }
    if (!v.cell) {
      out += v.ctor->name;
      return;
    }
    if (same_ctor(v.ctor, kConsName, 2)) {
      out += "[";
      const RValue *cur = &v;
      for (bool first = true;; first = false) {
        if (!first) out += ", ";
        write(out, cur->cell->args[0]);
        const RValue &tail = cur->cell->args[1];
        if (same_ctor(tail.ctor, kConsName, 2)) {
          cur = &tail;
          continue;
        }
        if (!same_ctor(tail.ctor, kNilName, 0)) {
          out += " | ";
          write(out, tail);
        }
        break;
      }
      out += "]";
      return;
    }
    out += v.ctor->name + "(";
    for (size_t i = 0; i < v.cell->args.size(); ++i) {
      if (i) out += ", ";
      write(out, v.cell->args[i]);
    }
    out += ")";
  }

  static bool equal(const RValue &a, const RValue &b) {
    if (a.ctor != b.ctor) return false;
    if (!a.ctor) return a.i == b.i;
    if (!a.cell) return true;
    for (size_t i = 0; i < a.cell->args.size(); ++i)
      if (!equal(a.cell->args[i], b.cell->args[i])) return false;
    return true;
  }

  int64_t eval(const Env &env, const Expr &x) {
    switch (x.kind) {
      case Expr::Kind::Var: return env[static_cast<size_t>(x.var)].i;
      case Expr::Kind::Int: return x.value;
      case Expr::Kind::Neg: return -eval(env, x.args[0]);
      default: break;
    }
    int64_t a = eval(env, x.args[0]), b = eval(env, x.args[1]);
    switch (x.kind) {
      case Expr::Kind::Add: return a + b;
      case Expr::Kind::Sub: return a - b;
      case Expr::Kind::Mul: return a * b;
      case Expr::Kind::Div:
        if (b == 0) throw RuntimeError("division by zero");
        return a / b;
      case Expr::Kind::Mod: {
        if (b == 0) throw RuntimeError("division by zero");
        int64_t m = a % b;
        return (m != 0 && ((m < 0) != (b < 0))) ? m + b : m;
      }
      default: return 0;
    }
  }

  const Constructor *ctor_of(const Procedure &p, const Goal &g) {
    const TypeDef &td = prog_.types.get(p.vars[static_cast<size_t>(g.lhs)].type);
    const Constructor *c = td.find_ctor(g.functor, static_cast<int>(g.args.size()));
    if (!c) throw RuntimeError("unknown constructor " + g.functor);
    return c;
  }

  bool unify(const Procedure &p, Env &env, const Goal &g) {
    auto var = [&](int v) -> RValue & { return env[static_cast<size_t>(v)]; };
    switch (g.ukind) {
      case UnifyKind::Assign: var(g.lhs) = var(g.rhs); return true;
      case UnifyKind::Test: return equal(var(g.lhs), var(g.rhs));
      case UnifyKind::Construct: {
        if (p.vars[static_cast<size_t>(g.lhs)].type == kIntType) {
          var(g.lhs) = {std::stoll(g.functor), nullptr, nullptr};
          return true;
        }
        RValue v{0, ctor_of(p, g), nullptr};
        if (!g.args.empty()) {
          v.cell = std::make_shared<Cell>();
          for (int a : g.args) v.cell->args.push_back(var(a));
          words_ += g.args.size();
        }
        var(g.lhs) = std::move(v);
        return true;
      }
      case UnifyKind::Deconstruct: {
        const RValue &v = var(g.lhs);
        if (p.vars[static_cast<size_t>(g.lhs)].type == kIntType) return !v.ctor && v.i == std::stoll(g.functor);
        if (v.ctor != ctor_of(p, g)) return false;
        if (v.cell) {
          auto cell = v.cell;
          for (size_t i = 0; i < g.args.size(); ++i) var(g.args[i]) = cell->args[i];
        }
        return true;
      }
      default: return false;
    }
  }

  bool builtin(Env &env, const Goal &g) {
    auto var = [&](int v) -> RValue & { return env[static_cast<size_t>(v)]; };
    switch (g.bop) {
      case BuiltinOp::Is: var(g.out) = {eval(env, g.exprs[0]), nullptr, nullptr}; return true;
      case BuiltinOp::Lt: return eval(env, g.exprs[0]) < eval(env, g.exprs[1]);
      case BuiltinOp::Gt: return eval(env, g.exprs[0]) > eval(env, g.exprs[1]);
      case BuiltinOp::Le: return eval(env, g.exprs[0]) <= eval(env, g.exprs[1]);
      case BuiltinOp::Ge: return eval(env, g.exprs[0]) >= eval(env, g.exprs[1]);
      case BuiltinOp::Eq: return eval(env, g.exprs[0]) == eval(env, g.exprs[1]);
      case BuiltinOp::Ne: return eval(env, g.exprs[0]) != eval(env, g.exprs[1]);
      case BuiltinOp::Print:
        write(out_, var(g.args[0]));
        out_ += "\n";
        return true;
      case BuiltinOp::Write:
        write(out_, var(g.args[0]));
        var(g.out) = {};
        return true;
      case BuiltinOp::Nl:
        out_ += "\n";
        var(g.out) = {};
        return true;
      case BuiltinOp::True: return true;
      case BuiltinOp::Fail: return false;
    }
    return false;
  }

  void tick() {
    if (limit_ && ++steps_ > limit_) throw StepLimitExceeded("step limit exceeded");
  }

  // Callee environment; outputs are copied back by the caller.
  Env enter(const Procedure &q, const Env &env, const Goal &g) {
    Env c(q.vars.size());
    for (size_t k = 0; k < g.args.size(); ++k)
      if (q.modes[k] == Mode::In) c[static_cast<size_t>(q.head_vars[k])] = env[static_cast<size_t>(g.args[k])];
    return c;
  }

  static void leave(const Procedure &q, Env &env, const Env &c, const Goal &g) {
    for (size_t k = 0; k < g.args.size(); ++k)
      if (q.modes[k] == Mode::Out) env[static_cast<size_t>(g.args[k])] = c[static_cast<size_t>(q.head_vars[k])];
  }

  bool first(const Goal &g, const Procedure &p, Env &env) {
    bool found = false;
    solve_nd(g, p, env, [&]() {
      found = true;
      return true;
    });
    return found;
  }

  bool exec(const Goal &g, const Procedure &p, Env &env) {
    if (is_many(g)) return first(g, p, env);
    switch (g.kind) {
      case GoalKind::Unify: tick(); return unify(p, env, g);
      case GoalKind::Builtin: tick(); return builtin(env, g);
      case GoalKind::Call: {
        tick();
        const Procedure &q = prog_.procs[static_cast<size_t>(g.callee)];
        Env c = enter(q, env, g);
        bool ok = exec(q.body, q, c);
        if (ok) leave(q, env, c, g);
        return ok;
      }
      case GoalKind::Conj:
        for (const auto &s : g.sub)
          if (!exec(s, p, env)) return false;
        return true;
      case GoalKind::Disj:
        for (const auto &s : g.sub)
          if (exec(s, p, env)) return true;
        return false;
      case GoalKind::Ite:
        if (exec(g.sub[0], p, env)) return exec(g.sub[1], p, env);
        return exec(g.sub[2], p, env);
      case GoalKind::Some:
        if (g.commit) {
          bool found = false;
          solve(g.sub[0], p, env, [&]() {
            found = true;
            return true;
          });
          return found;
        }
        return exec(g.sub[0], p, env);
    }
    return false;
  }

  bool solve(const Goal &g, const Procedure &p, Env &env, const Cont &k) {
    if (!is_many(g)) return exec(g, p, env) && k();
    return solve_nd(g, p, env, k);
  }

  bool solve_conj(const Goal &g, size_t i, const Procedure &p, Env &env, const Cont &k) {
    while (i < g.sub.size() && !is_many(g.sub[i])) {
      if (!exec(g.sub[i], p, env)) return false;
      ++i;
    }
    if (i == g.sub.size()) return k();
    return solve_nd(g.sub[i], p, env, [&, i]() { return solve_conj(g, i + 1, p, env, k); });
  }

  bool solve_nd(const Goal &g, const Procedure &p, Env &env, const Cont &k) {
    switch (g.kind) {
      case GoalKind::Call: {
        tick();
        const Procedure &q = prog_.procs[static_cast<size_t>(g.callee)];
        Env c = enter(q, env, g);
        return solve(q.body, q, c, [&]() {
          leave(q, env, c, g);
          return k();
        });
      }
      case GoalKind::Conj: return solve_conj(g, 0, p, env, k);
      case GoalKind::Disj:
        for (const auto &s : g.sub)
          if (solve(s, p, env, k)) return true;
        return false;
      case GoalKind::Ite: {
        bool succeeded = false;
        bool stop = solve(g.sub[0], p, env, [&]() {
          succeeded = true;
          return solve(g.sub[1], p, env, k);
        });
        if (stop) return true;
        if (succeeded) return false;
        return solve(g.sub[2], p, env, k);
      }
      case GoalKind::Some:
        if (g.commit) return exec(g, p, env) && k();
        return solve(g.sub[0], p, env, k);
      default: return exec(g, p, env) && k();
    }
  }

  const Program &prog_;
  uint64_t limit_;
  uint64_t steps_ = 0;
  uint64_t words_ = 0;
  std::string out_;
};

}  // namespace

ReferenceResult run_reference(const Program &prog, int entry, const std::vector<ArgTerm> &args, bool all_solutions,
                              uint64_t step_limit) {
  ReferenceResult res;
  with_big_stack([&]() { res = Reference(prog, step_limit).run(entry, args, all_solutions); });
  return res;
}

}  // namespace rbmm
