#include "rbmm/vm.hpp"

#include <pthread.h>

#include <algorithm>
#include <cctype>
#include <exception>
#include <map>
#include <set>
#include <unordered_map>

#include "rbmm/common.hpp"

namespace rbmm {

// ---------------------------------------------------------------------------
// Shared helpers

void with_big_stack(const std::function<void()> &fn) {
  struct Job {
    const std::function<void()> *fn;
    std::exception_ptr err;
  } job{&fn, nullptr};
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, size_t(1) << 30);
  pthread_t th;
  auto body = [](void *p) -> void * {
    auto *j = static_cast<Job *>(p);
    try {
      (*j->fn)();
    } catch (...) {
      j->err = std::current_exception();
    }
    return nullptr;
  };
  if (pthread_create(&th, &attr, body, &job) != 0) {
    pthread_attr_destroy(&attr);
    fn();
    return;
  }
  pthread_join(th, nullptr);
  pthread_attr_destroy(&attr);
  if (job.err) std::rethrow_exception(job.err);
}

namespace {

class ArgParser {
public:
  explicit ArgParser(const std::string &s) : s_(s) {}

  std::vector<ArgTerm> all() {
    std::vector<ArgTerm> out;
    skip();
    while (i_ < s_.size()) {
      out.push_back(term());
      skip();
      if (i_ < s_.size() && s_[i_] == ',') {
        ++i_;
        skip();
      }
    }
    return out;
  }

private:
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool eat(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail() { throw RuntimeError("malformed argument term: " + s_); }

  ArgTerm term() {
    skip();
    if (i_ >= s_.size()) fail();
    char c = s_[i_];
    if (c == '[') {
      ++i_;
      std::vector<ArgTerm> items;
      ArgTerm tail;
      tail.functor = kNilName;
      if (!eat(']')) {
        do items.push_back(term());
        while (eat(','));
        if (eat('|')) tail = term();
        if (!eat(']')) fail();
      }
      for (size_t k = items.size(); k-- > 0;) {
        ArgTerm cell;
        cell.functor = kConsName;
        cell.args = {items[k], tail};
        tail = std::move(cell);
      }
      return tail;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-') {
      size_t j = i_ + (c == '-' ? 1 : 0);
      if (j >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[j]))) fail();
      while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
      ArgTerm t;
      t.is_int = true;
      t.value = std::stoll(s_.substr(i_, j - i_));
      i_ = j;
      return t;
    }
    if (!std::islower(static_cast<unsigned char>(c))) fail();
    size_t j = i_;
    while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
    ArgTerm t;
    t.functor = s_.substr(i_, j - i_);
    i_ = j;
    if (i_ < s_.size() && s_[i_] == '(') {
      ++i_;
      do t.args.push_back(term());
      while (eat(','));
      if (!eat(')')) fail();
    }
    return t;
  }

  const std::string &s_;
  size_t i_ = 0;
};

int64_t floor_mod(int64_t a, int64_t b) {
  int64_t m = a % b;
  return (m != 0 && ((m < 0) != (b < 0))) ? m + b : m;
}

bool parse_int(const std::string &s, int64_t &out) {
  if (s.empty()) return false;
  size_t i = s[0] == '-' ? 1 : 0;
  if (i == s.size()) return false;
  for (size_t j = i; j < s.size(); ++j)
    if (!std::isdigit(static_cast<unsigned char>(s[j]))) return false;
  out = std::stoll(s);
  return true;
}

}  // namespace

std::vector<ArgTerm> parse_arg_terms(const std::string &text) { return ArgParser(text).all(); }

int find_entry(const Program &prog, const std::string &name) { return prog.find_proc(name); }

// ---------------------------------------------------------------------------
// Region-annotated interpreter

namespace {

using Cont = std::function<bool()>;  // returns true to stop the search

struct FunctorTable {
  std::map<std::pair<std::string, int>, int> ids;
  std::vector<std::pair<std::string, int>> names;

  int id(const std::string &n, int a) {
    auto [it, fresh] = ids.emplace(std::make_pair(n, a), static_cast<int>(names.size()));
    if (fresh) names.emplace_back(n, a);
    return it->second;
  }
};

struct AtomInfo {
  int fid = -1;
  int arity = 0;
  bool int_lit = false;
  int64_t ival = 0;
  int cslot = -1;
  bool cvirt = true;
  const std::vector<int> *actuals = nullptr;
};

struct CompoundInfo {
  std::vector<int> created, removed, allocated, live_entry, else_removed;
  bool support = false;
  // Switch dispatch: (is_int, key) of each branch's first deconstruction.
  std::vector<std::pair<bool, int64_t>> keys;
};

struct Env {
  int proc;
  size_t vb, rb;
};

class Machine {
public:
  Machine(const Program &prog, const AnnotatedProgram &ann, const VmOptions &opts)
      : prog_(prog), ann_(ann), opts_(opts), rm_(opts.runtime) {
    for (const auto &t : prog.types.all())
      for (const auto &c : t.ctors) ft_.id(c.name, static_cast<int>(c.args.size()));
    atoms_.resize(prog.procs.size());
    for (size_t p = 0; p < prog.procs.size(); ++p) prepare(static_cast<int>(p));
  }

  RunResult run(int entry, const std::vector<ArgTerm> &args) {
    const Procedure &proc = prog_.procs[static_cast<size_t>(entry)];
    const AnnotatedProc &ap = ann_.procs[static_cast<size_t>(entry)];
    size_t nin = 0;
    for (size_t i = 0; i < proc.head_vars.size(); ++i)
      if (proc.modes[i] == Mode::In && proc.vars[static_cast<size_t>(proc.head_vars[i])].type != kIoType) ++nin;
    if (args.size() != nin)
      throw RuntimeError(proc.display_name() + " expects " + std::to_string(nin) + " input arguments, got " +
                         std::to_string(args.size()));
    uint64_t start_seq = rm_.next_seq();
    Env e = push_env(entry);

    // Regions reachable from the head arguments, except those the entry
    // creates itself, are supplied by the driver.
    std::vector<int> reach;
    std::vector<char> seen(ap.names.size(), 0);
    for (int v : proc.head_vars) {
      int s = ap.var_slot[static_cast<size_t>(v)];
      if (s >= 0) collect_slots(ap, s, seen, reach);
    }
    for (int s : reach)
      if (!ap.virt[static_cast<size_t>(s)] && !ap.born.count(s)) rs_[e.rb + static_cast<size_t>(s)] = rm_.create();
    size_t k = 0;
    for (size_t i = 0; i < proc.head_vars.size(); ++i) {
      if (proc.modes[i] != Mode::In) continue;
      int v = proc.head_vars[i];
      if (proc.vars[static_cast<size_t>(v)].type == kIoType) continue;
      vals_[e.vb + static_cast<size_t>(v)] =
          build(args[k++], proc.vars[static_cast<size_t>(v)].type, ap.var_slot[static_cast<size_t>(v)], e);
    }

    RunResult res;
    bool all = opts_.all_solutions;
    bool stopped = solve(proc.body, e, [&]() {
      ++res.solutions;
      std::string line;
      bool any = false;
      for (size_t i = 0; i < proc.head_vars.size(); ++i) {
        int v = proc.head_vars[i];
        if (proc.modes[i] != Mode::Out || proc.vars[static_cast<size_t>(v)].type == kIoType) continue;
        if (any) line += ", ";
        write_value(line, vals_[e.vb + static_cast<size_t>(v)]);
        any = true;
      }
      if (any) out_ += line + "\n";
      return !all;
    });
    if (stopped) {
      rm_.cut_to(0, 0);
      while (!rm_.commit.empty()) rm_.pop_commit();
    }
    for (int s : reach) {
      int h = rs_[e.rb + static_cast<size_t>(s)];
      if (h >= 0 && rm_.live(h) && !ap.virt[static_cast<size_t>(s)]) rm_.reclaim(h, ReclaimCause::Remove);
    }
    if (all) rm_.reclaim_new(start_seq);
    pop_env(e);

    res.output = std::move(out_);
    res.stats = rm_.stats;
    res.stats.solutions = res.solutions;
    res.stats.steps = steps_;
    res.live_words_at_exit = rm_.stats.words_live;
    res.live_regions_at_exit = rm_.stats.regions_live;
    return res;
  }

private:
  // ---- preparation

  void prepare(int p) {
    const Procedure &proc = prog_.procs[static_cast<size_t>(p)];
    const AnnotatedProc &ap = ann_.procs[static_cast<size_t>(p)];
    auto atoms = collect_atoms(proc.body);
    auto &infos = atoms_[static_cast<size_t>(p)];
    infos.resize(atoms.size());
    for (const Goal *a : atoms) {
      AtomInfo &ai = infos[static_cast<size_t>(a->point - 1)];
      if (a->kind == GoalKind::Unify && !a->functor.empty()) {
        ai.arity = static_cast<int>(a->args.size());
        const std::string &type = proc.vars[static_cast<size_t>(a->lhs)].type;
        if (type == kIntType) {
          if (!parse_int(a->functor, ai.ival)) throw RuntimeError("bad integer literal " + a->functor);
          ai.int_lit = true;
        } else {
          ai.fid = ft_.id(a->functor, ai.arity);
        }
        auto it = ap.construct_slot.find(a->point);
        if (it != ap.construct_slot.end()) {
          ai.cslot = it->second;
          ai.cvirt = ap.virt[static_cast<size_t>(ai.cslot)] != 0;
        } else if (a->ukind == UnifyKind::Construct) {
          ai.cslot = ap.var_slot[static_cast<size_t>(a->lhs)];
          ai.cvirt = ai.cslot < 0 || ap.virt[static_cast<size_t>(ai.cslot)];
        }
      }
      if (a->kind == GoalKind::Call) {
        const AnnotatedProc &qa = ann_.procs[static_cast<size_t>(a->callee)];
        auto it = ap.actuals.find(a->point);
        ai.actuals = it == ap.actuals.end() ? &kNone : &it->second;
        if (ai.actuals->size() != qa.formals.size())
          throw SafetyViolation(proc.display_name() + ":" + std::to_string(a->point) + ": call to " + a->pred +
                                " passes " + std::to_string(ai.actuals->size()) + " regions, expected " +
                                std::to_string(qa.formals.size()));
      }
    }
    prepare_goal(p, proc.body);
  }

  void prepare_goal(int p, const Goal &g) {
    if (g.is_atomic()) return;
    for (const auto &s : g.sub) prepare_goal(p, s);
    const AnnotatedProc &ap = ann_.procs[static_cast<size_t>(p)];
    CompoundInfo ci;
    const Goal &scope = g.kind == GoalKind::Ite ? g.sub[0] : g.kind == GoalKind::Some ? g.sub[0] : g;
    std::set<int> created, removed, allocated, live;
    for (const Goal *a : collect_atoms(scope)) {
      auto i = static_cast<size_t>(a->point - 1);
      created.insert(ap.creates_before[i].begin(), ap.creates_before[i].end());
      removed.insert(ap.removes_before[i].begin(), ap.removes_before[i].end());
      removed.insert(ap.removes_after[i].begin(), ap.removes_after[i].end());
      const AtomInfo &ai = atoms_[static_cast<size_t>(p)][i];
      if (a->kind == GoalKind::Unify && a->ukind == UnifyKind::Construct && ai.cslot >= 0) allocated.insert(ai.cslot);
      if (a->kind == GoalKind::Call) {
        const AnnotatedProc &qa = ann_.procs[static_cast<size_t>(a->callee)];
        for (size_t k = 0; k < qa.formals.size(); ++k) {
          int act = (*ai.actuals)[k];
          if (qa.born.count(qa.formals[k])) created.insert(act);
          if (qa.dead.count(qa.formals[k])) removed.insert(act);
          allocated.insert(act);
        }
      }
    }
    for (int s : created) removed.erase(s);
    std::vector<const Goal *> firsts;
    first_atoms(g, firsts);
    for (const Goal *a : firsts) {
      const auto &lb = ap.live_before[static_cast<size_t>(a->point - 1)];
      live.insert(lb.begin(), lb.end());
    }
    auto real = [&](const std::set<int> &s) {
      std::vector<int> out;
      for (int x : s)
        if (x >= 0 && static_cast<size_t>(x) < ap.virt.size() && !ap.virt[static_cast<size_t>(x)]) out.push_back(x);
      return out;
    };
    ci.created = real(created);
    ci.removed = real(removed);
    ci.allocated = real(allocated);
    ci.live_entry = real(live);
    ci.support = !ci.created.empty() || !ci.removed.empty() || !ci.allocated.empty();
    if (g.kind == GoalKind::Ite) {
      std::vector<const Goal *> ef;
      first_atoms(g.sub[2], ef);
      std::set<int> er;
      for (const Goal *a : ef) {
        const auto &rb = ap.removes_before[static_cast<size_t>(a->point - 1)];
        er.insert(rb.begin(), rb.end());
      }
      ci.else_removed = real(er);
    }
    if (g.kind == GoalKind::Disj && g.is_switch) {
      for (const auto &b : g.sub) {
        const Goal *a = &b;
        while (!a->is_atomic()) a = &a->sub[0];
        const AtomInfo &ai = atoms_[static_cast<size_t>(p)][static_cast<size_t>(a->point - 1)];
        ci.keys.emplace_back(ai.int_lit, ai.int_lit ? ai.ival : ai.fid);
      }
    }
    comp_[&g] = std::move(ci);
  }

  static void first_atoms(const Goal &g, std::vector<const Goal *> &out) {
    switch (g.kind) {
      case GoalKind::Unify:
      case GoalKind::Call:
      case GoalKind::Builtin: out.push_back(&g); return;
      case GoalKind::Conj:
        if (!g.sub.empty()) first_atoms(g.sub[0], out);
        return;
      case GoalKind::Disj:
        for (const auto &s : g.sub) first_atoms(s, out);
        return;
      case GoalKind::Ite:
        first_atoms(g.sub[0], out);
        first_atoms(g.sub[2], out);  // entry state of the else path
        return;
      case GoalKind::Some: first_atoms(g.sub[0], out); return;
    }
  }

  void collect_slots(const AnnotatedProc &ap, int s, std::vector<char> &seen, std::vector<int> &out) {
    if (seen[static_cast<size_t>(s)]) return;
    seen[static_cast<size_t>(s)] = 1;
    out.push_back(s);
    for (const auto &e : ap.edges[static_cast<size_t>(s)]) collect_slots(ap, e.second, seen, out);
  }

  Value build(const ArgTerm &t, const std::string &type, int slot, const Env &e) {
    if (type == kIntType) {
      if (!t.is_int) throw RuntimeError("expected an integer argument");
      return {t.value, -1, -1};
    }
    const TypeDef *td = prog_.types.find(type);
    const Constructor *ctor = nullptr;
    if (td && !t.is_int)
      for (const auto &c : td->ctors)
        if (c.name == t.functor && c.args.size() == t.args.size()) ctor = &c;
    if (!ctor) throw RuntimeError("argument does not match type " + type);
    int fid = ft_.id(ctor->name, static_cast<int>(ctor->args.size()));
    if (ctor->args.empty()) return {0, fid, -1};
    const AnnotatedProc &ap = ann_.procs[static_cast<size_t>(e.proc)];
    std::vector<Value> kids;
    for (size_t i = 0; i < t.args.size(); ++i) {
      int child = -1;
      for (const auto &[label, dst] : ap.edges[static_cast<size_t>(slot)])
        if (label.first == ctor->name && label.second == static_cast<int>(i + 1)) child = dst;
      kids.push_back(build(t.args[i], ctor->args[i], child, e));
    }
    int h = rs_[e.rb + static_cast<size_t>(slot)];
    int64_t addr = rm_.alloc(h, static_cast<int>(kids.size()));
    for (size_t i = 0; i < kids.size(); ++i) rm_.word(addr + static_cast<int64_t>(i)) = kids[i];
    return {addr, fid, h};
  }

  // ---- environments and trail

  Env push_env(int p) {
    Env e{p, vals_.size(), rs_.size()};
    vals_.resize(vals_.size() + prog_.procs[static_cast<size_t>(p)].vars.size());
    rs_.resize(rs_.size() + ann_.procs[static_cast<size_t>(p)].names.size(), -1);
    return e;
  }

  void pop_env(const Env &e) {
    vals_.resize(e.vb);
    rs_.resize(e.rb);
  }

  Value &val(const Env &e, int v) { return vals_[e.vb + static_cast<size_t>(v)]; }
  int &slot(const Env &e, int s) { return rs_[e.rb + static_cast<size_t>(s)]; }

  struct TrailEntry {
    bool flag;  // removed-flag of a region, else a region variable slot
    size_t index;
    int old;
  };

  void bind(const Env &e, int s, int h) {
    size_t idx = e.rb + static_cast<size_t>(s);
    if (rs_[idx] == h) return;
    if (choices_) trail_.push_back({false, idx, rs_[idx]});
    rs_[idx] = h;
  }

  void undo(size_t mark) {
    while (trail_.size() > mark) {
      TrailEntry t = trail_.back();
      trail_.pop_back();
      if (t.flag) {
        if (rm_.live(static_cast<int>(t.index))) rm_.set_removed(static_cast<int>(t.index), t.old != 0);
      } else if (t.index < rs_.size()) {
        rs_[t.index] = t.old;
      }
    }
  }

  size_t enter_choice() {
    ++choices_;
    return trail_.size();
  }

  void leave_choice() {
    if (--choices_ == 0) trail_.clear();
  }

  // ---- diagnostics

  [[noreturn]] void violation(const Env &e, int point, const std::string &msg, int s = -1) {
    std::string where = prog_.procs[static_cast<size_t>(e.proc)].display_name() + ":" + std::to_string(point);
    std::string reg = s >= 0 ? " " + ann_.procs[static_cast<size_t>(e.proc)].names[static_cast<size_t>(s)] : "";
    throw SafetyViolation(where + ": " + msg + reg);
  }

  void check_read(const Env &e, int point, const Value &v) {
    if (v.region >= 0 && !rm_.live(v.region)) violation(e, point, "read from a reclaimed region");
  }

  // ---- region instructions

  void do_removes(const Env &e, int point, const std::vector<int> &list) {
    const AnnotatedProc &ap = ann_.procs[static_cast<size_t>(e.proc)];
    for (int s : list) {
      if (ap.virt[static_cast<size_t>(s)]) continue;
      int h = slot(e, s);
      if (h < 0) {
        if (opts_.check_safety) violation(e, point, "remove of an unbound region variable", s);
        continue;
      }
      if (!rm_.live(h)) violation(e, point, "remove of a reclaimed region", s);
      bool was = rm_.marked_removed(h);
      if (rm_.remove(h) && !was && choices_) trail_.push_back({true, static_cast<size_t>(h), 0});
      bind(e, s, -1);
    }
  }

  void do_creates(const Env &e, int point, const std::vector<int> &list) {
    const AnnotatedProc &ap = ann_.procs[static_cast<size_t>(e.proc)];
    for (int s : list) {
      if (ap.virt[static_cast<size_t>(s)]) continue;
      if (slot(e, s) >= 0 && opts_.check_safety) violation(e, point, "create of a bound region variable", s);
      bind(e, s, rm_.create());
    }
  }

  void tick() {
    ++steps_;
    if (opts_.step_limit && steps_ > opts_.step_limit) throw StepLimitExceeded("step limit exceeded");
  }

  // ---- atoms

  int64_t eval(const Env &e, const Expr &x) {
    switch (x.kind) {
      case Expr::Kind::Var: return val(e, x.var).payload;
      case Expr::Kind::Int: return x.value;
      case Expr::Kind::Neg: return -eval(e, x.args[0]);
      default: break;
    }
    int64_t a = eval(e, x.args[0]), b = eval(e, x.args[1]);
    switch (x.kind) {
      case Expr::Kind::Add: return a + b;
      case Expr::Kind::Sub: return a - b;
      case Expr::Kind::Mul: return a * b;
      case Expr::Kind::Div:
        if (b == 0) throw RuntimeError("division by zero");
        return a / b;
      case Expr::Kind::Mod:
        if (b == 0) throw RuntimeError("division by zero");
        return floor_mod(a, b);
      default: return 0;
    }
  }

  bool equal(const Env &e, int point, const Value &a, const Value &b) {
    if (a.functor != b.functor) return false;
    if (a.functor < 0) return a.payload == b.payload;
    int arity = ft_.names[static_cast<size_t>(a.functor)].second;
    if (arity == 0) return true;
    check_read(e, point, a);
    check_read(e, point, b);
    for (int i = 0; i < arity; ++i)
      if (!equal(e, point, rm_.word(a.payload + i), rm_.word(b.payload + i))) return false;
    return true;
  }

  void write_value(std::string &out, const Value &v, const Env *e = nullptr, int point = 0) {
    if (v.functor < 0) {
      out += std::to_string(v.payload);
      return;
    }
    const auto &[name, arity] = ft_.names[static_cast<size_t>(v.functor)];
    if (arity == 0) {
      out += name;
      return;
    }
    auto read = [&](const Value &x) {
      if (x.region >= 0 && !rm_.live(x.region)) {
        if (e) violation(*e, point, "read from a reclaimed region");
        throw SafetyViolation("read from a reclaimed region");
      }
    };
    read(v);
    if (name == kConsName && arity == 2) {
      out += "[";
      Value cur = v;
      bool first = true;
      for (;;) {
        if (!first) out += ", ";
        first = false;
        write_value(out, rm_.word(cur.payload), e, point);
        Value tail = rm_.word(cur.payload + 1);
        if (tail.functor >= 0 && ft_.names[static_cast<size_t>(tail.functor)] == std::make_pair(std::string(kConsName), 2)) {
          read(tail);
          cur = tail;
          continue;
        }
        if (!(tail.functor >= 0 && ft_.names[static_cast<size_t>(tail.functor)].first == kNilName)) {
          out += " | ";
          write_value(out, tail, e, point);
        }
        break;
      }
      out += "]";
      return;
    }
    out += name + "(";
    for (int i = 0; i < arity; ++i) {
      if (i) out += ", ";
      write_value(out, rm_.word(v.payload + i), e, point);
    }
    out += ")";
  }

  bool unify(const Env &e, const Goal &g, const AtomInfo &ai) {
    switch (g.ukind) {
      case UnifyKind::Assign: val(e, g.lhs) = val(e, g.rhs); return true;
      case UnifyKind::Test: return equal(e, g.point, val(e, g.lhs), val(e, g.rhs));
      case UnifyKind::Construct: {
        if (ai.int_lit) {
          val(e, g.lhs) = {ai.ival, -1, -1};
          return true;
        }
        if (ai.arity == 0) {
          if (opts_.check_safety && !ai.cvirt) {
            int h = slot(e, ai.cslot);
            if (h < 0 || !rm_.live(h)) violation(e, g.point, "construction into an unbound region variable", ai.cslot);
          }
          val(e, g.lhs) = {0, ai.fid, -1};
          return true;
        }
        int h = ai.cslot >= 0 ? slot(e, ai.cslot) : -1;
        if (h < 0) violation(e, g.point, "construction into an unbound region variable", ai.cslot);
        if (!rm_.live(h)) violation(e, g.point, "construction into a reclaimed region", ai.cslot);
        int64_t addr = rm_.alloc(h, ai.arity);
        for (int i = 0; i < ai.arity; ++i) rm_.word(addr + i) = val(e, g.args[static_cast<size_t>(i)]);
        val(e, g.lhs) = {addr, ai.fid, h};
        return true;
      }
      case UnifyKind::Deconstruct: {
        const Value v = val(e, g.lhs);
        if (ai.int_lit) return v.payload == ai.ival;
        if (v.functor != ai.fid) return false;
        if (ai.arity == 0) return true;
        check_read(e, g.point, v);
        for (int i = 0; i < ai.arity; ++i) val(e, g.args[static_cast<size_t>(i)]) = rm_.word(v.payload + i);
        return true;
      }
      default: return false;
    }
  }

  bool builtin(const Env &e, const Goal &g) {
    switch (g.bop) {
      case BuiltinOp::Is: val(e, g.out) = {eval(e, g.exprs[0]), -1, -1}; return true;
      case BuiltinOp::Lt: return eval(e, g.exprs[0]) < eval(e, g.exprs[1]);
      case BuiltinOp::Gt: return eval(e, g.exprs[0]) > eval(e, g.exprs[1]);
      case BuiltinOp::Le: return eval(e, g.exprs[0]) <= eval(e, g.exprs[1]);
      case BuiltinOp::Ge: return eval(e, g.exprs[0]) >= eval(e, g.exprs[1]);
      case BuiltinOp::Eq: return eval(e, g.exprs[0]) == eval(e, g.exprs[1]);
      case BuiltinOp::Ne: return eval(e, g.exprs[0]) != eval(e, g.exprs[1]);
      case BuiltinOp::Print:
        write_value(out_, val(e, g.args[0]), &e, g.point);
        out_ += "\n";
        return true;
      case BuiltinOp::Write:
        write_value(out_, val(e, g.args[0]), &e, g.point);
        val(e, g.out) = {};
        return true;
      case BuiltinOp::Nl:
        out_ += "\n";
        val(e, g.out) = {};
        return true;
      case BuiltinOp::True: return true;
      case BuiltinOp::Fail: return false;
    }
    return false;
  }

  const AtomInfo &info(const Env &e, const Goal &g) const {
    return atoms_[static_cast<size_t>(e.proc)][static_cast<size_t>(g.point - 1)];
  }
  const AnnotatedProc &annot(const Env &e) const { return ann_.procs[static_cast<size_t>(e.proc)]; }

  void pass_in(const Env &e, const Env &c, const Goal &g, const AtomInfo &ai) {
    const Procedure &q = prog_.procs[static_cast<size_t>(g.callee)];
    for (size_t k = 0; k < g.args.size(); ++k)
      if (q.modes[k] == Mode::In) vals_[c.vb + static_cast<size_t>(q.head_vars[k])] = val(e, g.args[k]);
    const AnnotatedProc &qa = ann_.procs[static_cast<size_t>(g.callee)];
    for (size_t k = 0; k < qa.formals.size(); ++k)
      rs_[c.rb + static_cast<size_t>(qa.formals[k])] = slot(e, (*ai.actuals)[k]);
  }

  void pass_out(const Env &e, const Env &c, const Goal &g, const AtomInfo &ai) {
    const Procedure &q = prog_.procs[static_cast<size_t>(g.callee)];
    for (size_t k = 0; k < g.args.size(); ++k)
      if (q.modes[k] == Mode::Out) val(e, g.args[k]) = vals_[c.vb + static_cast<size_t>(q.head_vars[k])];
    const AnnotatedProc &qa = ann_.procs[static_cast<size_t>(g.callee)];
    for (size_t k = 0; k < qa.formals.size(); ++k)
      bind(e, (*ai.actuals)[k], rs_[c.rb + static_cast<size_t>(qa.formals[k])]);
  }

  // Runs an atom that produces at most one solution.
  bool exec_atom(const Env &e, const Goal &g) {
    tick();
    const AnnotatedProc &ap = annot(e);
    auto i = static_cast<size_t>(g.point - 1);
    if (!ap.removes_before[i].empty()) do_removes(e, g.point, ap.removes_before[i]);
    if (!ap.creates_before[i].empty()) do_creates(e, g.point, ap.creates_before[i]);
    const AtomInfo &ai = info(e, g);
    bool ok;
    switch (g.kind) {
      case GoalKind::Unify: ok = unify(e, g, ai); break;
      case GoalKind::Builtin: ok = builtin(e, g); break;
      case GoalKind::Call: {
        Env c = push_env(g.callee);
        pass_in(e, c, g, ai);
        const Goal &body = prog_.procs[static_cast<size_t>(g.callee)].body;
        ok = body.det.many ? first_solution(body, c) : exec(body, c);
        if (ok) pass_out(e, c, g, ai);
        pop_env(c);
        break;
      }
      default: ok = false;
    }
    if (ok && !ap.removes_after[i].empty()) do_removes(e, g.point, ap.removes_after[i]);
    return ok;
  }

  // ---- support points

  std::vector<int> bound_live(const Env &e, const std::vector<int> &slots) {
    std::vector<int> out;
    for (int s : slots) {
      int h = slot(e, s);
      if (h >= 0 && rm_.live(h) && std::find(out.begin(), out.end(), h) == out.end()) out.push_back(h);
    }
    return out;
  }

  std::vector<int> intersect(const std::vector<int> &a, const std::vector<int> &b) {
    std::vector<int> out;
    for (int x : a)
      if (std::find(b.begin(), b.end(), x) != b.end()) out.push_back(x);
    return out;
  }

  void disj_enter(const Env &e, const CompoundInfo &ci, bool nondet) {
    DisjFrame f;
    f.saved_seq = rm_.next_seq();
    auto recs = nondet ? intersect(ci.live_entry, ci.allocated) : ci.allocated;
    for (int h : bound_live(e, recs)) f.recs.push_back(rm_.size_record(h));
    if (!nondet)
      for (int h : bound_live(e, ci.removed))
        if (!rm_.is_protected(h)) f.prot.push_back(h);
    rm_.push_disj(std::move(f));
  }

  void disj_resume(bool last) {
    const DisjFrame &f = rm_.disj.back();
    rm_.reclaim_new(f.saved_seq);
    for (const auto &r : f.recs) rm_.restore(r);
    if (last) rm_.pop_disj();
  }

  void disj_succeed_nonlast() {
    for (int h : rm_.disj.back().prot)
      if (rm_.live(h) && rm_.marked_removed(h)) rm_.reclaim(h, ReclaimCause::Protected);
    rm_.pop_disj();
  }

  void ite_enter(const Env &e, const CompoundInfo &ci) {
    IteFrame f;
    f.saved_seq = rm_.next_seq();
    for (int s : intersect(ci.live_entry, ci.allocated)) {
      int h = slot(e, s);
      if (h < 0 || !rm_.live(h)) continue;
      bool removed_at_else = std::find(ci.else_removed.begin(), ci.else_removed.end(), s) != ci.else_removed.end();
      if (!removed_at_else || rm_.is_protected(h)) f.recs.push_back(rm_.size_record(h));
    }
    for (int h : bound_live(e, ci.removed))
      if (!rm_.is_protected(h)) f.prot.push_back(h);
    int idx = static_cast<int>(rm_.ite.size());
    for (int h : f.prot) rm_.protect_ite(h, idx);
    rm_.push_ite(std::move(f));
  }

  void ite_then_semidet() {
    for (int h : rm_.ite.back().prot) {
      if (!rm_.live(h)) continue;
      if (rm_.marked_removed(h)) {
        rm_.unprotect_ite(h);
        if (!rm_.is_protected(h)) rm_.reclaim(h, ReclaimCause::Then);
      }
    }
    rm_.pop_ite();
  }

  void ite_then_nondet() {
    for (int &h : rm_.ite.back().prot) {
      if (h < 0 || !rm_.live(h) || rm_.disj_protected(h) || !rm_.marked_removed(h)) continue;
      int r = h;
      h = -1;
      rm_.unprotect_ite(r);
      rm_.reclaim(r, ReclaimCause::Then);
    }
  }

  void ite_else() {
    IteFrame &f = rm_.ite.back();
    for (int h : f.prot)
      if (h >= 0) rm_.unprotect_ite(h);
    rm_.reclaim_new(f.saved_seq);
    for (const auto &r : f.recs) rm_.restore(r);
    rm_.pop_ite();
  }

  void commit_enter(const Env &e, const CompoundInfo &ci) {
    CommitFrame f;
    f.saved_seq = rm_.next_seq();
    f.disj_top = rm_.disj.size();
    f.ite_top = rm_.ite.size();
    for (int h : bound_live(e, ci.removed))
      if (!rm_.is_protected(h)) f.entries.push_back({h, rm_.commit_slot(h)});
    int idx = static_cast<int>(rm_.commit.size());
    for (size_t k = 0; k < f.entries.size(); ++k) rm_.set_commit_slot(f.entries[k].region, {idx, static_cast<int>(k)});
    rm_.push_commit(std::move(f));
  }

  void commit_success() {
    CommitFrame &f = rm_.commit.back();
    for (size_t k = 0; k < f.entries.size(); ++k) {
      int h = f.entries[k].region;
      if (h < 0 || !rm_.live(h)) continue;
      if (rm_.marked_removed(h)) {
        rm_.reclaim(h, ReclaimCause::Commit);
      } else {
        rm_.set_commit_slot(h, f.entries[k].prev);
      }
    }
    uint64_t s = f.saved_seq;
    for (int h = rm_.newest(); h >= 0 && rm_.seq(h) >= s;) {
      int next = rm_.older(h);
      if (rm_.destroy_at_commit(h)) rm_.reclaim(h, ReclaimCause::Commit);
      h = next;
    }
    rm_.cut_to(rm_.commit.back().disj_top, rm_.commit.back().ite_top);
    rm_.pop_commit();
  }

  void commit_fail() {
    CommitFrame &f = rm_.commit.back();
    for (size_t k = f.entries.size(); k-- > 0;) {
      int h = f.entries[k].region;
      if (h >= 0 && rm_.live(h)) rm_.set_commit_slot(h, f.entries[k].prev);
    }
    rm_.pop_commit();
  }

  // ---- goals producing at most one solution

  bool first_solution(const Goal &g, const Env &e) {
    size_t dt = rm_.disj.size(), it = rm_.ite.size();
    bool found = false;
    solve_nd(g, e, [&]() {
      found = true;
      return true;
    });
    if (found) rm_.cut_to(dt, it);
    return found;
  }

  bool exec(const Goal &g, const Env &e) {
    if (g.det.many || (g.kind == GoalKind::Ite && g.sub[0].det.many)) return first_solution(g, e);
    switch (g.kind) {
      case GoalKind::Unify:
      case GoalKind::Builtin:
      case GoalKind::Call: return exec_atom(e, g);
      case GoalKind::Conj:
        for (const auto &s : g.sub)
          if (!exec(s, e)) return false;
        return true;
      case GoalKind::Disj: {
        if (g.is_switch) {
          int b = select(g, e);
          return b >= 0 && exec(g.sub[static_cast<size_t>(b)], e);
        }
        const CompoundInfo &ci = comp_.at(&g);
        size_t n = g.sub.size();
        bool sup = ci.support && n >= 2;
        size_t mark = enter_choice();
        if (sup) disj_enter(e, ci, false);
        for (size_t j = 0; j < n; ++j) {
          if (j > 0) {
            undo(mark);
            if (sup) disj_resume(j + 1 == n);
          }
          if (exec(g.sub[j], e)) {
            if (sup && j + 1 < n) disj_succeed_nonlast();
            leave_choice();
            return true;
          }
        }
        leave_choice();
        return false;
      }
      case GoalKind::Ite: {
        const CompoundInfo &ci = comp_.at(&g);
        size_t mark = enter_choice();
        if (ci.support) ite_enter(e, ci);
        if (exec(g.sub[0], e)) {
          leave_choice();
          if (ci.support) ite_then_semidet();
          return exec(g.sub[1], e);
        }
        undo(mark);
        leave_choice();
        if (ci.support) ite_else();
        return exec(g.sub[2], e);
      }
      case GoalKind::Some: {
        if (!g.commit) return exec(g.sub[0], e);
        const CompoundInfo &ci = comp_.at(&g);
        size_t dt = rm_.disj.size(), it = rm_.ite.size();
        if (ci.support) commit_enter(e, ci);
        bool found = false;
        solve(g.sub[0], e, [&]() {
          found = true;
          return true;
        });
        if (!found) {
          if (ci.support) commit_fail();
          return false;
        }
        if (ci.support)
          commit_success();
        else
          rm_.cut_to(dt, it);
        return true;
      }
    }
    return false;
  }

  int select(const Goal &g, const Env &e) {
    const CompoundInfo &ci = comp_.at(&g);
    const Value &v = val(e, g.switch_var);
    for (size_t b = 0; b < ci.keys.size(); ++b) {
      const auto &[is_int, key] = ci.keys[b];
      if (is_int ? (v.functor < 0 && v.payload == key) : (v.functor == key)) return static_cast<int>(b);
    }
    return -1;
  }

  // ---- goals with several solutions (continuation passing)

  bool solve(const Goal &g, const Env &e, const Cont &k) {
    if (!g.det.many && !(g.kind == GoalKind::Ite && g.sub[0].det.many)) return exec(g, e) && k();
    return solve_nd(g, e, k);
  }

  bool solve_conj(const Goal &g, size_t i, const Env &e, const Cont &k) {
    while (i < g.sub.size() && !g.sub[i].det.many && !(g.sub[i].kind == GoalKind::Ite && g.sub[i].sub[0].det.many)) {
      if (!exec(g.sub[i], e)) return false;
      ++i;
    }
    if (i == g.sub.size()) return k();
    return solve_nd(g.sub[i], e, [&, i]() { return solve_conj(g, i + 1, e, k); });
  }

  bool solve_nd(const Goal &g, const Env &e, const Cont &k) {
    switch (g.kind) {
      case GoalKind::Unify:
      case GoalKind::Builtin: return exec_atom(e, g) && k();
      case GoalKind::Call: {
        tick();
        const AnnotatedProc &ap = annot(e);
        auto i = static_cast<size_t>(g.point - 1);
        if (!ap.removes_before[i].empty()) do_removes(e, g.point, ap.removes_before[i]);
        if (!ap.creates_before[i].empty()) do_creates(e, g.point, ap.creates_before[i]);
        const AtomInfo &ai = info(e, g);
        Env c = push_env(g.callee);
        pass_in(e, c, g, ai);
        const Goal &body = prog_.procs[static_cast<size_t>(g.callee)].body;
        bool stop = solve(body, c, [&]() {
          pass_out(e, c, g, ai);
          if (!ap.removes_after[i].empty()) do_removes(e, g.point, ap.removes_after[i]);
          return k();
        });
        pop_env(c);
        return stop;
      }
      case GoalKind::Conj: return solve_conj(g, 0, e, k);
      case GoalKind::Disj: {
        if (g.is_switch) {
          int b = select(g, e);
          return b >= 0 && solve(g.sub[static_cast<size_t>(b)], e, k);
        }
        const CompoundInfo &ci = comp_.at(&g);
        size_t n = g.sub.size();
        size_t mark = enter_choice();
        if (n >= 2) disj_enter(e, ci, true);
        for (size_t j = 0; j < n; ++j) {
          if (j > 0) {
            undo(mark);
            disj_resume(j + 1 == n);
          }
          if (solve(g.sub[j], e, k)) {
            leave_choice();
            return true;
          }
        }
        leave_choice();
        return false;
      }
      case GoalKind::Ite: {
        const CompoundInfo &ci = comp_.at(&g);
        size_t mark = enter_choice();
        if (ci.support) ite_enter(e, ci);
        if (!g.sub[0].det.many) {
          if (exec(g.sub[0], e)) {
            leave_choice();
            if (ci.support) ite_then_semidet();
            return solve(g.sub[1], e, k);
          }
        } else {
          bool succeeded = false;
          bool stop = solve_nd(g.sub[0], e, [&]() {
            succeeded = true;
            if (ci.support) ite_then_nondet();
            return solve(g.sub[1], e, k);
          });
          if (stop) {
            leave_choice();
            return true;
          }
          if (succeeded) {
            if (ci.support) rm_.pop_ite();
            leave_choice();
            return false;
          }
        }
        undo(mark);
        leave_choice();
        if (ci.support) ite_else();
        return solve(g.sub[2], e, k);
      }
      case GoalKind::Some:
        if (g.commit) return exec(g, e) && k();
        return solve(g.sub[0], e, k);
    }
    return false;
  }

  static const std::vector<int> kNone;

  const Program &prog_;
  const AnnotatedProgram &ann_;
  VmOptions opts_;
  RegionManager rm_;
  FunctorTable ft_;
  std::vector<std::vector<AtomInfo>> atoms_;
  std::unordered_map<const Goal *, CompoundInfo> comp_;
  std::vector<Value> vals_;
  std::vector<int> rs_;
  std::vector<TrailEntry> trail_;
  size_t choices_ = 0;
  uint64_t steps_ = 0;
  std::string out_;
};

const std::vector<int> Machine::kNone;

}  // namespace

RunResult run_program(const Program &prog, const AnnotatedProgram &ann, int entry, const std::vector<ArgTerm> &args,
                      const VmOptions &opts) {
  RunResult res;
  with_big_stack([&]() {
    Machine m(prog, ann, opts);
    res = m.run(entry, args);
  });
  return res;
}

}  // namespace rbmm
