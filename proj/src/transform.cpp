#include "rbmm/transform.hpp"

#include <algorithm>

#include "rbmm/frontend.hpp"

namespace rbmm {

int AnnotatedProc::slot_named(const std::string &name) const {
  auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

std::vector<int> region_formals(const Analysis &a, int proc) {
  const auto &c = a.classes[static_cast<size_t>(proc)];
  auto slots = [&](const std::set<int> &nodes) {
    std::vector<int> out;
    for (int n : nodes) out.push_back(a.pt.slot(proc, n));
    std::sort(out.begin(), out.end());
    return out;
  };
  std::vector<int> out = slots(c.dead);
  for (int s : slots(c.born)) out.push_back(s);
  for (int s : slots(c.alloc))
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  return out;
}

namespace {

void add_unique(std::vector<int> &dst, int s) {
  auto it = std::lower_bound(dst.begin(), dst.end(), s);
  if (it == dst.end() || *it != s) dst.insert(it, s);
}

std::set<int> minus(const std::set<int> &a, const std::set<int> &b) {
  std::set<int> out;
  for (int x : a)
    if (!b.count(x)) out.insert(x);
  return out;
}

class Transformer {
public:
  Transformer(const Program &prog, const Analysis &a, int p)
      : prog_(prog), a_(a), p_(p), proc_(prog.procs[static_cast<size_t>(p)]),
        g_(a.pt.graphs[static_cast<size_t>(p)]), live_(a.live[static_cast<size_t>(p)]),
        cls_(a.classes[static_cast<size_t>(p)]) {
    scope_ = cls_.local;
    scope_.insert(cls_.dead.begin(), cls_.dead.end());
    scope_.insert(cls_.born.begin(), cls_.born.end());
  }

  AnnotatedProc run() {
    AnnotatedProc ap;
    const auto &regions = a_.pt.regions[static_cast<size_t>(p_)];
    for (size_t k = 0; k < regions.size(); ++k) {
      ap.names.push_back("R" + std::to_string(k + 1));
      const TypeDef *t = prog_.types.find(g_.type(regions[k]));
      ap.virt.push_back(t && t->word_sized() ? 1 : 0);
    }
    for (size_t v = 0; v < proc_.vars.size(); ++v) {
      int n = g_.node_of_var(static_cast<int>(v));
      ap.var_slot.push_back(n < 0 ? -1 : slot(n));
    }
    ap.formals = region_formals(a_, p_);
    for (int n : regions) {
      ap.edges.emplace_back();
      for (const auto &[label, dst] : g_.out_edges(n)) ap.edges.back().emplace_back(label, slot(dst));
    }
    for (int n : cls_.dead) ap.dead.insert(slot(n));
    for (int n : cls_.born) ap.born.insert(slot(n));
    size_t npoints = live_.at.size();
    ap.removes_before.assign(npoints, {});
    ap.creates_before.assign(npoints, {});
    ap.removes_after.assign(npoints, {});
    for (const auto &pl : live_.at) {
      ap.live_before.emplace_back();
      for (int n : pl.lr_before) ap.live_before.back().insert(slot(n));
    }

    // Per-atom placement.
    for (const Goal *atom : collect_atoms(proc_.body)) {
      int i = atom->point;
      auto ui = static_cast<size_t>(i - 1);
      const auto &pl = live_.point(i);
      auto born_here = minus(pl.lr_after, pl.lr_before);
      auto dead_here = minus(pl.lr_before, pl.lr_after);
      add(ap.removes_after[ui], minus(pl.vr, pl.lr_after));  // regions of instantly dead outputs
      if (atom->kind == GoalKind::Unify) {
        add(ap.removes_after[ui], dead_here);  // dead after a unification
        if (atom->ukind == UnifyKind::Construct) {
          add(ap.creates_before[ui], born_here);  // born at a construction
          ap.construct_slot[i] = slot(g_.node_of_var(atom->lhs));
        }
        continue;
      }
      const CallSite *site = atom->kind == GoalKind::Call ? a_.pt.site_at(p_, i) : nullptr;
      std::set<int> callee_born, callee_dead;
      if (site) {
        const auto &qc = a_.classes[static_cast<size_t>(site->callee)];
        for (const auto &[rq, rp] : site->alpha) {
          if (qc.born.count(rq)) callee_born.insert(rp);
          if (qc.dead.count(rq)) callee_dead.insert(rp);
        }
        std::vector<int> acts;
        for (int f : ap_formals(site->callee)) {
          int node = a_.pt.regions[static_cast<size_t>(site->callee)][static_cast<size_t>(f)];
          int image = a_.pt.alpha(p_, i, node);
          if (image < 0)
            throw Error(Error::Kind::Analysis, atom->loc, "no actual region for a formal of " + atom->pred);
          acts.push_back(slot(image));
        }
        ap.actuals[i] = std::move(acts);
      }
      add(ap.creates_before[ui], minus(born_here, callee_born));  // born here, not by the callee
      add(ap.removes_after[ui], minus(dead_here, callee_dead));   // dead here, not removed by the callee
    }

    // Second loop: consecutive pairs of every execution path.
    for (const auto &path : live_.paths)
      for (size_t j = 0; j + 1 < path.size(); ++j) {
        const auto &a = live_.point(path[j]);
        const auto &b = live_.point(path[j + 1]);
        add(ap.removes_before[static_cast<size_t>(path[j + 1] - 1)], minus(a.lr_after, b.lr_before));
      }
    return ap;
  }

private:
  int slot(int node) const { return a_.pt.slot(p_, node); }

  std::vector<int> ap_formals(int q) const { return region_formals(a_, q); }

  // Adds the members of `nodes` that lie in local ∪ dead ∪ born, as slots.
  void add(std::vector<int> &dst, const std::set<int> &nodes) const {
    for (int n : nodes)
      if (scope_.count(n)) add_unique(dst, slot(n));
  }

  const Program &prog_;
  const Analysis &a_;
  int p_;
  const Procedure &proc_;
  const RptGraph &g_;
  const Liveness &live_;
  const RegionClasses &cls_;
  std::set<int> scope_;
};

void canonicalize_goal(const Goal &g, AnnotatedProc &ap) {
  if (g.kind == GoalKind::Conj)
    for (size_t i = 0; i + 1 < g.sub.size(); ++i) {
      const Goal &a = g.sub[i], &b = g.sub[i + 1];
      if (!a.is_atomic() || !b.is_atomic()) continue;
      auto &rb = ap.removes_before[static_cast<size_t>(b.point - 1)];
      auto &ra = ap.removes_after[static_cast<size_t>(a.point - 1)];
      for (int s : rb) add_unique(ra, s);
      rb.clear();
    }
  for (const auto &s : g.sub) canonicalize_goal(s, ap);
}

class AnnotDecor : public PrintDecor {
public:
  AnnotDecor(const Program &prog, const AnnotatedProgram &ann) : prog_(prog), ann_(ann) {}

  bool labels() const override { return true; }

  std::string head_regions(const Procedure &p) const override { return list(of(p), of(p).formals); }

  std::string call_regions(const Procedure &p, const Goal &g) const override {
    const auto &ap = of(p);
    auto it = ap.actuals.find(g.point);
    return it == ap.actuals.end() ? "" : list(ap, it->second);
  }

  std::string var_region(const Procedure &p, int v) const override {
    const auto &ap = of(p);
    int s = ap.var_slot[static_cast<size_t>(v)];
    if (s < 0 || ap.virt[static_cast<size_t>(s)]) return {};
    return "@" + ap.names[static_cast<size_t>(s)];
  }

  std::string construct_region(const Procedure &p, const Goal &g) const override {
    const auto &ap = of(p);
    auto it = ap.construct_slot.find(g.point);
    return it == ap.construct_slot.end() ? "" : " in " + ap.names[static_cast<size_t>(it->second)];
  }

  std::vector<std::string> before(const Procedure &p, const Goal &g) const override {
    const auto &ap = of(p);
    auto i = static_cast<size_t>(g.point - 1);
    std::vector<std::string> out;
    for (int s : ap.removes_before[i]) out.push_back("remove(" + ap.names[static_cast<size_t>(s)] + ")");
    for (int s : ap.creates_before[i]) out.push_back("create(" + ap.names[static_cast<size_t>(s)] + ")");
    return out;
  }

  std::vector<std::string> after(const Procedure &p, const Goal &g) const override {
    const auto &ap = of(p);
    std::vector<std::string> out;
    for (int s : ap.removes_after[static_cast<size_t>(g.point - 1)])
      out.push_back("remove(" + ap.names[static_cast<size_t>(s)] + ")");
    return out;
  }

private:
  const AnnotatedProc &of(const Procedure &p) const {
    return ann_.procs[static_cast<size_t>(&p - prog_.procs.data())];
  }

  static std::string list(const AnnotatedProc &ap, const std::vector<int> &slots) {
    if (slots.empty()) return {};
    std::string s = "<";
    for (size_t i = 0; i < slots.size(); ++i) s += (i ? "," : "") + ap.names[static_cast<size_t>(slots[i])];
    return s + ">";
  }

  const Program &prog_;
  const AnnotatedProgram &ann_;
};

// Reads instruction placement, region lists and construction regions from
// the annotated surface syntax of one clause.
class Overlay {
public:
  explicit Overlay(AnnotatedProc &ap) : ap_(ap) {}

  void clause(const Clause &c) {
    ap_.formals = slots(c.head_region_args);
    ap_.actuals.clear();
    for (auto *v : {&ap_.removes_before, &ap_.creates_before, &ap_.removes_after})
      for (auto &s : *v) s.clear();
    if (c.has_body) goal(c.body);
  }

private:
  int slot(const std::string &name) {
    int s = ap_.slot_named(name);
    if (s >= 0) return s;
    ap_.names.push_back(name);
    ap_.virt.push_back(0);
    ap_.edges.emplace_back();
    return static_cast<int>(ap_.names.size() - 1);
  }

  std::vector<int> slots(const std::vector<std::string> &names) {
    std::vector<int> out;
    for (const auto &n : names) out.push_back(slot(n));
    return out;
  }

  std::vector<int> &at(std::vector<std::vector<int>> &v, int label, const SrcLoc &loc) {
    if (label < 1 || static_cast<size_t>(label) > v.size())
      throw Error(Error::Kind::Syntax, loc, "program point label (" + std::to_string(label) + ") out of range");
    return v[static_cast<size_t>(label - 1)];
  }

  static void flatten(const SGoal &g, std::vector<const SGoal *> &out) {
    if (g.kind == SGoal::Kind::Conj && g.label == 0) {
      for (const auto &s : g.sub) flatten(s, out);
      return;
    }
    out.push_back(&g);
  }

  void atom(const SGoal &g) {
    if (g.kind == SGoal::Kind::Call && g.has_region_args) ap_.actuals[g.label] = slots(g.region_args);
    if (g.kind == SGoal::Kind::Unify && !g.in_region.empty()) ap_.construct_slot[g.label] = slot(g.in_region);
  }

  void goal(const SGoal &g) {
    std::vector<const SGoal *> items;
    flatten(g, items);
    int prev = 0;
    std::vector<const SGoal *> pending;
    auto flush_after = [&](const SrcLoc &loc) {
      for (const SGoal *ins : pending) {
        if (prev == 0 || ins->op != "remove")
          throw Error(Error::Kind::Syntax, ins->loc, "cannot attach " + ins->op + " to a program point");
        at(ap_.removes_after, prev, loc).push_back(slot(ins->vars[0]));
      }
      pending.clear();
    };
    for (const SGoal *it : items) {
      if (it->kind == SGoal::Kind::Instr) {
        pending.push_back(it);
        continue;
      }
      if (it->label > 0) {
        for (const SGoal *ins : pending) {
          int s = slot(ins->vars[0]);
          if (ins->op == "create")
            at(ap_.creates_before, it->label, ins->loc).push_back(s);
          else if (prev)
            at(ap_.removes_after, prev, ins->loc).push_back(s);
          else
            at(ap_.removes_before, it->label, ins->loc).push_back(s);
        }
        pending.clear();
        atom(*it);
        prev = it->label;
        continue;
      }
      flush_after(it->loc);
      prev = 0;
      for (const auto &s : it->sub) goal(s);
    }
    flush_after(g.loc);
  }

  AnnotatedProc &ap_;
};

}  // namespace

AnnotatedProgram transform_program(const Program &prog, const Analysis &a) {
  AnnotatedProgram ann;
  for (size_t p = 0; p < prog.procs.size(); ++p) ann.procs.push_back(Transformer(prog, a, static_cast<int>(p)).run());
  canonicalize(prog, ann);
  return ann;
}

void canonicalize(const Program &prog, AnnotatedProgram &ann) {
  for (size_t p = 0; p < prog.procs.size(); ++p) canonicalize_goal(prog.procs[p].body, ann.procs[p]);
}

std::string emit_annotated(const Program &prog, const AnnotatedProgram &ann) {
  AnnotDecor d(prog, ann);
  return print_program(prog, &d);
}

LoadedProgram load_and_transform(const std::string &text, size_t path_cap) {
  LoadedProgram out;
  out.prog = load_program(text);
  Analysis a = analyze_program(out.prog, path_cap);
  out.ann = transform_program(out.prog, a);
  return out;
}

LoadedProgram load_annotated(const std::string &text, size_t path_cap) {
  ParseOptions opts;
  opts.allow_annotations = true;
  SurfaceProgram sp = parse_surface(text, opts);
  LoadedProgram out;
  out.prog = normalize(sp);
  mode_order_and_annotate(out.prog);
  Analysis a = analyze_program(out.prog, path_cap);
  out.ann = transform_program(out.prog, a);

  std::map<std::string, std::vector<const Clause *>> by_pred;
  for (const auto &c : sp.clauses)
    by_pred[c.head.name + "/" + std::to_string(c.head.args.size())].push_back(&c);
  for (size_t p = 0; p < out.prog.procs.size(); ++p) {
    const Procedure &proc = out.prog.procs[p];
    const auto &cl = by_pred[proc.name + "/" + std::to_string(proc.arity)];
    size_t nmodes = out.prog.procs_of(proc.name, proc.arity).size();
    if (cl.size() != nmodes)
      throw Error(Error::Kind::Syntax, proc.loc,
                  "annotated program must have one clause per mode of " + proc.display_name());
    Overlay(out.ann.procs[p]).clause(*cl[static_cast<size_t>(proc.mode_index)]);
  }
  canonicalize(out.prog, out.ann);
  return out;
}

}  // namespace rbmm
