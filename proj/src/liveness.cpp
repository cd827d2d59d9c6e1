#include "rbmm/liveness.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace rbmm {

namespace {

class PathBuilder {
public:
  PathBuilder(const Procedure &p, size_t cap) : p_(p), cap_(cap) {}

  std::vector<Path> of(const Goal &g) const {
    switch (g.kind) {
      case GoalKind::Unify:
      case GoalKind::Call:
      case GoalKind::Builtin: return {{g.point}};
      case GoalKind::Conj: {
        std::vector<Path> acc{{}};
        for (const auto &s : g.sub) acc = concat(acc, of(s));
        return acc;
      }
      case GoalKind::Disj: {
        std::vector<Path> acc;
        for (const auto &s : g.sub) append(acc, of(s));
        return acc;
      }
      case GoalKind::Ite: {
        std::vector<Path> acc = concat(of(g.sub[0]), of(g.sub[1]));
        append(acc, of(g.sub[2]));
        return acc;
      }
      case GoalKind::Some: return of(g.sub[0]);
    }
    return {};
  }

private:
  void check(size_t n) const {
    if (n > cap_)
      throw Error(Error::Kind::Analysis, p_.loc,
                  "procedure " + p_.display_name() + " has more than " + std::to_string(cap_) + " execution paths");
  }

  std::vector<Path> concat(const std::vector<Path> &a, const std::vector<Path> &b) const {
    check(a.size() * b.size());
    std::vector<Path> out;
    for (const auto &x : a)
      for (const auto &y : b) {
        Path z = x;
        z.insert(z.end(), y.begin(), y.end());
        out.push_back(std::move(z));
      }
    return out;
  }

  void append(std::vector<Path> &acc, std::vector<Path> more) const {
    check(acc.size() + more.size());
    for (auto &m : more) acc.push_back(std::move(m));
  }

  const Procedure &p_;
  size_t cap_;
};

template <typename T>
bool add_all(std::set<T> &dst, const std::set<T> &src) {
  size_t before = dst.size();
  dst.insert(src.begin(), src.end());
  return dst.size() != before;
}

}  // namespace

std::vector<Path> execution_paths(const Procedure &p, size_t cap) { return PathBuilder(p, cap).of(p.body); }

Liveness live_variables(const Program &prog, const Procedure &p, size_t cap) {
  Liveness lv;
  lv.paths = execution_paths(p, cap);
  auto atoms = collect_atoms(p.body);
  lv.at.assign(atoms.size(), {});
  std::vector<std::set<int>> ins(atoms.size()), outs(atoms.size());
  for (size_t i = 0; i < atoms.size(); ++i) {
    auto a = atom_inputs(prog, *atoms[i]);
    auto o = atom_outputs(prog, *atoms[i]);
    ins[i] = {a.begin(), a.end()};
    outs[i] = {o.begin(), o.end()};
  }
  auto pin = p.in_args(), pout = p.out_args();
  std::set<int> in_set(pin.begin(), pin.end()), out_set(pout.begin(), pout.end());

  // Shared per-point sets are accumulated until no path adds anything.
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto &path : lv.paths) {
      for (size_t j = path.size(); j-- > 0;) {
        auto i = static_cast<size_t>(path[j] - 1);
        auto &pl = lv.at[i];
        pl.on_path = true;
        if (j + 1 == path.size())
          changed |= add_all(pl.lv_after, out_set);
        else
          changed |= add_all(pl.lv_after, lv.at[static_cast<size_t>(path[j + 1] - 1)].lv_before);
        if (j == 0) {
          changed |= add_all(pl.lv_before, in_set);
        } else {
          std::set<int> b = ins[i];
          for (int v : pl.lv_after)
            if (!outs[i].count(v)) b.insert(v);
          changed |= add_all(pl.lv_before, b);
        }
      }
    }
  }
  for (size_t i = 0; i < atoms.size(); ++i)
    for (int v : outs[i])
      if (!lv.at[i].lv_after.count(v)) lv.at[i].vv.insert(v);
  return lv;
}

std::set<int> reach_of_vars(const RptGraph &g, const std::set<int> &vars) {
  std::set<int> out;
  for (int v : vars) {
    int n = g.node_of_var(v);
    if (n >= 0) add_all(out, g.reach(n));
  }
  return out;
}

void live_regions(Liveness &lv, const Program &, const Procedure &, const RptGraph &g) {
  for (auto &pl : lv.at) {
    pl.lr_before = reach_of_vars(g, pl.lv_before);
    pl.lr_after = reach_of_vars(g, pl.lv_after);
    pl.vr = reach_of_vars(g, pl.vv);
  }
}

std::vector<RegionClasses> classify_regions(const Program &prog, const PointsTo &pt, const std::vector<Liveness> &live) {
  std::vector<RegionClasses> cls(prog.procs.size());
  for (size_t p = 0; p < prog.procs.size(); ++p) {
    const auto &proc = prog.procs[p];
    const RptGraph &g = pt.graphs[p];
    auto pin = proc.in_args(), pout = proc.out_args();
    auto &c = cls[p];
    c.input = reach_of_vars(g, {pin.begin(), pin.end()});
    c.output = reach_of_vars(g, {pout.begin(), pout.end()});
    for (int n : g.nodes()) {
      bool i = c.input.count(n) != 0, o = c.output.count(n) != 0;
      if (i && o)
        c.outlived.insert(n);
      else if (i)
        c.dead.insert(n);
      else if (o)
        c.born.insert(n);
      else
        c.local.insert(n);
    }
  }

  auto demote = [&](RegionClasses &q, std::set<int> &from, int r) {
    if (!from.count(r)) return false;
    from.erase(r);
    q.outlived.insert(r);
    return true;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t p = 0; p < prog.procs.size(); ++p) {
      for (const auto &site : pt.sites[p]) {
        auto &q = cls[static_cast<size_t>(site.callee)];
        const auto &pl = live[p].point(site.point);
        std::map<int, int> image_count;
        for (const auto &[rq, rp] : site.alpha) ++image_count[rp];
        for (const auto &[rq, rp] : site.alpha) {
          bool aliased = image_count[rp] > 1;
          // The caller's outlived regions stay bound for its whole body.
          bool owned = cls[p].outlived.count(rp) != 0;
          bool live_before = owned || pl.lr_before.count(rp) != 0;
          bool live_across = owned || (live_before && pl.lr_after.count(rp) != 0);
          if (live_across || aliased) changed |= demote(q, q.dead, rq);  // still needed, or aliased
          if (live_before || aliased) changed |= demote(q, q.born, rq);  // already bound, or aliased
        }
      }
    }
  }

  for (size_t p = 0; p < prog.procs.size(); ++p) {
    auto alloc = allocation(pt, static_cast<int>(p));
    for (int n : alloc)
      if (cls[p].input.count(n) || cls[p].output.count(n)) cls[p].alloc.insert(n);
  }
  return cls;
}

Analysis analyze_program(const Program &prog, size_t path_cap) {
  Analysis a;
  a.pt = analyze_points_to(prog);
  for (size_t p = 0; p < prog.procs.size(); ++p) {
    a.live.push_back(live_variables(prog, prog.procs[p], path_cap));
    live_regions(a.live.back(), prog, prog.procs[p], a.pt.graphs[p]);
  }
  a.classes = classify_regions(prog, a.pt, a.live);
  return a;
}

std::string region_set_str(const PointsTo &pt, int proc, const std::set<int> &nodes) {
  std::vector<int> slots;
  for (int n : nodes) slots.push_back(pt.slot(proc, n));
  std::sort(slots.begin(), slots.end());
  std::string s = "{";
  for (size_t i = 0; i < slots.size(); ++i) s += (i ? "," : "") + std::string("R") + std::to_string(slots[i] + 1);
  return s + "}";
}

namespace {

std::string var_set_str(const Procedure &p, const std::set<int> &vars) {
  std::string s = "{";
  bool first = true;
  for (int v : vars) {
    s += (first ? "" : ",") + p.vars[static_cast<size_t>(v)].name;
    first = false;
  }
  return s + "}";
}

}  // namespace

std::string dump_liveness(const Program &prog, const Analysis &a, int proc) {
  const Procedure &p = prog.procs[static_cast<size_t>(proc)];
  const Liveness &lv = a.live[static_cast<size_t>(proc)];
  std::ostringstream os;
  os << "paths:";
  for (const auto &path : lv.paths) {
    os << " <";
    for (size_t i = 0; i < path.size(); ++i) os << (i ? "," : "") << path[i];
    os << ">";
  }
  os << "\n";
  for (size_t i = 0; i < lv.at.size(); ++i) {
    const auto &pl = lv.at[i];
    if (!pl.on_path) continue;
    os << (i + 1) << "b LV=" << var_set_str(p, pl.lv_before) << " LR=" << region_set_str(a.pt, proc, pl.lr_before)
       << "\n";
    os << (i + 1) << "a LV=" << var_set_str(p, pl.lv_after) << " LR=" << region_set_str(a.pt, proc, pl.lr_after);
    if (!pl.vv.empty()) os << " VV=" << var_set_str(p, pl.vv) << " VR=" << region_set_str(a.pt, proc, pl.vr);
    os << "\n";
  }
  return os.str();
}

std::string dump_classes(const Program &prog, const Analysis &a) {
  std::ostringstream os;
  for (size_t p = 0; p < prog.procs.size(); ++p) {
    const auto &c = a.classes[p];
    int i = static_cast<int>(p);
    os << prog.procs[p].display_name() << ": local=" << region_set_str(a.pt, i, c.local)
       << " born=" << region_set_str(a.pt, i, c.born) << " dead=" << region_set_str(a.pt, i, c.dead)
       << " outlived=" << region_set_str(a.pt, i, c.outlived) << " alloc=" << region_set_str(a.pt, i, c.alloc)
       << "\n";
  }
  return os.str();
}

}  // namespace rbmm
