#include "rbmm/pointsto.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "rbmm/typegraph.hpp"

namespace rbmm {

// ---------------------------------------------------------------------------
// RptGraph

int RptGraph::add_node(const std::string &type) {
  int id = static_cast<int>(parent_.size());
  parent_.push_back(id);
  vars_.emplace_back();
  alloc_.push_back(0);
  out_.emplace_back();
  type_.push_back(type);
  return id;
}

void RptGraph::add_edge(int src, const EdgeLabel &label, int dst) { out_[static_cast<size_t>(find(src))][label] = dst; }

int RptGraph::find(int n) const {
  int r = n;
  while (parent_[static_cast<size_t>(r)] != r) r = parent_[static_cast<size_t>(r)];
  while (parent_[static_cast<size_t>(n)] != r) {
    int next = parent_[static_cast<size_t>(n)];
    parent_[static_cast<size_t>(n)] = r;
    n = next;
  }
  return r;
}

int RptGraph::unify(int n, int m) {
  int survivor = find(n);
  std::vector<std::pair<int, int>> work{{n, m}};
  while (!work.empty()) {
    auto [a, b] = work.back();
    work.pop_back();
    a = find(a);
    b = find(b);
    if (a == b) continue;
    auto ua = static_cast<size_t>(a), ub = static_cast<size_t>(b);
    parent_[ub] = a;
    vars_[ua].insert(vars_[ub].begin(), vars_[ub].end());
    vars_[ub].clear();
    alloc_[ua] = static_cast<char>(alloc_[ua] | alloc_[ub]);
    for (const auto &[label, dst] : out_[ub]) {
      auto it = out_[ua].find(label);
      if (it == out_[ua].end())
        out_[ua][label] = dst;
      else
        work.emplace_back(it->second, dst);
    }
    out_[ub].clear();
  }
  return find(survivor);
}

std::optional<int> RptGraph::child(int n, const EdgeLabel &label) const {
  const auto &o = out_[static_cast<size_t>(find(n))];
  auto it = o.find(label);
  if (it == o.end()) return std::nullopt;
  return find(it->second);
}

std::vector<std::pair<EdgeLabel, int>> RptGraph::out_edges(int n) const {
  std::vector<std::pair<EdgeLabel, int>> out;
  for (const auto &[label, dst] : out_[static_cast<size_t>(find(n))]) out.emplace_back(label, find(dst));
  return out;
}

std::vector<int> RptGraph::nodes() const {
  std::vector<int> out;
  for (size_t i = 0; i < parent_.size(); ++i)
    if (parent_[i] == static_cast<int>(i)) out.push_back(static_cast<int>(i));
  return out;
}

size_t RptGraph::node_count() const { return nodes().size(); }

size_t RptGraph::edge_count() const {
  size_t n = 0;
  for (int v : nodes()) n += out_[static_cast<size_t>(v)].size();
  return n;
}

std::set<int> RptGraph::reach(int n) const {
  std::set<int> seen;
  std::vector<int> work{find(n)};
  while (!work.empty()) {
    int x = work.back();
    work.pop_back();
    if (!seen.insert(x).second) continue;
    for (const auto &e : out_edges(x)) work.push_back(e.second);
  }
  return seen;
}

bool RptGraph::mark_allocated(int n) {
  auto r = static_cast<size_t>(find(n));
  if (alloc_[r]) return false;
  alloc_[r] = 1;
  return true;
}

// ---------------------------------------------------------------------------
// PointsTo lookups

int PointsTo::slot(int proc, int node) const {
  const auto &m = slot_of[static_cast<size_t>(proc)];
  auto it = m.find(graphs[static_cast<size_t>(proc)].find(node));
  return it == m.end() ? -1 : it->second;
}

std::string PointsTo::region_name(int proc, int node) const { return "R" + std::to_string(slot(proc, node) + 1); }

const CallSite *PointsTo::site_at(int proc, int point) const {
  for (const auto &s : sites[static_cast<size_t>(proc)])
    if (s.point == point) return &s;
  return nullptr;
}

int PointsTo::alpha(int proc, int point, int callee_node) const {
  const CallSite *s = site_at(proc, point);
  if (!s) return -1;
  int key = graphs[static_cast<size_t>(s->callee)].find(callee_node);
  auto it = s->alpha.find(key);
  return it == s->alpha.end() ? -1 : graphs[static_cast<size_t>(proc)].find(it->second);
}

bool has_region(const std::string &type) { return type != kIoType; }

// ---------------------------------------------------------------------------
// Intraprocedural analysis

RptGraph init_graph(const Program &prog, const Procedure &p) {
  RptGraph g;
  g.var_node.assign(p.vars.size(), -1);
  for (size_t v = 0; v < p.vars.size(); ++v) {
    const std::string &t = p.vars[v].type;
    if (!has_region(t)) continue;
    TypeGraph tg = build_type_graph(prog.types, t);
    std::vector<int> ids;
    for (const auto &nt : tg.node_types) ids.push_back(g.add_node(nt));
    for (const auto &e : tg.edges) g.add_edge(ids[static_cast<size_t>(e.src)], {e.functor, e.arg}, ids[static_cast<size_t>(e.dst)]);
    g.var_node[v] = ids[static_cast<size_t>(tg.principal)];
    g.add_var(g.var_node[v], static_cast<int>(v));
  }
  return g;
}

RptGraph intraproc(const Program &prog, const Procedure &p) {
  RptGraph g = init_graph(prog, p);
  for (const Goal *a : collect_atoms(p.body)) {
    if (a->kind != GoalKind::Unify) continue;
    int nx = g.node_of_var(a->lhs);
    if (nx < 0) continue;
    switch (a->ukind) {
      case UnifyKind::Assign: g.unify(nx, g.node_of_var(a->rhs)); break;
      case UnifyKind::Construct:
      case UnifyKind::Deconstruct:
        for (size_t i = 0; i < a->args.size(); ++i) {
          auto c = g.child(g.node_of_var(a->lhs), {a->functor, static_cast<int>(i + 1)});
          if (!c) throw Error(Error::Kind::Analysis, a->loc, "no region edge for " + a->functor);
          g.unify(*c, g.node_of_var(a->args[i]));
        }
        if (a->ukind == UnifyKind::Construct) g.mark_allocated(g.node_of_var(a->lhs));
        break;
      default: break;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Interprocedural analysis

namespace {

// Builds alpha for one call site, applying the function-ensuring step and the
// Alpha traversal. Returns true if the caller graph changed; the traversal is
// restarted after every merge.
bool integrate_site(const Program &prog, int p, CallSite &site, const Goal &call, PointsTo &pt) {
  RptGraph &gp = pt.graphs[static_cast<size_t>(p)];
  const Procedure &q = prog.procs[static_cast<size_t>(site.callee)];
  bool changed = false;
  for (;;) {
    RptGraph snapshot;
    if (site.callee == p) snapshot = gp;
    const RptGraph &gq = site.callee == p ? snapshot : pt.graphs[static_cast<size_t>(site.callee)];

    std::map<int, int> alpha;
    bool merged = false;
    std::vector<int> roots;
    for (size_t k = 0; k < q.head_vars.size() && !merged; ++k) {
      int xk = gq.node_of_var(q.head_vars[k]);
      int yk = gp.node_of_var(call.args[k]);
      if (xk < 0 || yk < 0) continue;
      auto it = alpha.find(xk);
      if (it != alpha.end()) {
        if (gp.find(it->second) != yk) {
          gp.unify(it->second, yk);
          merged = true;
        }
      } else {
        alpha[xk] = yk;
        roots.push_back(xk);
      }
    }
    if (!merged) {
      std::set<int> visited;
      std::function<bool(int)> dfs = [&](int nq) -> bool {
        visited.insert(nq);
        int np = gp.find(alpha.at(nq));
        if (gq.allocated(nq) && gp.mark_allocated(np)) changed = true;
        for (const auto &[label, mq] : gq.out_edges(nq)) {
          auto mp = gp.child(np, label);
          if (!mp) throw Error(Error::Kind::Analysis, call.loc, "region graph mismatch at call to " + q.name);
          auto it = alpha.find(mq);
          if (it != alpha.end()) {
            int mpp = gp.find(it->second);
            if (mpp != *mp) {
              gp.unify(*mp, mpp);  // conflicting images merge
              return false;
            }
          } else {
            alpha[mq] = *mp;  // image follows the caller edge
          }
          if (!visited.count(mq) && !dfs(mq)) return false;
        }
        return true;
      };
      for (int r : roots)
        if (!visited.count(r) && !dfs(r)) {
          merged = true;
          break;
        }
    }
    if (merged) {
      changed = true;
      continue;
    }
    std::map<int, int> resolved;
    for (const auto &[k, v] : alpha) resolved[k] = gp.find(v);
    if (resolved != site.alpha) {
      site.alpha = std::move(resolved);
      changed = true;
    }
    return changed;
  }
}

void collect_calls(const Goal &g, std::vector<const Goal *> &out) {
  if (g.kind == GoalKind::Call) out.push_back(&g);
  for (const auto &s : g.sub) collect_calls(s, out);
}

}  // namespace

bool interproc(const Program &prog, int p, PointsTo &pt) {
  const Procedure &proc = prog.procs[static_cast<size_t>(p)];
  std::vector<const Goal *> calls;
  collect_calls(proc.body, calls);
  auto &sites = pt.sites[static_cast<size_t>(p)];
  if (sites.size() != calls.size()) {
    sites.clear();
    for (const Goal *c : calls) sites.push_back({c->point, c->callee, {}});
  }
  bool changed = false;
  for (size_t i = 0; i < calls.size(); ++i) changed |= integrate_site(prog, p, sites[i], *calls[i], pt);
  // Keys of alpha maps into p's own graph may have gone stale through merges.
  for (auto &s : sites) {
    std::map<int, int> fixed;
    const RptGraph &gq = pt.graphs[static_cast<size_t>(s.callee)];
    for (const auto &[k, v] : s.alpha) fixed[gq.find(k)] = pt.graphs[static_cast<size_t>(p)].find(v);
    s.alpha = std::move(fixed);
  }
  return changed;
}

std::vector<std::vector<int>> call_graph_sccs(const Program &prog) {
  size_t n = prog.procs.size();
  std::vector<std::vector<int>> succ(n);
  for (size_t i = 0; i < n; ++i) {
    std::vector<const Goal *> calls;
    collect_calls(prog.procs[i].body, calls);
    for (const Goal *c : calls) succ[i].push_back(c->callee);
  }
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<char> on(n, 0);
  std::vector<int> stack;
  std::vector<std::vector<int>> out;
  int counter = 0;
  std::function<void(int)> strong = [&](int v) {
    auto uv = static_cast<size_t>(v);
    index[uv] = low[uv] = counter++;
    stack.push_back(v);
    on[uv] = 1;
    for (int w : succ[uv]) {
      auto uw = static_cast<size_t>(w);
      if (index[uw] < 0) {
        strong(w);
        low[uv] = std::min(low[uv], low[uw]);
      } else if (on[uw]) {
        low[uv] = std::min(low[uv], index[uw]);
      }
    }
    if (low[uv] == index[uv]) {
      std::vector<int> scc;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on[static_cast<size_t>(w)] = 0;
        scc.push_back(w);
      } while (w != v);
      std::sort(scc.begin(), scc.end());
      out.push_back(std::move(scc));
    }
  };
  for (size_t i = 0; i < n; ++i)
    if (index[i] < 0) strong(static_cast<int>(i));
  return out;
}

bool refine_points_to(const Program &prog, PointsTo &pt) {
  bool any = false;
  for (const auto &scc : call_graph_sccs(prog)) {
    bool changed;
    do {
      changed = false;
      for (int p : scc) changed |= interproc(prog, p, pt);
      any |= changed;
    } while (changed);
  }
  return any;
}

void name_regions(const Program &prog, PointsTo &pt) {
  pt.regions.assign(prog.procs.size(), {});
  pt.slot_of.assign(prog.procs.size(), {});
  for (size_t p = 0; p < prog.procs.size(); ++p) {
    const Procedure &proc = prog.procs[p];
    const RptGraph &g = pt.graphs[p];
    auto &order = pt.regions[p];
    auto &slots = pt.slot_of[p];
    std::function<void(int)> visit = [&](int n) {
      n = g.find(n);
      if (slots.count(n)) return;
      slots[n] = static_cast<int>(order.size());
      order.push_back(n);
      for (const auto &e : g.out_edges(n)) visit(e.second);
    };
    for (int v : proc.head_vars)
      if (g.node_of_var(v) >= 0) visit(g.node_of_var(v));
    for (size_t v = 0; v < proc.vars.size(); ++v)
      if (g.node_of_var(static_cast<int>(v)) >= 0) visit(g.node_of_var(static_cast<int>(v)));
    for (int n : g.nodes()) visit(n);
  }
}

PointsTo analyze_points_to(const Program &prog) {
  PointsTo pt;
  for (const auto &p : prog.procs) pt.graphs.push_back(intraproc(prog, p));
  pt.sites.assign(prog.procs.size(), {});
  refine_points_to(prog, pt);
  name_regions(prog, pt);
  return pt;
}

std::set<int> allocation(const PointsTo &pt, int proc) {
  std::set<int> out;
  const RptGraph &g = pt.graphs[static_cast<size_t>(proc)];
  for (int n : g.nodes())
    if (g.allocated(n)) out.insert(n);
  return out;
}

std::string dump_rptg(const Program &prog, const PointsTo &pt, int proc) {
  const Procedure &p = prog.procs[static_cast<size_t>(proc)];
  const RptGraph &g = pt.graphs[static_cast<size_t>(proc)];
  std::ostringstream os;
  for (int n : pt.regions[static_cast<size_t>(proc)]) {
    os << pt.region_name(proc, n) << "{";
    bool first = true;
    for (int v : g.vars(n)) {
      os << (first ? "" : ",") << p.vars[static_cast<size_t>(v)].name;
      first = false;
    }
    os << "}" << (g.allocated(n) ? "[A]" : "") << " : " << g.type(n) << "\n";
  }
  for (int n : pt.regions[static_cast<size_t>(proc)])
    for (const auto &[label, dst] : g.out_edges(n))
      os << pt.region_name(proc, n) << " -(" << label.first << "," << label.second << ")-> "
         << pt.region_name(proc, dst) << "\n";
  return os.str();
}

std::string graph_signature(const Program &prog, const PointsTo &pt, int proc) {
  // Nodes are identified by their sorted variable-name sets plus a DFS
  // position for variable-free nodes; this is independent of node ids.
  PointsTo tmp;
  tmp.graphs = {pt.graphs[static_cast<size_t>(proc)]};
  Program one;
  one.types = prog.types;
  one.procs = {prog.procs[static_cast<size_t>(proc)]};
  name_regions(one, tmp);
  std::string s = dump_rptg(one, tmp, 0);
  for (const auto &site : pt.sites[static_cast<size_t>(proc)]) {
    s += "site " + std::to_string(site.point) + ":";
    for (const auto &[k, v] : site.alpha) s += " " + std::to_string(k) + "->" + tmp.region_name(0, v);
    s += "\n";
  }
  return s;
}

}  // namespace rbmm
