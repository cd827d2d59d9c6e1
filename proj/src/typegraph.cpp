#include "rbmm/typegraph.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace rbmm {

int TypeGraph::node_of(const std::string &type) const {
  auto it = std::find(node_types.begin(), node_types.end(), type);
  return it == node_types.end() ? -1 : static_cast<int>(it - node_types.begin());
}

TypeGraph build_type_graph(const TypeTable &types, const std::string &type) {
  if (!types.contains(type)) throw Error(Error::Kind::Type, {}, "unknown type " + type);
  TypeGraph g;
  std::map<std::string, int> ids;
  std::vector<std::string> work{type};
  ids[type] = 0;
  g.node_types.push_back(type);
  while (!work.empty()) {
    std::string t = work.back();
    work.pop_back();
    int src = ids[t];
    for (const auto &c : types.get(t).ctors) {
      for (size_t i = 0; i < c.args.size(); ++i) {
        const std::string &at = c.args[i];
        auto it = ids.find(at);
        int dst;
        if (it == ids.end()) {
          dst = static_cast<int>(g.node_types.size());
          ids[at] = dst;
          g.node_types.push_back(at);
          work.push_back(at);
        } else {
          dst = it->second;
        }
        g.edges.push_back({src, c.name, static_cast<int>(i + 1), dst});
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const TypeGraphEdge &a, const TypeGraphEdge &b) {
    return std::tie(a.src, a.functor, a.arg) < std::tie(b.src, b.functor, b.arg);
  });
  return g;
}

std::string dump_type_graph(const TypeGraph &g) {
  std::ostringstream os;
  os << "nodes:";
  for (const auto &t : g.node_types) os << " R^" << t;
  os << "\n";
  for (const auto &e : g.edges)
    os << "R^" << g.node_types[e.src] << " -(" << e.functor << "," << e.arg << ")-> R^" << g.node_types[e.dst]
       << "\n";
  return os.str();
}

}  // namespace rbmm
