#include <doctest.h>

#include "oracles.hpp"
#include "random_program.hpp"
#include "rbmm/frontend.hpp"
#include "rbmm/liveness.hpp"

using namespace rbmm;
using namespace rbmm::testing;

TEST_CASE("unify merges nodes and cascades over shared labels") {
  RptGraph g;
  int a = g.add_node("list"), b = g.add_node("list"), ea = g.add_node("int"), eb = g.add_node("int");
  g.add_edge(a, {"[|]", 1}, ea);
  g.add_edge(b, {"[|]", 1}, eb);
  g.add_edge(a, {"[|]", 2}, a);
  g.add_edge(b, {"[|]", 2}, b);
  REQUIRE(g.node_count() == 4);
  int r = g.unify(a, b);
  CHECK(g.node_count() == 2);
  CHECK(g.find(ea) == g.find(eb));
  CHECK(g.child(r, {"[|]", 2}) == r);
}

TEST_CASE("quicksort region graphs") {
  Program prog = load_program(read_text(corpus_path("qsort.rl")));
  Analysis a = analyze_program(prog);
  int split = prog.find_proc("split");
  const RptGraph &g = a.pt.graphs[static_cast<size_t>(split)];
  // Comparison does not merge; the list cells point at Le's region.
  CHECK(region_of(prog, a, split, "X") != region_of(prog, a, split, "Le"));
  CHECK(g.child(region_of(prog, a, split, "Ls"), {"[|]", 1}) == region_of(prog, a, split, "Le"));
  CHECK(region_of(prog, a, split, "L1") != region_of(prog, a, split, "L2"));
  CHECK(g.allocated(region_of(prog, a, split, "L1")));
  CHECK_FALSE(g.allocated(region_of(prog, a, split, "Ls")));
}

TEST_CASE("call-site sharing propagates to the caller") {
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    Program prog = load_program(random_program(seed));
    Analysis a = analyze_program(prog);
    for (size_t p = 0; p < prog.procs.size(); ++p)
      for (const CallSite &site : a.pt.sites[p]) {
        // Distinct callee nodes mapping to one caller node is allowed;
        // every mapped node must be a caller representative.
        for (const auto &[callee_node, caller_node] : site.alpha)
          CHECK(a.pt.graphs[p].find(caller_node) == caller_node);
      }
  }
}

TEST_CASE("analysis is idempotent on the corpus") {
  for (const char *f : {"qsort.rl", "nrev.rl", "primes.rl", "queens.rl", "crypt.rl", "frames.rl"}) {
    Program prog = load_program(read_text(corpus_path(f)));
    CHECK_MESSAGE(check_idempotent(prog).empty(), f);
    Analysis a = analyze_program(prog);
    CHECK_MESSAGE(check_unify_shrinks(a).empty(), f);
  }
}
