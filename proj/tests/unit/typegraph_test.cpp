#include <doctest.h>

#include "rbmm/frontend.hpp"
#include "rbmm/typegraph.hpp"

using namespace rbmm;

TEST_CASE("list of int has a self edge and an element node") {
  Program prog = load_program(":- type list_int ---> [] ; [int | list_int].\n");
  TypeGraph g = build_type_graph(prog.types, "list_int");
  CHECK(g.node_types.size() == 2);
  CHECK(g.node_types[static_cast<size_t>(g.principal)] == "list_int");
  REQUIRE(g.edges.size() == 2);
  int el = g.node_of("int");
  REQUIRE(el >= 0);
  bool self = false, elem = false;
  for (const auto &e : g.edges) {
    self |= e.src == g.principal && e.dst == g.principal && e.arg == 2;
    elem |= e.src == g.principal && e.dst == el && e.arg == 1;
  }
  CHECK(self);
  CHECK(elem);
}

TEST_CASE("mutually recursive types share nodes") {
  Program prog = load_program(
      ":- type a ---> na ; ca(int, b).\n"
      ":- type b ---> nb ; cb(a).\n");
  TypeGraph g = build_type_graph(prog.types, "a");
  CHECK(g.node_types.size() == 3);
  CHECK(g.edges.size() == 3);
  CHECK(dump_type_graph(g).find("-(cb,1)->") != std::string::npos);
}

TEST_CASE("constant-only types have no edges") {
  Program prog = load_program(":- type color ---> red ; green.\n");
  TypeGraph g = build_type_graph(prog.types, "color");
  CHECK(g.node_types.size() == 1);
  CHECK(g.edges.empty());
}
