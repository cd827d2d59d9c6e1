#include <doctest.h>

#include "oracles.hpp"
#include "rbmm/frontend.hpp"

using namespace rbmm;

namespace {

const char *kLen = R"(
:- type list_int ---> [] ; [int | list_int].
:- pred len(list_int::in, int::out) is det.
len([], 0).
len([_ | T], N) :- len(T, M), N = M + 1.
)";

Error::Kind kind_of(const std::string &text) {
  try {
    load_program(text);
  } catch (const Error &e) {
    return e.kind();
  }
  FAIL("expected an error");
  return Error::Kind::Usage;
}

}  // namespace

TEST_CASE("clauses merge into one procedure per mode") {
  Program prog = load_program(kLen);
  REQUIRE(prog.procs.size() == 1);
  const Procedure &p = prog.procs[0];
  CHECK(p.display_name() == "len/2");
  CHECK(collect_atoms(p.body).size() >= 4);
}

TEST_CASE("every atom gets a distinct program point in order") {
  Program prog = load_program(kLen);
  auto atoms = collect_atoms(prog.procs[0].body);
  for (size_t i = 0; i < atoms.size(); ++i) CHECK(atoms[i]->point == static_cast<int>(i) + 1);
}

TEST_CASE("unifications are classified by mode") {
  Program prog = load_program(rbmm::testing::read_text(rbmm::testing::corpus_path("qsort.rl")));
  const Procedure &split = prog.procs[static_cast<size_t>(prog.find_proc("split"))];
  int constructs = 0, deconstructs = 0;
  for (const Goal *g : collect_atoms(split.body)) {
    if (g->kind != GoalKind::Unify) continue;
    constructs += g->ukind == UnifyKind::Construct;
    deconstructs += g->ukind == UnifyKind::Deconstruct;
  }
  CHECK(constructs == 4);
  CHECK(deconstructs == 2);
}

TEST_CASE("syntax errors carry a location") {
  try {
    load_program(":- type t ---> a.\np(X :- true.\n");
    FAIL("no error");
  } catch (const Error &e) {
    CHECK(e.kind() == Error::Kind::Syntax);
    CHECK(e.loc().line == 2);
    CHECK(e.format("f.rl").rfind("f.rl:2:", 0) == 0);
  }
}

TEST_CASE("type, mode and determinism errors") {
  CHECK(kind_of(":- pred p(int::out) is det.\np(X) :- X = foo.\n") == Error::Kind::Type);
  CHECK(kind_of(":- pred p(int::in, int::out) is det.\np(X, Y) :- Z = Y.\n") == Error::Kind::Mode);
  CHECK(kind_of(":- pred p(int::in, int::out) is det.\np(X, Y) :- X > 0, Y = 1.\n") == Error::Kind::Determinism);
}

TEST_CASE("printing round-trips through the parser") {
  Program a = load_program(kLen);
  Program b = load_program(print_program(a));
  CHECK(print_program(b) == print_program(a));
}

TEST_CASE("constructions whose result is never read are removed") {
  Program prog = load_program(R"(
:- type list_int ---> [] ; [int | list_int].
:- pred p(int::in, list_int::out) is det.
p(N, R) :-
    ( if N > 2 then
        V = [N | []]
    else
        V = []
    ),
    W = [N | []],
    R = [].
)");
  int constructs = 0;
  for (const Goal *g : collect_atoms(prog.procs[0].body)) constructs += g->is_construct();
  CHECK(constructs == 1);  // only R remains
}
