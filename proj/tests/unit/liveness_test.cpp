#include <doctest.h>

#include "oracles.hpp"
#include "rbmm/frontend.hpp"
#include "rbmm/liveness.hpp"

using namespace rbmm;
using namespace rbmm::testing;

TEST_CASE("execution paths of a switch") {
  Program prog = load_program(read_text(corpus_path("qsort.rl")));
  const Procedure &split = prog.procs[static_cast<size_t>(prog.find_proc("split"))];
  auto paths = execution_paths(split);
  CHECK(paths.size() == 3);  // base case, then branch, else branch
  for (const auto &p : paths) CHECK(p.front() <= p.back());
}

TEST_CASE("expected liveness rows hold up to region renaming") {
  Program prog = load_program(read_text(corpus_path("qsort.rl")));
  Analysis a = analyze_program(prog);
  std::string why;
  CHECK(rows_match_up_to_renaming(expected_split_rows(),
                                  computed_rows(prog, a, prog.find_proc("split"), {{"V_0", "L"}}), &why));
  CHECK(rows_match_up_to_renaming(expected_qsort_rows(),
                                  computed_rows(prog, a, prog.find_proc("qsort"), {{"V_0", "L"}, {"V_1", "A1"}}),
                                  &why));
}

TEST_CASE("row matching rejects a wrong table") {
  auto rows = expected_split_rows();
  rows[0].lr.insert("R9");
  std::string why;
  CHECK_FALSE(rows_match_up_to_renaming(expected_split_rows(), rows, &why));
  CHECK_FALSE(why.empty());
}

TEST_CASE("set inclusion and construction properties on the corpus") {
  for (const char *f : {"qsort.rl", "nrev.rl", "isort.rl", "queens.rl", "recreate.rl", "crypt.rl"}) {
    Program prog = load_program(read_text(corpus_path(f)));
    Analysis a = analyze_program(prog);
    CHECK_MESSAGE(check_path_inclusion(prog, a).empty(), f);
    CHECK_MESSAGE(check_construction_growth(prog, a).empty(), f);
  }
}

// An else branch starts a path, so its first point sees every input as live
// before it; a construction there can drop an input region.
TEST_CASE("construction at the start of an else path can shrink LR") {
  Program prog = load_program(read_text(corpus_path("primes.rl")));
  Analysis a = analyze_program(prog);
  CHECK(check_construction_growth(prog, a) == "construction shrinks LR at integers/3 point 5");
}

TEST_CASE("an outlived region of the caller is neither removed nor created by a callee") {
  const char *src = R"(
:- type list_int ---> [] ; [int | list_int].
:- pred p(list_int::in, list_int::out) is det.
p(X, Y) :-
    ( if X = [] then
        Y = X
    else
        q(X, N),
        Y = [N | []]
    ).
:- pred q(list_int::in, int::out) is det.
q([], 0).
q([H | _], H).
)";
  Program prog = load_program(src);
  Analysis a = analyze_program(prog);
  const RegionClasses &q = a.classes[static_cast<size_t>(prog.find_proc("q"))];
  CHECK(q.dead.empty());
  CHECK(q.outlived.count(region_of(prog, a, prog.find_proc("q"), "V_0")) == 1);
}

TEST_CASE("classes partition the regions of each procedure") {
  Program prog = load_program(read_text(corpus_path("queens.rl")));
  Analysis a = analyze_program(prog);
  for (size_t p = 0; p < prog.procs.size(); ++p) {
    const RegionClasses &c = a.classes[p];
    for (int n : c.local) {
      CHECK_FALSE(c.born.count(n));
      CHECK_FALSE(c.dead.count(n));
      CHECK_FALSE(c.outlived.count(n));
    }
    for (int n : c.born) CHECK_FALSE(c.dead.count(n));
  }
}
