#include <doctest.h>

#include "oracles.hpp"
#include "rbmm/transform.hpp"

using namespace rbmm;
using namespace rbmm::testing;

TEST_CASE("quicksort annotation matches the golden file") {
  auto lp = load_and_transform(read_text(corpus_path("qsort.rl")));
  CHECK(normalize_regions(emit_annotated(lp.prog, lp.ann)) ==
        normalize_regions(read_text(golden_path("qsort.annot"))));
}

TEST_CASE("formals are dead, then born, then the rest") {
  auto lp = load_and_transform(read_text(corpus_path("qsort.rl")));
  const AnnotatedProc &split = lp.ann.procs[static_cast<size_t>(lp.prog.find_proc("split"))];
  REQUIRE(split.formals.size() == 3);
  CHECK(split.dead.count(split.formals[0]));
  CHECK(split.born.count(split.formals[1]));
  CHECK(split.born.count(split.formals[2]));
}

TEST_CASE("annotated text reloads to the same program") {
  for (const char *f : {"qsort.rl", "nrev.rl", "queens.rl", "frames.rl"}) {
    auto lp = load_and_transform(read_text(corpus_path(f)));
    std::string text = emit_annotated(lp.prog, lp.ann);
    auto again = load_annotated(text);
    CHECK_MESSAGE(emit_annotated(again.prog, again.ann) == text, f);
  }
}

TEST_CASE("normalization renames per clause") {
  CHECK(normalize_regions("p<R7>(X) :-\n    create(R7).\nq<R3>(Y) :-\n    remove(R3).\n") ==
        "p<R1>(X) :-\n    create(R1).\nq<R1>(Y) :-\n    remove(R1).\n");
}
