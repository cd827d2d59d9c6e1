#include <doctest.h>

#include "oracles.hpp"
#include "random_program.hpp"
#include "rbmm/vm.hpp"

using namespace rbmm;
using namespace rbmm::testing;

namespace {

RunResult run(const LoadedProgram &lp, const std::string &entry, const std::string &args, bool all,
              bool check = true) {
  VmOptions o;
  o.all_solutions = all;
  o.check_safety = check;
  return run_program(lp.prog, lp.ann, find_entry(lp.prog, entry), parse_arg_terms(args), o);
}

// Words the VM spends building the entry arguments.
uint64_t arg_words(const std::vector<ArgTerm> &ts) {
  uint64_t n = 0;
  for (const auto &t : ts) n += t.args.size() + arg_words(t.args);
  return n;
}

}  // namespace

TEST_CASE("argument terms") {
  auto ts = parse_arg_terms("3, [1, 2 | []], f(a, -4)");
  REQUIRE(ts.size() == 3);
  CHECK(ts[0].is_int);
  CHECK(ts[0].value == 3);
  CHECK(ts[1].functor == "[|]");
  CHECK(ts[2].functor == "f");
  CHECK(ts[2].args[1].value == -4);
}

TEST_CASE("quicksort output and memory") {
  auto lp = load_and_transform(read_text(corpus_path("qsort.rl")));
  auto r = run(lp, "main", "", false);
  auto ref = run_reference(lp.prog, find_entry(lp.prog, "main"), {}, false);
  CHECK(r.output == ref.output);
  CHECK(r.stats.words_total == ref.words_total);
  CHECK(r.live_regions_at_exit == 0);
}

TEST_CASE("small nrev matches the closed form") {
  auto lp = load_and_transform(read_text(corpus_path("nrev.rl")));
  for (uint64_t n : {1, 2, 10, 100}) {
    auto r = run(lp, "go", std::to_string(n), false);
    CHECK(r.stats.words_total == nrev_words_total(n));
    CHECK(r.stats.words_total == n * n + 3 * n);
    CHECK(r.stats.words_max == 2 * n);
  }
}

TEST_CASE("small primes match the sieve oracle") {
  auto lp = load_and_transform(read_text(corpus_path("primes.rl")));
  for (int limit : {2, 10, 100, 500}) {
    auto r = run(lp, "go", std::to_string(limit), false);
    CHECK(r.stats.words_total == primes_words_total(limit));
    CHECK(r.stats.words_max == primes_words_max(limit));
  }
}

TEST_CASE("all solutions of a small board") {
  auto lp = load_and_transform(read_text(corpus_path("queens.rl")));
  auto r = run(lp, "queens", "6", true);
  CHECK(r.solutions == 4);
  CHECK(r.live_words_at_exit == 0);
  auto ref = run_reference(lp.prog, find_entry(lp.prog, "queens"), parse_arg_terms("6"), true);
  CHECK(r.output == ref.output);
}

TEST_CASE("the step limit stops a run") {
  auto lp = load_and_transform(read_text(corpus_path("nrev.rl")));
  VmOptions o;
  o.step_limit = 100;
  CHECK_THROWS_AS(run_program(lp.prog, lp.ann, find_entry(lp.prog, "go"), parse_arg_terms("1000"), o),
                  StepLimitExceeded);
}

TEST_CASE("random programs agree with the reference interpreter") {
  const char *inputs[] = {"[], 0", "[1, 2, 3], 2", "[5, 0, 7, 1], 4"};
  for (uint64_t seed = 1; seed <= 60; ++seed) {
    auto lp = load_and_transform(random_program(seed));
    int last = static_cast<int>(lp.prog.procs.size()) - 1;
    std::string entry = lp.prog.procs[static_cast<size_t>(last)].display_name();
    for (const char *in : inputs) {
      VmOptions o;
      o.all_solutions = true;
      o.check_safety = true;
      o.step_limit = 2000000;
      auto r = run_program(lp.prog, lp.ann, last, parse_arg_terms(in), o);
      auto ref = run_reference(lp.prog, last, parse_arg_terms(in), true, 2000000);
      CHECK_MESSAGE(r.output == ref.output, "seed ", seed, " ", entry, " ", in);
      CHECK_MESSAGE(r.stats.words_total == ref.words_total + arg_words(parse_arg_terms(in)), "seed ", seed);
      CHECK_MESSAGE(r.live_words_at_exit == 0, "seed ", seed);
    }
  }
}

TEST_CASE("a callee does not remove a region the caller later allocates in") {
  const char *src = R"(
:- type list_int ---> [] ; [int | list_int].
:- pred main(io::di, io::uo) is det.
main(!IO) :-
    L = [1, 2],
    p(L, R),
    io.write(R, !IO),
    io.nl(!IO).
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
  auto lp = load_and_transform(src);
  auto r = run(lp, "main", "", false);
  CHECK(r.output == "[1]\n");
  CHECK(r.live_regions_at_exit == 0);
}
