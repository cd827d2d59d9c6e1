// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <sys/wait.h>

#include "oracles.hpp"
#include "random_program.hpp"
#include "rbmm/frontend.hpp"
#include "rbmm/pointsto.hpp"
#include "rbmm/transform.hpp"
#include "rbmm/vm.hpp"

using namespace rbmm;
using namespace rbmm::testing;
namespace fs = std::filesystem;

namespace {

// Time budgets in seconds.
constexpr double kFastBudget = 1.0;
constexpr double kRunBudget = 60.0;
constexpr double kSuiteBudget = 120.0;

constexpr uint64_t kNrevN = 5000, kNrevFallbackN = 1000;
constexpr uint64_t kNrevWordsTotal = 25015000, kNrevWordsMax = 10000, kNrevRegionsTotal = 5003, kNrevRegionsMax = 2;
constexpr uint64_t kNrevFallbackWordsTotal = 1003000, kNrevFallbackWordsMax = 2000;
constexpr int kPrimesLimit = 20000, kPrimesFallbackLimit = 2000;
constexpr uint64_t kPrimesWordsMax = 39998, kPrimesFallbackWordsMax = 3998, kPrimesRegionsMax = 1;
constexpr double kQueensMinSaving = 0.99;
constexpr uint64_t kDisjFixed = 4, kIteFixed = 4, kCommitFixed = 5;
constexpr int kRandomPrograms = 200;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int n, const std::string &title, double budget, const std::function<Outcome()> &fn) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception &e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.pass && secs > budget) {
    o.pass = false;
    o.detail += "; over the time budget";
  }
  if (!o.pass) ++failures;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2fs", secs);
  std::cout << "criterion " << n << " [" << title << "]: " << (o.pass ? "PASS" : "FAIL") << " (" << buf << ") "
            << o.detail << std::endl;
}

LoadedProgram load_corpus(const std::string &name) { return load_and_transform(read_text(corpus_path(name))); }

RunResult run(const LoadedProgram &lp, const std::string &entry, const std::string &args, bool all,
              bool check = false) {
  VmOptions opts;
  opts.all_solutions = all;
  opts.check_safety = check;
  return run_program(lp.prog, lp.ann, find_entry(lp.prog, entry), parse_arg_terms(args), opts);
}

std::string nums(std::initializer_list<std::pair<const char *, uint64_t>> xs) {
  std::string s;
  for (const auto &[k, v] : xs) s += std::string(s.empty() ? "" : " ") + k + "=" + std::to_string(v);
  return s;
}

int run_cli(const std::string &args) {
  std::string cmd = std::string(RBMM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string replace_once(std::string text, const std::string &from, const std::string &to) {
  auto pos = text.find(from);
  if (pos == std::string::npos) throw std::runtime_error("mutation anchor not found: " + from);
  return text.replace(pos, from.size(), to);
}

// ---- criteria

Outcome classification() {
  auto lp = load_corpus("qsort.rl");
  const Program &prog = lp.prog;
  Analysis a = analyze_program(prog);
  int split = prog.find_proc("split"), qsort = prog.find_proc("qsort");
  auto r = [&](int p, const char *v) { return region_of(prog, a, p, v); };
  const RegionClasses &cs = a.classes[static_cast<size_t>(split)];
  const RegionClasses &cq = a.classes[static_cast<size_t>(qsort)];
  bool ok = cs.local.empty() && cs.born == std::set<int>{r(split, "L1"), r(split, "L2")} &&
            cs.dead == std::set<int>{r(split, "Ls")} && cs.outlived == std::set<int>{r(split, "X"), r(split, "Le")} &&
            cq.local == std::set<int>{r(qsort, "L1"), r(qsort, "L2")} && cq.born.empty() &&
            cq.dead == std::set<int>{r(qsort, "Ls")} && cq.outlived == std::set<int>{r(qsort, "Le"), r(qsort, "A")};
  std::string d = dump_classes(prog, a);
  d.erase(std::remove(d.begin(), d.end(), '\n'), d.end());
  return {ok, d};
}

Outcome region_arguments() {
  auto lp = load_corpus("qsort.rl");
  size_t s = lp.ann.procs[static_cast<size_t>(lp.prog.find_proc("split"))].formals.size();
  size_t q = lp.ann.procs[static_cast<size_t>(lp.prog.find_proc("qsort"))].formals.size();
  return {s == 3 && q == 2, nums({{"split", s}, {"qsort", q}})};
}

Outcome annotated_quicksort() {
  auto lp = load_corpus("qsort.rl");
  std::string got = normalize_regions(emit_annotated(lp.prog, lp.ann));
  std::string want = normalize_regions(read_text(golden_path("qsort.annot")));
  if (got != want) return {false, "emitted text differs from the golden"};
  // Expected placement of every instruction.
  const Program &prog = lp.prog;
  int split = prog.find_proc("split"), qsort = prog.find_proc("qsort");
  const AnnotatedProc &as = lp.ann.procs[static_cast<size_t>(split)];
  const AnnotatedProc &aq = lp.ann.procs[static_cast<size_t>(qsort)];
  const Procedure &ps = prog.procs[static_cast<size_t>(split)];
  const Procedure &pq = prog.procs[static_cast<size_t>(qsort)];
  auto slot = [](const AnnotatedProc &ap, const Procedure &p, const char *v) {
    return ap.var_slot[static_cast<size_t>(p.var_index(v))];
  };
  auto count = [](const std::vector<std::vector<int>> &xs) {
    size_t n = 0;
    for (const auto &x : xs) n += x.size();
    return n;
  };
  bool ok = as.removes_after[0] == std::vector<int>{slot(as, ps, "Ls")} &&
            as.creates_before[1] == std::vector<int>{slot(as, ps, "L1")} &&
            as.creates_before[2] == std::vector<int>{slot(as, ps, "L2")} && count(as.creates_before) == 2 &&
            count(as.removes_after) + count(as.removes_before) == 1 &&
            aq.removes_after[0] == std::vector<int>{slot(aq, pq, "Ls")} && count(aq.creates_before) == 0 &&
            count(aq.removes_after) + count(aq.removes_before) == 1;
  return {ok, ok ? "golden and instruction placement match" : "instruction placement differs"};
}

Outcome liveness_tables() {
  auto lp = load_corpus("qsort.rl");
  Analysis a = analyze_program(lp.prog);
  std::string why;
  // Compiler-introduced names of the clause-head lists.
  auto split = computed_rows(lp.prog, a, lp.prog.find_proc("split"), {{"V_0", "L"}});
  if (!rows_match_up_to_renaming(expected_split_rows(), split, &why)) return {false, "split: " + why};
  auto qsort = computed_rows(lp.prog, a, lp.prog.find_proc("qsort"), {{"V_0", "L"}, {"V_1", "A1"}});
  if (!rows_match_up_to_renaming(expected_qsort_rows(), qsort, &why)) return {false, "qsort: " + why};
  return {true, nums({{"split_rows", split.size()}, {"qsort_rows", qsort.size()}})};
}

Outcome nrev_memory() {
  auto lp = load_corpus("nrev.rl");
  auto t0 = std::chrono::steady_clock::now();
  auto res = run(lp, "go", std::to_string(kNrevN), false);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const RunStats &s = res.stats;
  if (secs > kRunBudget) {
    auto fb = run(lp, "go", std::to_string(kNrevFallbackN), false);
    auto ref = run_reference(lp.prog, find_entry(lp.prog, "go"), parse_arg_terms(std::to_string(kNrevFallbackN)), false);
    bool ok = fb.stats.words_total == kNrevFallbackWordsTotal && fb.stats.words_total == nrev_words_total(kNrevFallbackN) &&
              ref.words_total == fb.stats.words_total && fb.stats.words_max == kNrevFallbackWordsMax;
    return {ok, "fallback N=1000: " + nums({{"words_total", fb.stats.words_total}, {"words_max", fb.stats.words_max}})};
  }
  auto ref = run_reference(lp.prog, find_entry(lp.prog, "go"), parse_arg_terms(std::to_string(kNrevN)), false);
  bool ok = s.words_total == kNrevWordsTotal && s.words_total == nrev_words_total(kNrevN) &&
            ref.words_total == s.words_total && s.words_max == kNrevWordsMax && s.regions_total == kNrevRegionsTotal &&
            s.regions_max == kNrevRegionsMax;
  return {ok, nums({{"words_total", s.words_total},
                    {"oracle", nrev_words_total(kNrevN)},
                    {"reference", ref.words_total},
                    {"words_max", s.words_max},
                    {"regions_total", s.regions_total},
                    {"regions_max", s.regions_max}})};
}

Outcome primes_memory() {
  auto lp = load_corpus("primes.rl");
  auto t0 = std::chrono::steady_clock::now();
  auto res = run(lp, "go", std::to_string(kPrimesLimit), false);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > kRunBudget) {
    auto fb = run(lp, "go", std::to_string(kPrimesFallbackLimit), false);
    bool ok = fb.stats.words_max == kPrimesFallbackWordsMax && fb.stats.words_max == primes_words_max(kPrimesFallbackLimit);
    return {ok, "fallback limit 2000: " + nums({{"words_max", fb.stats.words_max}})};
  }
  const RunStats &s = res.stats;
  bool ok = s.words_max == kPrimesWordsMax && s.words_max == primes_words_max(kPrimesLimit) &&
            s.regions_max == kPrimesRegionsMax && s.words_total == primes_words_total(kPrimesLimit);
  return {ok, nums({{"words_max", s.words_max},
                    {"regions_max", s.regions_max},
                    {"words_total", s.words_total},
                    {"oracle_total", primes_words_total(kPrimesLimit)}})};
}

Outcome instant_reclaiming() {
  auto lp = load_corpus("queens.rl");
  auto res = run(lp, "queens", "8", true);
  auto ref = run_reference(lp.prog, find_entry(lp.prog, "queens"), parse_arg_terms("8"), true);
  const RunStats &s = res.stats;
  bool ok = s.new_region_words > 0 && s.new_region_words > s.new_alloc_words && res.live_words_at_exit == 0 &&
            res.live_regions_at_exit == 0 && s.saving() >= kQueensMinSaving && ref.words_total == s.words_total &&
            ref.solutions == res.solutions;
  char sv[32];
  std::snprintf(sv, sizeof sv, " saving=%.4f", s.saving());
  return {ok, nums({{"new_region_words", s.new_region_words},
                    {"new_alloc_words", s.new_alloc_words},
                    {"live_words_at_exit", res.live_words_at_exit},
                    {"words_total", s.words_total},
                    {"reference_words", ref.words_total},
                    {"solutions", res.solutions}}) +
                  sv};
}

Outcome frame_layout() {
  auto lp = load_corpus("frames.rl");
  auto res = run(lp, "main", "", false);
  const RunStats &s = res.stats;
  auto fixed = [](const FrameStats &f, uint64_t per_record, uint64_t per_prot, uint64_t &out) {
    if (f.total == 0) return false;
    uint64_t variable = per_record * f.size_records + per_prot * f.protected_regions;
    if (f.words < variable || (f.words - variable) % f.total != 0) return false;
    out = (f.words - variable) / f.total;
    return true;
  };
  uint64_t fd = 0, fi = 0, fc = 0;
  bool ok = fixed(s.disj, 3, 1, fd) && fixed(s.ite, 3, 1, fi) && fixed(s.commit, 0, 2, fc) && fd == kDisjFixed &&
            fi == kIteFixed && fc == kCommitFixed;
  std::string detail = nums({{"disj_fixed", fd}, {"ite_fixed", fi}, {"commit_fixed", fc}});
  const char *args[] = {"[0]", "[0], [0]", "[0], [0], [0]"};
  for (uint64_t k = 1; k <= 3; ++k) {
    auto g = run(lp, "grow" + std::to_string(k), args[k - 1], true);
    uint64_t want = kDisjFixed + 3 * k;  // fixed part plus three words per size record
    ok = ok && g.stats.disj.total == 1 && g.stats.disj.words == want && g.stats.disj.max_words == want;
    detail += " k" + std::to_string(k) + "=" + std::to_string(g.stats.disj.words);
  }
  return {ok, detail};
}

Outcome safety_suite() {
  auto manifest = nlohmann::json::parse(read_text(corpus_path("manifest.json")));
  for (const auto &item : manifest) {
    auto lp = load_corpus(item.at("file"));
    run(lp, item.value("entry", "main"), item.value("args", ""), item.value("all", false), true);
  }
  // Mutations of the quicksort golden, each run through the CLI.
  std::string golden = read_text(golden_path("qsort.annot"));
  std::string early = replace_once(golden, "    (10) io.write(S, IO_0, IO),\n    remove(R2),\n    remove(R3).",
                                   "    remove(R3),\n    (10) io.write(S, IO_0, IO),\n    remove(R2).");
  std::string missing = replace_once(golden, "        create(R4),\n        (2) L1 <= [] in R4,", "        (2) L1 <= [] in R4,");
  std::string dup = replace_once(golden, "        (1) V_0 => [],\n        remove(R1),\n        (2) S := A",
                                 "        (1) V_0 => [],\n        remove(R1),\n        remove(R1),\n        (2) S := A");
  fs::path dir = fs::temp_directory_path() / ("rbmm_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::string detail = nums({{"corpus_entries", manifest.size()}});
  bool ok = true;
  int base = run_cli("run --check-safety --report none " + golden_path("qsort.annot"));
  ok &= base == 0;
  detail += " golden_exit=" + std::to_string(base);
  for (const auto &[name, text] : {std::pair<std::string, std::string>{"early_remove", early},
                                   {"missing_create", missing},
                                   {"duplicated_remove", dup}}) {
    fs::path p = dir / (name + ".annot");
    std::ofstream(p) << text;
    int code = run_cli("run --check-safety --report none " + p.string());
    ok &= code == 3;
    detail += " " + name + "_exit=" + std::to_string(code);
  }
  fs::remove_all(dir);
  return {ok, detail};
}

Outcome equivalence() {
  auto manifest = nlohmann::json::parse(read_text(corpus_path("manifest.json")));
  std::string detail;
  bool ok = true;
  for (const auto &item : manifest) {
    auto lp = load_corpus(item.at("file"));
    std::string entry = item.value("entry", "main"), args = item.value("args", "");
    bool all = item.value("all", false);
    auto res = run(lp, entry, args, all);
    auto ref = run_reference(lp.prog, find_entry(lp.prog, entry), parse_arg_terms(args), all);
    bool same = res.output == ref.output && res.solutions == ref.solutions;
    ok &= same;
    if (!same) detail += std::string(item.at("name")) + " differs; ";
  }
  return {ok, ok ? nums({{"programs", manifest.size()}}) : detail};
}

Outcome propositions() {
  for (int i = 0; i < kRandomPrograms; ++i) {
    std::string src = random_program(static_cast<uint64_t>(i) + 1);
    Program prog = load_program(src);
    Analysis a = analyze_program(prog);
    for (const auto &msg :
         {check_path_inclusion(prog, a), check_construction_growth(prog, a), check_unify_shrinks(a), check_idempotent(prog)})
      if (!msg.empty()) return {false, "program " + std::to_string(i + 1) + ": " + msg};
  }
  return {true, nums({{"programs", kRandomPrograms}})};
}

}  // namespace

int main() {
  report(1, "quicksort classification", kFastBudget, classification);
  report(2, "region arguments", kFastBudget, region_arguments);
  report(3, "annotated quicksort", kFastBudget, annotated_quicksort);
  report(4, "liveness tables", kFastBudget, liveness_tables);
  report(5, "nrev memory", kRunBudget * 3, nrev_memory);
  report(6, "primes memory", kRunBudget * 2, primes_memory);
  report(7, "instant reclaiming", kRunBudget, instant_reclaiming);
  report(8, "frame layout", kFastBudget, frame_layout);
  report(9, "safety suite", kSuiteBudget, safety_suite);
  report(10, "behavioral equivalence", kSuiteBudget, equivalence);
  report(11, "analysis propositions", kSuiteBudget, propositions);
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed") << std::endl;
  return failures ? 1 : 0;
}
