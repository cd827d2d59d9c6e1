#include <doctest.h>

#include <array>
#include <cstdio>
#include <json.hpp>
#include <sys/wait.h>

#include "oracles.hpp"
#include "rbmm/report.hpp"

using namespace rbmm;

namespace {

struct CliResult {
  int code;
  std::string out;
};

CliResult cli(const std::string &args) {
  std::string cmd = std::string(RBMM_CLI_PATH) + " " + args + " 2>&1";
  FILE *p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  std::string out;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

}  // namespace

TEST_CASE("json report keys") {
  RunStats s;
  s.words_total = 10;
  s.words_max = 4;
  auto j = nlohmann::json::parse(render_report({"p.rl", "main", s}, ReportFormat::Json));
  for (const char *k : {"regions_total", "regions_max", "words_total", "words_max", "slr", "saving",
                        "instant_reclaim", "frames"})
    CHECK(j.contains(k));
  CHECK(j["saving"].get<double>() == doctest::Approx(0.6));
  CHECK(j["frames"]["commit"].contains("max_words"));
}

TEST_CASE("text report is flat") {
  std::string t = render_report({"p.rl", "main", RunStats{}}, ReportFormat::Text);
  CHECK(t.find("words_total: 0") != std::string::npos);
  CHECK(t.find("frames.disj.total: 0") != std::string::npos);
}

TEST_CASE("cli exit codes") {
  std::string qsort = rbmm::testing::corpus_path("qsort.rl");
  CHECK(cli("run " + qsort + " --report json").code == 0);
  auto missing = cli("run /nonexistent/x.rl");
  CHECK(missing.code == 1);
  CHECK(missing.out.find("file not found") != std::string::npos);
  CHECK(cli("frobnicate").code == 1);
  CHECK(cli("analyze " + rbmm::testing::corpus_path("manifest.json")).code == 2);
}

TEST_CASE("cli analyze dumps") {
  std::string qsort = rbmm::testing::corpus_path("qsort.rl");
  auto r = cli("analyze " + qsort + " --dump-classes");
  CHECK(r.code == 0);
  CHECK(r.out.find("split/4: local={} born={R4,R5}") != std::string::npos);
  CHECK(cli("analyze " + qsort + " --dump-tg list_int").out.find("-([|],2)->") != std::string::npos);
}

TEST_CASE("cli runs a golden annotation under safety checks") {
  auto r = cli("run --check-safety --report json " + rbmm::testing::golden_path("qsort.annot"));
  CHECK(r.code == 0);
}
