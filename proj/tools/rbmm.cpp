// rbmm: analyze, transform and run region-annotated logic programs.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "rbmm/frontend.hpp"
#include "rbmm/liveness.hpp"
#include "rbmm/pointsto.hpp"
#include "rbmm/report.hpp"
#include "rbmm/transform.hpp"
#include "rbmm/typegraph.hpp"
#include "rbmm/vm.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kUsage = 1, kAnalysis = 2, kSafety = 3 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": file not found");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError(path + ": cannot write");
}

bool is_annotated(const std::string &path) { return fs::path(path).extension() == ".annot"; }

rbmm::LoadedProgram load(const std::string &path) {
  std::string text = read_file(path);
  return is_annotated(path) ? rbmm::load_annotated(text) : rbmm::load_and_transform(text);
}

int proc_or_throw(const rbmm::Program &prog, const std::string &name) {
  int p = prog.find_proc(name);
  if (p < 0) throw IoError("no procedure " + name);
  return p;
}

rbmm::RuntimeConfig runtime_config(int page_size, int page_block) {
  rbmm::RuntimeConfig cfg;
  cfg.page_size = page_size;
  cfg.page_block = page_block;
  return cfg;
}

struct RunArgs {
  std::string file;
  std::string entry = "main";
  std::string args;
  bool all = false;
  bool check_safety = false;
  uint64_t step_limit = 0;
  std::string report = "text";
};

struct BenchRow {
  std::string name;
  rbmm::RunStats stats;
};

rbmm::RunStats run_one(const rbmm::LoadedProgram &lp, const std::string &entry, const std::string &args, bool all,
                       bool check, uint64_t limit, const rbmm::RuntimeConfig &cfg, std::string *output) {
  rbmm::VmOptions opts;
  opts.runtime = cfg;
  opts.all_solutions = all;
  opts.check_safety = check;
  opts.step_limit = limit;
  int e = proc_or_throw(lp.prog, entry);
  auto res = rbmm::run_program(lp.prog, lp.ann, e, rbmm::parse_arg_terms(args), opts);
  if (output) *output = res.output;
  return res.stats;
}

std::string bench_table(const std::vector<BenchRow> &rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-14s %10s %8s %14s %10s %10s %8s\n", "program", "regions", "max", "words", "max",
                "slr", "saving");
  out += line;
  for (const auto &r : rows) {
    const auto &s = r.stats;
    std::snprintf(line, sizeof line, "%-14s %10llu %8llu %14llu %10llu %10llu %7.2f%%\n", r.name.c_str(),
                  static_cast<unsigned long long>(s.regions_total), static_cast<unsigned long long>(s.regions_max),
                  static_cast<unsigned long long>(s.words_total), static_cast<unsigned long long>(s.words_max),
                  static_cast<unsigned long long>(s.slr), 100.0 * s.saving());
    out += line;
  }
  return out;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Region-based memory management for a small logic language"};
  app.require_subcommand(1);

  int page_size = rbmm::kDefaultPageSize;
  if (const char *env = std::getenv("RBMM_PAGE_SIZE")) {
    try {
      page_size = std::stoi(env);
    } catch (const std::exception &) {
      std::cerr << "rbmm: bad RBMM_PAGE_SIZE\n";
      return kUsage;
    }
  }
  int page_block = rbmm::kDefaultPageBlock;
  app.add_option("--page-size", page_size, "Page size in words");
  app.add_option("--page-block", page_block, "Pages obtained per request");

  std::string file;
  std::string dump_tg, dump_rptg, dump_liveness;
  bool dump_classes = false;
  auto *analyze = app.add_subcommand("analyze", "Run the analyses and print their results");
  analyze->add_option("file", file, "Program")->required();
  analyze->add_option("--dump-tg", dump_tg, "Type graph of TYPE");
  analyze->add_option("--dump-rptg", dump_rptg, "Region points-to graph of PROC");
  analyze->add_option("--dump-liveness", dump_liveness, "Liveness rows of PROC");
  analyze->add_flag("--dump-classes", dump_classes, "Region classification of every procedure");

  bool dump = false;
  std::string out_path;
  auto *transform = app.add_subcommand("transform", "Insert region instructions");
  transform->add_option("file", file, "Program")->required();
  transform->add_flag("--dump", dump, "Write FILE.annot");
  transform->add_option("-o,--output", out_path, "Output path for --dump");

  RunArgs ra;
  auto *run = app.add_subcommand("run", "Execute a program with region-based memory");
  run->add_option("file", ra.file, "Program (.rl or .annot)")->required();
  run->add_option("--entry", ra.entry, "Entry procedure");
  run->add_option("--args", ra.args, "Input arguments");
  run->add_flag("--all", ra.all, "Enumerate all solutions");
  run->add_flag("--check-safety", ra.check_safety, "Check every region instruction");
  run->add_option("--step-limit", ra.step_limit, "Abort after N steps");
  run->add_option("--report", ra.report, "Report format")->check(CLI::IsMember({"text", "json", "none"}));
  bool reference = false;
  run->add_flag("--reference", reference, "Use the region-free reference interpreter");

  std::string manifest;
  std::string bench_report = "text";
  auto *bench = app.add_subcommand("bench", "Run the corpus and print a summary table");
  bench->add_option("--manifest", manifest, "Corpus manifest (JSON)");
  bench->add_option("--report", bench_report, "Summary format")->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  std::string current = file;
  try {
    auto cfg = runtime_config(page_size, page_block);
    if (*analyze) {
      std::string text = read_file(file);
      rbmm::Program prog = rbmm::load_program(text);
      rbmm::Analysis a = rbmm::analyze_program(prog);
      bool any = false;
      if (!dump_tg.empty()) {
        if (!prog.types.contains(dump_tg)) throw IoError("no type " + dump_tg);
        std::cout << rbmm::dump_type_graph(rbmm::build_type_graph(prog.types, dump_tg));
        any = true;
      }
      if (!dump_rptg.empty()) {
        std::cout << rbmm::dump_rptg(prog, a.pt, proc_or_throw(prog, dump_rptg));
        any = true;
      }
      if (!dump_liveness.empty()) {
        std::cout << rbmm::dump_liveness(prog, a, proc_or_throw(prog, dump_liveness));
        any = true;
      }
      if (dump_classes || !any) std::cout << rbmm::dump_classes(prog, a);
      return kOk;
    }
    if (*transform) {
      auto lp = load(file);
      std::string text = rbmm::emit_annotated(lp.prog, lp.ann);
      if (dump) {
        std::string path = out_path.empty() ? file + ".annot" : out_path;
        write_file(path, text);
        std::cerr << "wrote " << path << "\n";
      } else {
        std::cout << text;
      }
      return kOk;
    }
    if (*run) {
      current = ra.file;
      auto fmt = ra.report == "json" ? rbmm::ReportFormat::Json : rbmm::ReportFormat::Text;
      if (reference) {
        std::string text = read_file(ra.file);
        rbmm::Program prog = rbmm::load_program(text, {is_annotated(ra.file)});
        auto res = rbmm::run_reference(prog, proc_or_throw(prog, ra.entry), rbmm::parse_arg_terms(ra.args), ra.all,
                                       ra.step_limit);
        std::cout << res.output;
        if (ra.report != "none") std::cout << "solutions: " << res.solutions << "\nwords_total: " << res.words_total << "\n";
        return kOk;
      }
      auto lp = load(ra.file);
      std::string output;
      auto stats = run_one(lp, ra.entry, ra.args, ra.all, ra.check_safety, ra.step_limit, cfg, &output);
      std::cout << output;
      if (ra.report != "none")
        std::cout << rbmm::render_report({fs::path(ra.file).filename().string(), ra.entry, stats}, fmt);
      return kOk;
    }
    if (*bench) {
      fs::path mpath = manifest.empty() ? fs::path(RBMM_CORPUS_DIR) / "manifest.json" : fs::path(manifest);
      current = mpath.string();
      auto m = nlohmann::json::parse(read_file(mpath.string()));
      std::vector<BenchRow> rows;
      nlohmann::ordered_json js = nlohmann::ordered_json::array();
      for (const auto &item : m) {
        std::string name = item.at("name");
        current = (mpath.parent_path() / item.at("file").get<std::string>()).string();
        auto lp = load(current);
        auto stats = run_one(lp, item.value("entry", "main"), item.value("args", ""), item.value("all", false), false,
                             0, cfg, nullptr);
        rows.push_back({name, stats});
        js.push_back(nlohmann::ordered_json::parse(
            rbmm::render_report({name, item.value("entry", "main"), stats}, rbmm::ReportFormat::Json)));
      }
      if (bench_report == "json")
        std::cout << js.dump(2) << "\n";
      else
        std::cout << bench_table(rows);
      return kOk;
    }
  } catch (const IoError &e) {
    std::cerr << "rbmm: " << e.what() << "\n";
    return kUsage;
  } catch (const rbmm::Error &e) {
    std::cerr << e.format(current) << "\n";
    return e.kind() == rbmm::Error::Kind::Usage ? kUsage : kAnalysis;
  } catch (const rbmm::SafetyViolation &e) {
    std::cerr << "rbmm: safety violation: " << e.what() << "\n";
    return kSafety;
  } catch (const rbmm::StepLimitExceeded &e) {
    std::cerr << "rbmm: " << e.what() << "\n";
    return kUsage;
  } catch (const rbmm::RuntimeError &e) {
    std::cerr << "rbmm: runtime error: " << e.what() << "\n";
    return kUsage;
  } catch (const nlohmann::json::exception &e) {
    std::cerr << "rbmm: " << current << ": " << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}
