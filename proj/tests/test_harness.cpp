#include <sys/stat.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "chcv/harness.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

using namespace chcv;
using namespace chcv::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("chcv-test-" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string always(const std::string& answer) {
  fs::path p = fs::temp_directory_path() / ("chcv-always-" + answer);
  std::ofstream(p) << "#!/bin/sh\necho " << answer << "\n";
  ::chmod(p.c_str(), 0755);
  return p.string();
}

struct Cli {
  int code;
  std::string out, err;
};

Cli cli(const std::string& args) {
  fs::path dir = fs::temp_directory_path();
  std::string out = (dir / "chcv-cli.out").string(), err = (dir / "chcv-cli.err").string();
  int rc = std::system((std::string(CHCV_CLI) + " " + args + " >" + out + " 2>" + err).c_str());
  return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, slurp(out), slurp(err)};
}

std::string trimmed(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
  return s;
}

}  // namespace

TEST_CASE("shipped corpus: size, labels and categories") {
  auto entries = load_corpus(CHCV_CORPUS_DIR);
  CHECK(entries.size() >= 16);
  std::map<std::string, int> per_category;
  for (const auto& e : entries) {
    CAPTURE(e.name);
    CHECK(std::count(kCategories.begin(), kCategories.end(), e.category) == 1);
    CHECK((e.expected == Outcome::Unsafe) == e.name.ends_with("-e"));
    ++per_category[e.category];
  }
  CHECK(per_category.size() == 4);
  for (const char* name : {"div-jumps", "fold-append", "fold-eq", "fold-eq-minus", "fold-map-abs", "heads-sum", "length-append",
                           "lucas-vs-fib", "map-fold", "mod-div-mult", "mutual-recursion", "power-monotone", "single-fold", "sorted",
                           "fold-map", "fold-map-e", "mutual-recursion-e"})
    CHECK(fs::exists(corpus_path(name)));
}

TEST_CASE("empty corpus gives an empty passing report") {
  auto dir = scratch_dir("empty");
  BenchReport rep = bench(load_corpus(dir.string()), {});
  CHECK(rep.rows.empty());
  CHECK(rep.ok());
  CHECK(bench_json(rep) == "[]\n");
  CHECK(bench_table(rep).find("0 benchmark(s), 0 mismatch(es)") != std::string::npos);
}

TEST_CASE("mislabeled entry is flagged") {
  auto dir = scratch_dir("mislabeled");
  fs::copy_file(corpus_path("fold-map-e"), dir / "fold-map-e.chl");
  fs::copy_file(corpus_path("fold-map-e"), dir / "relabeled.chl");
  BenchOptions opts;
  opts.pipeline.solver.executable = always("unsat");
  BenchReport rep = bench(load_corpus(dir.string()), opts);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].matches());
  CHECK_FALSE(rep.rows[1].matches());
  CHECK(rep.rows[1].oracle_agrees);  // the oracle sees the same bug the solver does
  CHECK_FALSE(rep.ok());
  CHECK(bench_table(rep).find("MISMATCH") != std::string::npos);
}

TEST_CASE("oracle disagreement with a SAFE verdict is flagged") {
  auto dir = scratch_dir("oracle");
  fs::copy_file(corpus_path("fold-map-e"), dir / "bogus.chl");
  BenchOptions opts;
  opts.pipeline.solver.executable = always("sat");
  BenchReport rep = bench(load_corpus(dir.string()), opts);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].verdict == Outcome::Safe);
  CHECK_FALSE(rep.rows[0].oracle_agrees);
  CHECK_FALSE(rep.ok());
}

TEST_CASE("missing solver makes every entry UNKNOWN") {
  auto dir = scratch_dir("nosolver");
  fs::copy_file(corpus_path("fold-map"), dir / "fold-map.chl");
  fs::copy_file(corpus_path("fold-eq"), dir / "fold-eq.chl");
  BenchOptions opts;
  opts.pipeline.solver.executable = "definitely-not-a-solver-xyz";
  opts.run_oracle = false;
  BenchReport rep = bench(load_corpus(dir.string()), opts);
  for (const auto& r : rep.rows) CHECK(r.verdict == Outcome::Unknown);
  CHECK_FALSE(rep.ok());
}

TEST_CASE("JSON report schema") {
  auto dir = scratch_dir("json");
  fs::copy_file(corpus_path("fold-map"), dir / "fold-map.chl");
  BenchOptions opts;
  opts.pipeline.solver.executable = always("sat");
  auto j = nlohmann::json::parse(bench_json(bench(load_corpus(dir.string()), opts)));
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 1);
  CHECK(j[0]["name"] == "fold-map");
  CHECK(j[0]["expected"] == "SAFE");
  CHECK(j[0]["verdict"] == "SAFE");
  CHECK(j[0]["oracle"] == "NO-VIOLATION-UP-TO-BOUND");
  CHECK(j[0]["time_ms"].is_number());
}

TEST_CASE("golden clause systems for fold-map") {
  PipelineOptions opts;
  opts.solve = false;
  PipelineReport r = verify_file(corpus_path("fold-map"), opts);
  CHECK(trimmed(to_text(r.encoded.system)) == trimmed(slurp(std::string(CHCV_GOLDEN_DIR) + "/fold-map.pre.chc")));
  CHECK(trimmed(to_text(r.final_system)) == trimmed(slurp(std::string(CHCV_GOLDEN_DIR) + "/fold-map.post.chc")));
}

TEST_CASE("cli: exit codes and diagnostics") {
  auto dir = scratch_dir("cli");
  std::ofstream(dir / "broken.chl") << "(define (f x)\n  (+ x y))\n(verify (= (f 1) 1))\n";
  std::ofstream(dir / "plain.chl") << "(define (f x) (+ x 1))\n";

  Cli broken = cli((dir / "broken.chl").string());
  CHECK(broken.code == 3);  // missing subcommand
  broken = cli("run " + (dir / "broken.chl").string());
  CHECK(broken.code == 3);
  CHECK(broken.err.find("broken.chl:2:8:") != std::string::npos);

  Cli plain = cli("run " + (dir / "plain.chl").string());
  CHECK(plain.code == 0);
  CHECK(plain.out.find("no verify directive") != std::string::npos);

  CHECK(cli("run " + (dir / "missing.chl").string()).code == 3);
  CHECK(cli("run " + corpus_path("fold-map") + " --solver definitely-not-a-solver-xyz").code == 3);
  CHECK(cli("run " + corpus_path("fold-map") + " --solver " + always("sat")).code == 0);
  CHECK(cli("run " + corpus_path("fold-map") + " --solver " + always("unsat")).code == 1);
  CHECK(cli("run " + corpus_path("fold-map") + " --solver " + always("unknown")).code == 2);

  Cli oracle = cli("oracle " + corpus_path("mutual-recursion-e"));
  CHECK(oracle.code == 1);
  CHECK(oracle.out.find("VIOLATION") == 0);
  CHECK(cli("oracle " + corpus_path("fold-map") + " --k 2 --b 2").code == 0);
  CHECK(cli("oracle " + corpus_path("fold-map") + " --d 0").code == 3);

  auto empty = scratch_dir("cli-empty");
  Cli json = cli("bench " + empty.string() + " --json");
  CHECK(json.code == 0);
  CHECK(trimmed(json.out) == "[]");
}

TEST_CASE("cli: emitted systems match the golden files") {
  std::string sat = " --solver " + always("sat");
  Cli pre = cli("run " + corpus_path("fold-map") + " --emit-chc=pre" + sat);
  CHECK(pre.out.find(trimmed(slurp(std::string(CHCV_GOLDEN_DIR) + "/fold-map.pre.chc"))) == 0);
  Cli post = cli("run " + corpus_path("fold-map") + " --emit-chc" + sat);
  CHECK(post.out.find(trimmed(slurp(std::string(CHCV_GOLDEN_DIR) + "/fold-map.post.chc"))) == 0);
  CHECK(post.out.find("clauses: 5 -> 3") != std::string::npos);
  Cli nosync = cli("run " + corpus_path("fold-map") + " --no-sync --emit-chc" + sat);
  CHECK(nosync.out.find(trimmed(slurp(std::string(CHCV_GOLDEN_DIR) + "/fold-map.pre.chc"))) == 0);
}
