#include <sys/stat.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "chcv/backend.hpp"
#include "doctest.h"
#include "smt2_check.hpp"
#include "support.hpp"

using namespace chcv;
using namespace chcv::testing;

namespace {

// Executable shell script standing in for a solver.
std::string fake_solver(const std::string& name, const std::string& body) {
  auto dir = std::filesystem::temp_directory_path() / "chcv-fake-solvers";
  std::filesystem::create_directories(dir);
  auto path = (dir / name).string();
  std::ofstream(path) << "#!/bin/sh\n" << body << "\n";
  ::chmod(path.c_str(), 0755);
  return path;
}

ChcSystem fold_map() { return encode_program(lower(parse_file(corpus_path("fold-map")))).system; }

}  // namespace

TEST_CASE("exit codes follow the verdict") {
  CHECK(exit_code(Outcome::Safe) == 0);
  CHECK(exit_code(Outcome::Unsafe) == 1);
  CHECK(exit_code(Outcome::Unknown) == 2);
  CHECK(outcome_name(Outcome::Unsafe) == "UNSAFE");
}

TEST_CASE("solver answers: sat is SAFE, unsat is UNSAFE") {
  CHECK(interpret_output("sat\n(model)\n").outcome == Outcome::Safe);
  CHECK(interpret_output("sat\n(model)\n").model.find("(model)") != std::string::npos);
  CHECK(interpret_output("\nunsat\n").outcome == Outcome::Unsafe);
  CHECK(interpret_output("unknown\n").outcome == Outcome::Unknown);
  Verdict junk = interpret_output("(error \"line 1\")\n");
  CHECK(junk.outcome == Outcome::Unknown);
  CHECK(junk.reason.find("unexpected") != std::string::npos);
  CHECK(interpret_output("").outcome == Outcome::Unknown);
}

TEST_CASE("emitted script is well formed and quotes relation names") {
  std::string smt = emit_smt2(fold_map());
  Smt2Check c = check_smt2(smt);
  CHECK_MESSAGE(c.ok, c.error);
  CHECK(c.declarations == 2);
  CHECK(c.asserts == 5);
  CHECK(smt.find("(declare-fun |foldl#") != std::string::npos);
  CHECK(smt.find("=> (and") != std::string::npos);
  CHECK(smt.ends_with("(check-sat)\n(get-model)\n"));
}

TEST_CASE("well-formedness checker rejects broken scripts") {
  CHECK_FALSE(check_smt2("(set-logic HORN)\n(assert (forall ((x Int)) x)\n(check-sat)\n").ok);
  CHECK_FALSE(check_smt2("(assert true)\n(check-sat)\n").ok);
  CHECK_FALSE(check_smt2("(set-logic HORN)\n(echo \"x\")\n(check-sat)\n").ok);
}

TEST_CASE("emission is deterministic") {
  CHECK(emit_smt2(fold_map()) == emit_smt2(fold_map()));
}

TEST_CASE("engine flags") {
  SolverConfig cfg;
  cfg.portfolio = false;
  CHECK(engine_flags(cfg) == std::vector<std::vector<std::string>>{{"fp.engine=spacer"}});
  cfg.engine = SolverConfig::Engine::Default;
  CHECK(engine_flags(cfg) == std::vector<std::vector<std::string>>{{}});
  cfg = SolverConfig{};
  CHECK(engine_flags(cfg).size() > 1);
  for (const auto& f : engine_flags(cfg)) CHECK(f.front() == "fp.engine=spacer");
}

TEST_CASE("missing solver is a configuration error") {
  SolverConfig cfg;
  cfg.executable = "definitely-not-a-solver-xyz";
  CHECK_THROWS_AS(solve(fold_map(), cfg), SolverConfigError);
  CHECK_FALSE(find_executable("definitely-not-a-solver-xyz"));
  cfg.executable = "z3";
  cfg.timeout_s = 0;
  CHECK_THROWS_AS(solve(fold_map(), cfg), SolverConfigError);
}

TEST_CASE("fake solvers: answer, arguments, timeout") {
  SolverConfig cfg;
  cfg.portfolio = false;
  cfg.executable = fake_solver("answers-sat", "echo sat; echo '(model)'");
  Verdict v = solve(fold_map(), cfg);
  CHECK(v.outcome == Outcome::Safe);
  CHECK(v.smt2_file.empty());

  auto args_file = (std::filesystem::temp_directory_path() / "chcv-fake-solvers" / "args.txt").string();
  cfg.executable = fake_solver("records-args", "echo \"$@\" > " + args_file + "; echo unsat");
  cfg.keep_files = true;
  v = solve(fold_map(), cfg);
  CHECK(v.outcome == Outcome::Unsafe);
  REQUIRE_FALSE(v.smt2_file.empty());
  CHECK(slurp(args_file) == "fp.engine=spacer " + v.smt2_file + "\n");
  CHECK(check_smt2(slurp(v.smt2_file)).ok);
  std::filesystem::remove(v.smt2_file);

  cfg.keep_files = false;
  cfg.executable = fake_solver("hangs", "exec sleep 30");
  cfg.timeout_s = 0.3;
  auto t0 = std::chrono::steady_clock::now();
  v = solve(fold_map(), cfg);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(v.outcome == Outcome::Unknown);
  CHECK(v.reason.find("timeout") != std::string::npos);
  CHECK(secs < 5.0);
}

TEST_CASE("portfolio takes the first definite answer") {
  SolverConfig cfg;
  // Only the run with the iuc option answers; the others hang.
  cfg.executable = fake_solver("picky", "case \"$*\" in *iuc=0*) echo sat;; *) exec sleep 30;; esac");
  cfg.timeout_s = 10;
  auto t0 = std::chrono::steady_clock::now();
  Verdict v = solve(fold_map(), cfg);
  CHECK(v.outcome == Outcome::Safe);
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 5.0);
}

TEST_CASE("script path can be chosen") {
  SolverConfig cfg;
  cfg.portfolio = false;
  cfg.executable = fake_solver("answers-unknown", "echo unknown");
  cfg.smt2_path = (std::filesystem::temp_directory_path() / "chcv-fixed.smt2").string();
  Verdict v = solve(fold_map(), cfg);
  CHECK(v.outcome == Outcome::Unknown);
  CHECK(v.smt2_file == cfg.smt2_path);
  CHECK(std::filesystem::exists(cfg.smt2_path));
  std::filesystem::remove(cfg.smt2_path);
}
