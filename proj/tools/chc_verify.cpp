// chc-verify: safety verification of .chl programs through constrained Horn clauses.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "chcv/harness.hpp"
#include "chcv/sexpr.hpp"

using namespace chcv;

namespace {

constexpr int kToolError = 3;

int cmd_run(const std::string& file, const PipelineOptions& opts, const std::string& emit, bool dump_summaries) {
  PipelineOptions o = opts;
  PipelineReport r = verify_file(file, o);
  if (r.parse_only) {
    std::cout << file << ": no verify directive, " << r.program.functions.size() << " function(s) parsed\n";
    return 0;
  }
  if (dump_summaries) {
    for (const auto& [rel, sums] : r.encoded.summaries) {
      std::cout << "summaries of " << rel << ":\n";
      for (const auto& s : sums) std::cout << "  " << to_text(s) << "\n";
    }
    std::cout << "\n";
  }
  if (emit == "pre") std::cout << to_text(r.encoded.system) << "\n";
  else if (!emit.empty()) std::cout << to_text(r.final_system) << "\n";
  for (const auto& w : r.warnings) std::cerr << file << ": warning: " << w << "\n";

  const Verdict& v = *r.verdict;
  std::cout << "verdict: " << outcome_name(v.outcome) << "\n";
  if (v.outcome == Outcome::Unknown && !v.reason.empty()) std::cout << "reason: " << v.reason << "\n";
  std::cout << "relations: " << r.encoded.system.relations.size() << " -> " << r.final_system.relations.size() << "\n";
  std::cout << "clauses: " << r.encoded.system.clauses.size() << " -> " << r.final_system.clauses.size() << "\n";
  std::printf("time: frontend %.1f ms, encode %.1f ms, sync %.1f ms, solve %.1f ms\n", r.frontend_ms, r.encode_ms,
              r.sync_ms, v.seconds * 1000.0);
  if (!v.smt2_file.empty() && (opts.solver.keep_files || !opts.solver.smt2_path.empty()))
    std::cout << "smt2: " << v.smt2_file << "\n";
  if (v.outcome == Outcome::Safe && !v.model.empty()) std::cout << "model:\n" << v.model << "\n";
  return exit_code(v.outcome);
}

int cmd_oracle(const std::string& file, const OracleConfig& cfg) {
  cfg.validate();
  Program p = lower(parse_file(file));
  OracleResult res = run_oracle(p, cfg);
  std::cout << oracle_kind_name(res.kind) << "\n";
  if (!res.message.empty()) std::cout << res.message << "\n";
  if (!res.witness.empty()) {
    std::cout << "witness:\n";
    std::istringstream lines(res.witness);
    for (std::string line; std::getline(lines, line);)
      if (!line.empty()) std::cout << "  " << line << "\n";
  }
  std::cout << "runs: " << res.runs << (res.truncated ? " (truncated)" : "") << "\n";
  switch (res.kind) {
    case OracleResult::Kind::NoViolation: return 0;
    case OracleResult::Kind::Violation: return 1;
    default: return 2;
  }
}

int cmd_bench(const std::string& dir, const BenchOptions& opts, bool json) {
  BenchReport rep = bench(load_corpus(dir), opts);
  std::cout << (json ? bench_json(rep) : bench_table(rep));
  return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Horn-clause based safety verifier for .chl programs"};
  app.require_subcommand(1);

  PipelineOptions popts;
  std::string engine = "spacer";
  bool no_portfolio = false;
  auto add_solver_flags = [&](CLI::App* sub) {
    sub->add_option("--solver", popts.solver.executable, "Horn solver executable");
    sub->add_option("--engine", engine, "solver engine")->check(CLI::IsMember({"spacer", "default"}));
    sub->add_option("--timeout", popts.solver.timeout_s, "solver timeout in seconds")->check(CLI::PositiveNumber);
    sub->add_flag("--no-portfolio", no_portfolio, "run a single spacer configuration");
    sub->add_flag("--keep-smt2", popts.solver.keep_files, "keep the generated .smt2 file");
  };

  std::string file, emit;
  bool no_sync = false, dump_summaries = false;
  auto* run = app.add_subcommand("run", "verify a program");
  run->add_option("FILE", file, "program")->required();
  run->add_flag("--no-sync", no_sync, "skip synchronization");
  run->add_option("--emit-chc", emit, "print the clause system (post-sync, or =pre)")
      ->expected(0, 1)
      ->default_str("post")
      ->check(CLI::IsMember({"pre", "post"}));
  run->add_flag("--dump-summaries", dump_summaries, "print symbolic-execution summaries");
  run->add_option("--dump-smt2", popts.solver.smt2_path, "write the SMT-LIB2 script to PATH");
  add_solver_flags(run);

  OracleConfig ocfg;
  auto* orc = app.add_subcommand("oracle", "bounded brute-force check");
  orc->add_option("FILE", file, "program")->required();
  orc->add_option("--k", ocfg.k, "max list length");
  orc->add_option("--b", ocfg.b, "integer bound");
  orc->add_option("--d", ocfg.d, "max recursion depth");

  std::string dir;
  bool json = false, no_oracle = false;
  unsigned jobs = 0;
  auto* ben = app.add_subcommand("bench", "run a benchmark corpus");
  ben->add_option("DIR", dir, "corpus directory")->required();
  ben->add_flag("--json", json, "JSON report");
  ben->add_flag("--no-oracle", no_oracle, "skip the oracle cross-check");
  ben->add_option("--jobs", jobs, "parallel entries (0: all cores)");
  add_solver_flags(ben);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kToolError;
  }
  popts.solver.engine = engine == "default" ? SolverConfig::Engine::Default : SolverConfig::Engine::Spacer;
  popts.sync = !no_sync;
  popts.solver.portfolio = !no_portfolio;
  if (run->parsed() && run->count("--emit-chc") && emit.empty()) emit = "post";

  try {
    if (run->parsed()) return cmd_run(file, popts, emit, dump_summaries);
    if (orc->parsed()) return cmd_oracle(file, ocfg);
    BenchOptions bopts;
    bopts.pipeline = popts;
    bopts.run_oracle = !no_oracle;
    bopts.jobs = jobs;
    return cmd_bench(dir, bopts, json);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kToolError;
  }
}
