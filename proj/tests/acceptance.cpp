// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "chcv/harness.hpp"
#include "properties.hpp"
#include "smt2_check.hpp"
#include "support.hpp"

using namespace chcv;
using namespace chcv::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Line {
  bool pass = true;
  std::ostringstream detail;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double ms_since(Clock::time_point t) { return std::chrono::duration<double, std::milli>(Clock::now() - t).count(); }

bool have_solver() { return find_executable("z3").has_value(); }

int failures = 0;

void report(int id, const std::function<void(Line&)>& body) {
  Line l;
  try {
    body(l);
  } catch (const std::exception& e) {
    l.pass = false;
    l.detail << " [exception: " << e.what() << "]";
  }
  if (!l.pass) ++failures;
  std::printf("criterion %d: %s%s\n", id, l.pass ? "PASS" : "FAIL", l.detail.str().c_str());
  std::fflush(stdout);
}

void criterion1(Line& l) {
  auto t = Clock::now();
  EncodedProgram ep = encode_program(lower(parse_file(corpus_path("fold-map"))));
  double ms = ms_since(t);
  const ChcSystem& s = ep.system;
  l.require(isomorphic(s, fold_map_unsynced()), "isomorphic to the reference system");
  l.require(s.relations.size() == 2, "two relations");
  for (const auto& r : s.relations) l.require(r.arity() == 3 && r.iterator.has_value(), r.name + " is a fold of arity 3");
  l.require(s.clauses.size() == 5, "five clauses");
  std::string q = to_text(*s.query());
  l.require(q.find(">= 0") != std::string::npos, "length is non-negative in the query");
  l.require(q.find("!=") != std::string::npos, "negated equality in the query");
  l.require(ms < 1000, "encoding under 1s");
  l.detail << " fold-map: " << s.relations.size() << " relations, " << s.clauses.size() << " clauses, " << ms << " ms";
}

void criterion2(Line& l) {
  EncodedProgram ep = encode_program(lower(parse_file(corpus_path("fold-map"))));
  auto t = Clock::now();
  ChcSystem s = apply_all(ep.system);
  double ms = ms_since(t);
  l.require(s.relations.size() == 1 && s.relations[0].arity() == 6, "one product relation of arity 6");
  l.require(s.clauses.size() == 3, "three clauses");
  bool hd_eq = false;
  for (const auto& c : s.clauses) hd_eq = hd_eq || to_text(c).find("hd1 = hd2") != std::string::npos;
  l.require(hd_eq, "step clause equates the two heads");
  l.require(isomorphic(s, fold_map_synced()), "isomorphic to the reference product");
  l.require(ms < 1000, "synchronization under 1s");
  l.detail << " product arity " << (s.relations.empty() ? 0 : s.relations[0].arity()) << ", " << s.clauses.size() << " clauses, "
           << ms << " ms";
}

void criterion3(Line& l) {
  auto entries = load_corpus(CHCV_CORPUS_DIR);
  l.require(entries.size() >= 16, "at least 16 benchmarks");
  if (!have_solver()) {
    std::size_t scripts = 0;
    for (const auto& e : entries) {
      PipelineOptions opts;
      opts.solve = false;
      PipelineReport r = verify_file(e.path, opts);
      Smt2Check c = check_smt2(emit_smt2(r.final_system));
      l.require(c.ok, e.name + ": " + c.error);
      ++scripts;
    }
    l.detail << " no solver on PATH: " << scripts << " script(s) checked structurally";
    return;
  }
  BenchOptions opts;
  opts.run_oracle = false;
  BenchReport rep = bench(entries, opts);
  std::size_t mismatches = 0;
  double worst = 0;
  for (const auto& r : rep.rows) {
    if (!r.matches()) {
      ++mismatches;
      l.require(false, r.entry.name + " expected " + std::string(outcome_name(r.entry.expected)) + " got " +
                           std::string(outcome_name(r.verdict)) + (r.error.empty() ? "" : " (" + r.error + ")"));
    }
    l.require(r.time_ms < 30000, r.entry.name + " under 30s");
    worst = std::max(worst, r.time_ms);
  }
  std::map<std::string, Outcome> by_name;
  for (const auto& r : rep.rows) by_name[r.entry.name] = r.verdict;
  l.require(by_name["fold-map"] == Outcome::Safe, "fold-map SAFE");
  l.require(by_name["map-fold"] == Outcome::Safe, "map-fold SAFE");
  l.require(by_name["fold-map-e"] == Outcome::Unsafe, "fold-map-e UNSAFE");
  l.detail << " " << rep.rows.size() << " benchmarks, " << mismatches << " mismatches, slowest " << worst << " ms";
}

void criterion4(Line& l) {
  PipelineOptions on, off;
  off.sync = false;
  if (!have_solver()) {
    on.solve = off.solve = false;
    PipelineReport a = verify_file(corpus_path("fold-map"), off), b = verify_file(corpus_path("fold-map"), on);
    l.require(a.final_system.query()->atoms.size() == 2, "unsynchronized query keeps two atoms");
    l.require(b.final_system.query()->atoms.size() == 1, "synchronized query has one product atom");
    l.detail << " no solver on PATH: structural comparison only";
    return;
  }
  PipelineReport a = verify_file(corpus_path("fold-map"), off), b = verify_file(corpus_path("fold-map"), on);
  l.require(a.verdict && a.verdict->outcome != Outcome::Safe, "fold-map without synchronization is not SAFE");
  l.require(b.verdict && b.verdict->outcome == Outcome::Safe, "fold-map with synchronization is SAFE");
  l.detail << " without: " << (a.verdict ? outcome_name(a.verdict->outcome) : "none")
           << ", with: " << (b.verdict ? outcome_name(b.verdict->outcome) : "none");
}

void criterion5(Line& l) {
  auto t = Clock::now();
  auto entries = load_corpus(CHCV_CORPUS_DIR);
  std::size_t checked = 0;
  auto absorb = [&](const std::string& name, const PropertyResult& r) {
    checked += r.checked;
    for (const auto& f : r.failures) l.require(false, name + ": " + f);
  };
  OracleConfig cfg;
  cfg.k = 4;
  cfg.b = 4;
  absorb("oracle", oracle_agreement(entries, cfg));
  for (const auto& e : entries) absorb("soundness", symexec_bounded_soundness(lower(parse_file(e.path)), 4));
  absorb("determinism", emit_determinism(entries));
  absorb("polarity", polarity());
  absorb("sources", source_ids());
  double ms = ms_since(t);
  l.require(ms < 120000, "property suite under 2 min");
  l.detail << " " << checked << " checks, " << ms << " ms";
}

}  // namespace

int main() {
  report(1, criterion1);
  report(2, criterion2);
  report(3, criterion3);
  report(4, criterion4);
  report(5, criterion5);
  std::printf("criterion 6: EXCLUDED (not reproducible)\n");
  return failures == 0 ? 0 : 1;
}
