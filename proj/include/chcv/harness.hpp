#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chcv/backend.hpp"
#include "chcv/core.hpp"
#include "chcv/encoder.hpp"
#include "chcv/oracle.hpp"

namespace chcv {

struct PipelineOptions {
  bool sync = true;
  bool solve = true;
  SolverConfig solver;
};

struct PipelineReport {
  std::string file;
  bool parse_only = false;  // no verify directive
  Program program;
  EncodedProgram encoded;   // before synchronization
  ChcSystem final_system;
  std::vector<std::string> warnings;
  std::optional<Verdict> verdict;
  double frontend_ms = 0, encode_ms = 0, sync_ms = 0;
};

/// parse -> lower -> encode -> sync -> solve. Throws SourceError / SolverConfigError on tool errors.
PipelineReport verify_file(const std::string& path, const PipelineOptions& opts);
PipelineReport verify_source(const std::string& text, const std::string& file, const PipelineOptions& opts);

struct BenchmarkEntry {
  std::string name;
  std::string path;
  Outcome expected = Outcome::Safe;
  std::string category;
};

/// `*.chl` files of `dir` sorted by name. A `-e` suffix marks an expected violation; the category
/// comes from a `; category: ...` header line.
std::vector<BenchmarkEntry> load_corpus(const std::string& dir);

extern const std::vector<std::string> kCategories;

struct BenchRow {
  BenchmarkEntry entry;
  Outcome verdict = Outcome::Unknown;
  std::string oracle;  // oracle result name, empty when skipped
  bool oracle_agrees = true;
  double time_ms = 0;
  std::string error;

  bool matches() const { return verdict == entry.expected && oracle_agrees && error.empty(); }
};

struct BenchOptions {
  PipelineOptions pipeline;
  bool run_oracle = true;
  OracleConfig oracle;
  unsigned jobs = 0;  // 0: hardware concurrency
};

struct BenchReport {
  std::vector<BenchRow> rows;
  bool ok() const;
};

BenchRow bench_entry(const BenchmarkEntry& entry, const BenchOptions& opts);
BenchReport bench(const std::vector<BenchmarkEntry>& entries, const BenchOptions& opts);

std::string bench_table(const BenchReport& report);
/// Array of {name, expected, verdict, oracle, time_ms}.
std::string bench_json(const BenchReport& report);

}  // namespace chcv
