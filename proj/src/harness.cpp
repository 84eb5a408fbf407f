#include "chcv/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "chcv/frontend.hpp"
#include "chcv/sync.hpp"

namespace chcv {

const std::vector<std::string> kCategories = {"nonlinear-via-recursion", "mutation", "higher-order", "multi-traversal-list"};

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

PipelineReport verify_source(const std::string& text, const std::string& file, const PipelineOptions& opts) {
  PipelineReport r;
  r.file = file;
  auto t0 = std::chrono::steady_clock::now();
  SurfaceProgram sp = parse(text, file);
  r.program = lower(sp);
  r.frontend_ms = ms_since(t0);
  if (!r.program.has_verify) {
    r.parse_only = true;
    return r;
  }
  t0 = std::chrono::steady_clock::now();
  r.encoded = encode_program(r.program);
  r.encode_ms = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  r.final_system = opts.sync ? apply_all(r.encoded.system, &r.warnings) : r.encoded.system;
  r.sync_ms = ms_since(t0);
  if (opts.solve) r.verdict = solve(r.final_system, opts.solver);
  return r;
}

PipelineReport verify_file(const std::string& path, const PipelineOptions& opts) {
  return verify_source(read_file(path), path, opts);
}

std::vector<BenchmarkEntry> load_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<BenchmarkEntry> out;
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
  for (const auto& de : fs::directory_iterator(dir)) {
    if (!de.is_regular_file() || de.path().extension() != ".chl") continue;
    BenchmarkEntry e;
    e.path = de.path().string();
    e.name = de.path().stem().string();
    bool buggy = e.name.size() > 2 && e.name.compare(e.name.size() - 2, 2, "-e") == 0;
    e.expected = buggy ? Outcome::Unsafe : Outcome::Safe;
    std::ifstream in(e.path);
    std::string line;
    while (std::getline(in, line)) {
      auto pos = line.find("; category:");
      if (pos == std::string::npos) continue;
      std::string c = line.substr(pos + 11);
      c.erase(0, c.find_first_not_of(" \t"));
      c.erase(c.find_last_not_of(" \t\r") + 1);
      e.category = c;
      break;
    }
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

bool BenchReport::ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.matches(); });
}

BenchRow bench_entry(const BenchmarkEntry& entry, const BenchOptions& opts) {
  BenchRow row;
  row.entry = entry;
  auto t0 = std::chrono::steady_clock::now();
  try {
    PipelineReport rep = verify_file(entry.path, opts.pipeline);
    if (rep.parse_only) row.error = "no verify directive";
    else if (rep.verdict) {
      row.verdict = rep.verdict->outcome;
      if (row.verdict == Outcome::Unknown) row.error = rep.verdict->reason;
    }
    row.time_ms = ms_since(t0);
    if (opts.run_oracle) {
      OracleResult o = run_oracle(rep.program, opts.oracle);
      row.oracle = oracle_kind_name(o.kind);
      bool violation = o.kind == OracleResult::Kind::Violation;
      if (row.verdict == Outcome::Safe && violation) row.oracle_agrees = false;
      if (entry.expected == Outcome::Unsafe && !violation) row.oracle_agrees = false;
    }
  } catch (const std::exception& e) {
    row.error = e.what();
    row.time_ms = ms_since(t0);
  }
  if (!std::count(kCategories.begin(), kCategories.end(), entry.category) && row.error.empty())
    row.error = "unknown category '" + entry.category + "'";
  return row;
}

BenchReport bench(const std::vector<BenchmarkEntry>& entries, const BenchOptions& opts) {
  BenchReport report;
  report.rows.resize(entries.size());
  unsigned jobs = opts.jobs ? opts.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, entries.size())));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < entries.size();) report.rows[i] = bench_entry(entries[i], opts);
    });
  for (auto& th : pool) th.join();
  return report;
}

std::string bench_table(const BenchReport& report) {
  std::ostringstream out;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-24s %-24s %-8s %-8s %-26s %9s  %s\n", "benchmark", "category", "expected", "verdict",
                "oracle", "time(ms)", "status");
  out << buf;
  std::size_t bad = 0;
  for (const auto& r : report.rows) {
    std::string status = r.matches() ? "ok" : "MISMATCH";
    if (!r.error.empty()) status += " (" + r.error + ")";
    else if (!r.oracle_agrees) status += " (oracle disagrees)";
    bad += !r.matches();
    std::snprintf(buf, sizeof buf, "%-24s %-24s %-8s %-8s %-26s %9.1f  %s\n", r.entry.name.c_str(), r.entry.category.c_str(),
                  std::string(outcome_name(r.entry.expected)).c_str(), std::string(outcome_name(r.verdict)).c_str(),
                  r.oracle.empty() ? "-" : r.oracle.c_str(), r.time_ms, status.c_str());
    out << buf;
  }
  out << report.rows.size() << " benchmark(s), " << bad << " mismatch(es)\n";
  return out.str();
}

std::string bench_json(const BenchReport& report) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : report.rows)
    arr.push_back({{"name", r.entry.name},
                   {"expected", outcome_name(r.entry.expected)},
                   {"verdict", outcome_name(r.verdict)},
                   {"oracle", r.oracle.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.oracle)},
                   {"time_ms", r.time_ms}});
  return arr.dump(2) + "\n";
}

}  // namespace chcv
