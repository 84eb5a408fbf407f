#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chcv/chc.hpp"

namespace chcv {

enum class Outcome { Safe, Unsafe, Unknown };

std::string_view outcome_name(Outcome o);
/// 0 SAFE, 1 UNSAFE, 2 UNKNOWN.
int exit_code(Outcome o);

struct SolverConfig {
  enum class Engine { Spacer, Default };
  std::string executable = "z3";
  Engine engine = Engine::Spacer;
  bool portfolio = true;  // spacer only: race a few option sets, first definite answer wins
  double timeout_s = 30.0;
  bool keep_files = false;
  std::string smt2_path;  // write the script here instead of a temporary file
};

struct Verdict {
  Outcome outcome = Outcome::Unknown;
  std::string model;  // solver model text, SAFE only
  double seconds = 0.0;
  std::string raw;    // complete solver output
  std::string reason; // why the answer is UNKNOWN
  std::string smt2_file;
};

class SolverConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// SMT-LIB2 HORN script: one declaration per relation and one quantified implication per clause.
std::string emit_smt2(const ChcSystem& sys);

/// Resolves a solver name against PATH; nullopt when it is not executable.
std::optional<std::string> find_executable(const std::string& name);

/// Flag sets for the solver invocations of one solve call.
std::vector<std::vector<std::string>> engine_flags(const SolverConfig& cfg);

/// Runs the solver as `<exe> [engine flags] <file>`. Throws SolverConfigError if the executable is missing.
Verdict solve(const ChcSystem& sys, const SolverConfig& cfg);

/// Interprets solver output: satisfiable means SAFE.
Verdict interpret_output(const std::string& out);

}  // namespace chcv
