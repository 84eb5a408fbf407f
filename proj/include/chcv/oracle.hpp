#pragma once

#include <cstdint>
#include <string>

#include "chcv/core.hpp"

namespace chcv {

struct OracleConfig {
  int k = 4;   // maximal list length
  int b = 4;   // integers range over [-b, b]
  int d = 16;  // recursion depth cap
  std::uint64_t max_runs = 20'000'000;

  /// Throws std::invalid_argument on negative bounds or d < 1.
  void validate() const;
};

struct OracleResult {
  enum class Kind { Violation, NoViolation, DepthExceeded };
  Kind kind = Kind::NoViolation;
  std::string witness;
  std::string message;
  std::uint64_t runs = 0;
  bool truncated = false;  // stopped at max_runs
};

std::string_view oracle_kind_name(OracleResult::Kind k);

/// Exhaustively runs the concrete interpreter over all symbolic inputs within the bounds.
/// List elements are enumerated only once they are observed.
OracleResult run_oracle(const Program& program, const OracleConfig& cfg);

}  // namespace chcv
