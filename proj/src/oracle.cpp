#include "chcv/oracle.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

#include "chcv/interp.hpp"

namespace chcv {

void OracleConfig::validate() const {
  if (k < 0 || b < 0) throw std::invalid_argument("oracle bounds must be non-negative");
  if (d < 1) throw std::invalid_argument("oracle recursion depth must be at least 1");
}

std::string_view oracle_kind_name(OracleResult::Kind k) {
  switch (k) {
    case OracleResult::Kind::Violation: return "VIOLATION";
    case OracleResult::Kind::NoViolation: return "NO-VIOLATION-UP-TO-BOUND";
    case OracleResult::Kind::DepthExceeded: return "DEPTH-EXCEEDED";
  }
  return "?";
}

namespace {

// Replays a fixed choice prefix, then extends it with zeros; `advance` moves to the next leaf.
class ReplayChooser : public Chooser {
 public:
  int choose(int n) override {
    if (pos_ < trail_.size()) return trail_[pos_++].first;
    trail_.emplace_back(0, n);
    ++pos_;
    return 0;
  }
  bool advance() {
    while (!trail_.empty() && trail_.back().first + 1 >= trail_.back().second) trail_.pop_back();
    if (trail_.empty()) return false;
    ++trail_.back().first;
    pos_ = 0;
    return true;
  }

 private:
  std::vector<std::pair<int, int>> trail_;
  std::size_t pos_ = 0;
};

}  // namespace

OracleResult run_oracle(const Program& program, const OracleConfig& cfg) {
  cfg.validate();
  ReplayChooser chooser;
  Interpreter interp(program, chooser, {cfg.b, cfg.k, cfg.d});
  OracleResult result;
  bool depth_hit = false;
  do {
    ++result.runs;
    RunOutcome o = interp.run_main();
    if (o.kind == RunOutcome::Kind::Violation) {
      result.kind = OracleResult::Kind::Violation;
      result.witness = interp.witness();
      result.message = program.file + ":" + std::to_string(o.loc.line) + ":" + std::to_string(o.loc.col) + ": " + o.message;
      return result;
    }
    if (o.kind == RunOutcome::Kind::DepthExceeded) depth_hit = true;
    if (result.runs >= cfg.max_runs) {
      result.truncated = true;
      break;
    }
  } while (chooser.advance());
  result.kind = depth_hit ? OracleResult::Kind::DepthExceeded : OracleResult::Kind::NoViolation;
  return result;
}

}  // namespace chcv
