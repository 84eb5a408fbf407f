#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "chcv/core.hpp"
#include "chcv/lists.hpp"

namespace chcv {

/// List element whose value may be chosen lazily on first observation.
struct Cell {
  std::optional<std::int64_t> value;
};
using CList = std::vector<std::shared_ptr<Cell>>;

struct CUnit {};
using CValue = std::variant<std::int64_t, bool, CList, FnValue, CUnit>;

std::string to_string(const CValue& v);

/// Source of nondeterministic choices; returns a value in [0, n).
class Chooser {
 public:
  virtual ~Chooser() = default;
  virtual int choose(int n) = 0;
};

struct RunOutcome {
  enum class Kind { Ok, Violation, Blocked, DepthExceeded };
  Kind kind = Kind::Ok;
  SourceLoc loc;
  std::string message;
};

/// Concrete interpreter of the core IR. Symbolic declarations draw from the chooser:
/// integers in [-bound, bound], booleans, and lists of length at most max_len.
class Interpreter {
 public:
  struct Limits {
    int bound = 4;
    int max_len = 4;
    int max_depth = 16;
  };

  Interpreter(const Program& program, Chooser& chooser, Limits limits);

  RunOutcome run_main();
  /// Calls a function with concrete arguments. Blocked runs, violations and the depth cap are
  /// reported through the returned outcome; `result` holds the value on success.
  RunOutcome call(const std::string& fn, const std::vector<CValue>& args, CValue& result);

  std::map<std::string, CValue>& globals() { return globals_; }
  /// Declared symbolic values as `name = value` lines; unobserved list elements print as `_`.
  std::string witness() const;

  static std::int64_t choice_value(int index);

 private:
  struct Stop {
    RunOutcome outcome;
  };
  using Env = std::map<std::string, CValue>;

  CValue eval(const CoreExpr& e, const Env& env);
  CValue apply(const FnValue& f, std::vector<CValue> args, const CoreExpr& site);
  CValue call_user(const std::string& name, std::vector<CValue> args, const CoreExpr& site);
  CValue eval_list(const CoreExpr& e, const Env& env);
  std::int64_t force(Cell& c);
  CValue choose_symbolic(const Type& t);
  [[noreturn]] void stop(RunOutcome::Kind k, SourceLoc loc, std::string msg);

  const Program& program_;
  Chooser& chooser_;
  Limits limits_;
  std::map<std::string, CValue> globals_;
  std::vector<std::pair<std::string, CValue>> declared_;
  int depth_ = 0;
};

CValue builtin_concrete(const std::string& name, const std::vector<CValue>& args);

}  // namespace chcv
