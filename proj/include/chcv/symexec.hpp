#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "chcv/chc.hpp"
#include "chcv/core.hpp"
#include "chcv/expr.hpp"
#include "chcv/lists.hpp"

namespace chcv {

struct UnitValue {
  friend bool operator==(const UnitValue&, const UnitValue&) = default;
};

using SymValue = std::variant<Expr, SymList, FnValue, UnitValue>;

std::string to_string(const SymValue& v);

/// Assertion reachable under `guard`.
struct Obligation {
  Expr guard;
  Expr formula;
};

/// One execution branch under construction.
struct Path {
  std::vector<Expr> pc;
  std::vector<RelAtom> calls;
  std::vector<Obligation> obligations;
  std::map<std::string, SymValue> globals;
  /// (source id, length term) -> raw element, so repeated `head` reads agree.
  std::map<std::pair<int, std::string>, Expr> heads;
  std::vector<Expr> consumed;
  SymValue value = UnitValue{};
};

/// A (possibly merged) branch of a function instance: `pc ∧ calls ⊢ outputs`.
struct BranchSummary {
  std::vector<Expr> inputs;
  std::vector<Expr> pc;
  std::vector<RelAtom> calls;
  std::vector<Obligation> obligations;
  std::vector<Expr> outputs;
  std::vector<Expr> consumed;
};

std::string to_text(const BranchSummary& s);

struct FoldKey {
  ListOp direction = ListOp::Foldl;
  FnValue fn;
  std::vector<FnValue> chain;
  Sort acc = Sort::Int;

  std::string canonical() const;
};

using FnAssignment = std::map<std::string, FnValue>;

/// Signature table consulted when execution reaches a recursive call or an unbounded fold.
class CallResolver {
 public:
  virtual ~CallResolver() = default;
  virtual RelationSymbol instantiate(const std::string& fn, const FnAssignment& assignment) = 0;
  virtual RelationSymbol instantiate_fold(const FoldKey& key) = 0;
  /// Notified when an atom iterates a list source.
  virtual void note_iteration(int source, const std::string& rel, const std::string& site) = 0;
};

/// Merges two values under `guard`; nullopt when the values cannot share one branch.
std::optional<SymValue> merge(const Expr& guard, const SymValue& a, const SymValue& b);

Sort sort_of(const Type& t);
std::vector<Expr> flatten(const SymValue& v);

/// Symbolic interpreter over the core IR with inlining of non-recursive functions.
class Executor {
 public:
  using Env = std::map<std::string, SymValue>;

  Executor(const Program& program, VarGen& gen, SourceRegistry& sources, CallResolver& resolver, std::string consumer);

  std::vector<Path> run(const CoreExpr& e, const Path& start, const Env& env);
  std::vector<Path> apply(const FnValue& f, std::vector<SymValue> args, const Path& start, const CoreExpr& site);
  /// Applies a pure element chain; the chain must not split the path or call relations.
  Expr apply_chain(Path& path, const std::vector<FnValue>& chain, const Expr& raw, const CoreExpr& site);
  /// Fresh symbolic value of the given type (lists get a fresh source whose length is the variable).
  SymValue fresh_value(const Type& t, const std::string& base, Expr* flat = nullptr);
  /// Rebuilds a value of type `t` from its flattened relation argument.
  SymValue from_flat(const Type& t, const Expr& flat, Path& path);

  /// Appends an atom for `rel` to `p`, threading globals and the ok flag; returns the result variable.
  std::optional<Expr> emit_call(const RelationSymbol& rel, const std::vector<Expr>& value_in, Path& p, const CoreExpr& site,
                                std::optional<int> source);

  static void add_guard(Path& p, const Expr& g);
  /// Adds a blocking condition (assume, head of a list) that cannot mask an earlier failed assertion.
  static void add_block(Path& p, const Expr& g);
  static bool dead(const Path& p);

 private:
  using Valued = std::pair<Path, std::vector<SymValue>>;
  std::vector<Valued> run_all(const std::vector<CoreExpr>& args, const Path& start, const Env& env);
  std::vector<Path> run_if(const CoreExpr& e, const Path& start, const Env& env);
  std::vector<Path> run_prim(const CoreExpr& e, const Path& start, const Env& env);
  std::vector<Path> run_list(const CoreExpr& e, const Path& start, const Env& env);
  std::vector<Path> call_user(const std::string& name, std::vector<SymValue> args, const Path& start, const CoreExpr& site);
  std::vector<Path> fold(ListOp dir, const FnValue& f, const SymValue& init, const SymList& list, const Path& start,
                         const CoreExpr& site);
  void check_pure_map(const FnValue& f, const CoreExpr& site) const;
  Expr head_of(Path& p, const SymList& list, const CoreExpr& site);
  [[noreturn]] void fail(const CoreExpr& site, const std::string& msg) const;

  const Program& program_;
  VarGen& gen_;
  SourceRegistry& sources_;
  CallResolver& resolver_;
  std::string consumer_;
  int depth_ = 0;
};

Expr builtin_apply(const std::string& name, const std::vector<Expr>& args);

}  // namespace chcv
