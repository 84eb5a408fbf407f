#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chcv/expr.hpp"

namespace chcv {

enum class ArgRole { ValueIn, GlobalIn, Out, GlobalOut, Ok };

std::string_view role_name(ArgRole r);

struct RelArg {
  std::string name;
  Sort sort = Sort::Int;
  ArgRole role = ArgRole::ValueIn;
};

/// Present on relations that iterate a list one element per step.
struct IteratorInfo {
  std::string direction;                     // "foldl" or "foldr"
  std::vector<std::size_t> length_positions;  // one per iterated list
};

struct RelationSymbol {
  std::string name;
  std::vector<RelArg> args;
  std::string origin;  // function name, "foldl"/"foldr", or "main"
  /// Higher-order argument assignment, e.g. {"f", "inc"}; element chains for folds.
  std::vector<std::pair<std::string, std::string>> assignment;
  std::optional<IteratorInfo> iterator;

  std::size_t arity() const { return args.size(); }
};

struct RelAtom {
  std::string rel;
  std::vector<Expr> args;
  std::optional<int> source;  // list source iterated by this occurrence

  friend bool operator==(const RelAtom&, const RelAtom&) = default;
};

/// `head <- atoms, guards, bindings`; a missing head means `false`.
struct Clause {
  std::optional<RelAtom> head;
  std::vector<RelAtom> atoms;
  std::vector<Expr> guards;
  std::vector<Expr> bindings;
  std::vector<Expr> consumed;  // element variables drawn in this clause

  bool is_query() const { return !head.has_value(); }
  std::vector<Expr> constraints() const;
};

struct ChcSystem {
  std::vector<RelationSymbol> relations;
  std::vector<Clause> clauses;
  /// Source id -> (relation, site) pairs iterating it.
  std::map<int, std::vector<std::pair<std::string, std::string>>> list_sources;

  const RelationSymbol* find(const std::string& name) const;
  const Clause* query() const;
  std::vector<const Clause*> clauses_of(const std::string& rel) const;
  /// Throws std::logic_error on undeclared relations, arity mismatches or several queries.
  void validate() const;
};

/// Per-clause display names: generated `base!n` variables become `base1`, `base2`, ...
std::map<std::string, std::string> clause_renaming(const Clause& c);

std::string to_text(const RelAtom& a, const std::map<std::string, std::string>& names = {});
std::string to_text(const Clause& c);
/// Relation signatures followed by one clause per line.
std::string to_text(const ChcSystem& sys);

/// Equality up to consistent renaming of relations and variables, with clause bodies compared
/// as multisets of normalized linear constraints.
bool isomorphic(const ChcSystem& a, const ChcSystem& b);

/// Drops relations (and their clauses) that the query cannot reach.
ChcSystem prune_unreachable(const ChcSystem& sys);

}  // namespace chcv
