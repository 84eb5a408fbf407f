#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "chcv/expr.hpp"

namespace chcv {

/// A statically resolved function value: a user function (or lifted lambda) or a builtin operator.
struct FnValue {
  enum class Kind { User, Builtin };
  Kind kind = Kind::User;
  std::string name;

  friend bool operator==(const FnValue&, const FnValue&) = default;
  friend auto operator<=>(const FnValue&, const FnValue&) = default;
};

/// Unbounded part of a list: `length` nondeterministic elements drawn from `source`,
/// each passed through `chain` (innermost map first) when it is consumed.
struct ListTail {
  int source = -1;
  Expr length;
  std::vector<FnValue> chain;

  friend bool operator==(const ListTail&, const ListTail&) = default;
};

/// Partially specified list: concrete (already transformed) prefix followed by an optional tail.
struct SymList {
  std::vector<Expr> prefix;
  std::optional<ListTail> tail;

  friend bool operator==(const SymList&, const SymList&) = default;
};

Expr builtin_length(const SymList& lv);

struct SourceInfo {
  int id = -1;
  Expr length;
  std::string origin;
};

struct HeadRecord {
  int source = -1;
  std::string consumer;
  Expr hd;
};

/// Append-only registry of list sources and the element variables drawn from them.
class SourceRegistry {
 public:
  int fresh(Expr length, std::string origin);
  SourceInfo info(int id) const;
  std::size_t size() const;

  /// Records that `consumer` drew `hd` from `source`. Registering the same variable twice throws.
  void register_head(int source, const std::string& consumer, const Expr& hd);
  std::vector<HeadRecord> heads() const;
  std::vector<HeadRecord> heads_of(int source) const;

 private:
  mutable std::mutex mu_;
  std::vector<SourceInfo> sources_;
  std::vector<HeadRecord> heads_;
};

/// Applies an element transform chain to a raw element term.
using ChainApply = std::function<Expr(const std::vector<FnValue>& chain, const Expr& raw)>;

struct ConsumeStep {
  Expr head;
  SymList rest;
  Expr guard;
  std::optional<Expr> fresh_hd;  // set when the element came from the tail
};

/// Takes the first element of `lv`. Drawing from the tail introduces a fresh `hd` registered
/// against (`tail.source`, `consumer`). Consuming an empty nil-tailed list yields guard false.
ConsumeStep consume_step(const SymList& lv, VarGen& gen, SourceRegistry& reg, const std::string& consumer,
                         const ChainApply& apply);

/// Exact concatenation when `a` is nil-tailed; otherwise a fresh source whose length is the sum.
SymList builtin_append(const SymList& a, const SymList& b, SourceRegistry& reg);

/// Maps the prefix eagerly and defers `f` on the tail by extending its chain. The source id is kept.
SymList fuse_map(const FnValue& f, const SymList& lv, const std::function<Expr(const Expr&)>& apply);

std::string to_string(const FnValue& f);
std::string to_string(const SymList& lv);

}  // namespace chcv
