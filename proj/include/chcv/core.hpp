#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chcv/frontend.hpp"

namespace chcv {

/// Resolved static type of a core value.
struct Type {
  enum class Kind { Int, Bool, List, Unit, Fn };

  Kind kind = Kind::Int;
  std::vector<std::shared_ptr<const Type>> params;  // Fn only
  std::shared_ptr<const Type> ret;                   // Fn only

  static std::shared_ptr<const Type> make(Kind k);
  bool is(Kind k) const { return kind == k; }
};
using TypePtr = std::shared_ptr<const Type>;

std::string to_string(const Type& t);

enum class PrimOp { Add, Sub, Neg, Mul, Eq, Lt, Le, Gt, Ge, Not, Min, Max, Abs };
enum class ListOp { Length, Head, Tail, Cons, Append, Literal, IsNull, Map, Foldl, Foldr };

std::string_view prim_name(PrimOp op);
std::string_view list_op_name(ListOp op);

/// Desugared expression with statically resolved names.
///
/// `and`, `or`, `implies`, `when`, `unless` and `cond` are lowered to `If`.
/// Lambdas are lifted to top-level FunctionDefs and referenced through FunRef.
struct CoreExpr {
  enum class Kind {
    IntLit,
    BoolLit,
    UnitLit,
    Local,       // name = unique binder name
    Global,      // name = global (symbolic constant, top-level value or mutable global)
    FunRef,      // name = user function (or lifted lambda) used as a value
    BuiltinRef,  // prim used as a value, e.g. `+` in `(foldl + 0 xs)`
    Prim,
    If,           // args = cond, then, else
    Let,          // name = binder; args = init, body
    Call,         // name = user function; args = actual arguments
    CallLocal,    // name = local binder of function type; args = actual arguments
    List,         // list builtin
    Assert,
    Assume,
    SetGlobal,  // name = global; args = value
    Seq,
  };

  Kind kind = Kind::UnitLit;
  SourceLoc loc;
  std::int64_t value = 0;
  std::string name;
  PrimOp prim = PrimOp::Add;
  ListOp list_op = ListOp::Length;
  std::vector<CoreExpr> args;
};

struct Param {
  std::string name;  // unique binder name
  bool is_function = false;
  TypePtr type;
};

struct FunctionDef {
  std::string name;
  SourceLoc loc;
  std::vector<Param> params;
  TypePtr ret;
  CoreExpr body;
  bool is_lambda = false;
  /// Call-graph successors: direct callees and functions referenced as values.
  std::set<std::string> callees;
  /// Globals reachable from the body, computed transitively through `callees`.
  std::set<std::string> reads;
  std::set<std::string> writes;
  bool may_assert = false;  // an assert is reachable through `callees`
  bool recursive = false;   // member of a call-graph cycle

  std::size_t value_arity() const;
};

struct GlobalDef {
  enum class Kind { Symbolic, Value, Mutable };
  std::string name;
  Kind kind = Kind::Value;
  TypePtr type;
  SourceLoc loc;
};

/// Top-level statement executed in program order by `main`.
struct TopStmt {
  enum class Kind { Declare, DefineValue, DefineGlobal, Assume, Assert, Verify };
  Kind kind = Kind::Declare;
  SourceLoc loc;
  std::string name;
  std::vector<CoreExpr> exprs;
};

struct Program {
  std::string file;
  std::vector<FunctionDef> functions;
  std::vector<GlobalDef> globals;
  std::vector<TopStmt> main;
  bool has_verify = false;

  const FunctionDef* find_function(const std::string& name) const;
  const GlobalDef* find_global(const std::string& name) const;
  /// True if any assertion appears anywhere (functions or top level).
  bool has_assertions() const;
};

/// Resolves names, eliminates shadowing, infers types and computes call-graph facts.
/// Throws SourceError for unbound names, type errors and unsupported functional values.
Program lower(const SurfaceProgram& sp);

/// Recomputes reads/writes/may_assert/recursive from `callees` and the bodies.
void compute_call_graph_facts(Program& program);

}  // namespace chcv
