#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace chcv {

enum class Sort { Int, Bool };

std::string_view sort_name(Sort s);

/// Immutable linear-integer-arithmetic term or quantifier-free formula.
///
/// Builders normalize as they go: constants fold, sums are flattened with like
/// terms combined, and boolean connectives drop neutral elements. Products are
/// always constant-scaled, so every Expr is linear by construction.
class Expr {
 public:
  enum class Op { IntLit, BoolLit, Var, Add, Mul, Ite, Not, And, Or, Eq, Le, Lt };

  Expr() = default;

  static Expr int_lit(std::int64_t v);
  static Expr bool_lit(bool v);
  static Expr var(std::string name, Sort sort);

  static Expr add(std::vector<Expr> terms);
  static Expr add(Expr a, Expr b) { return add(std::vector<Expr>{std::move(a), std::move(b)}); }
  static Expr sub(Expr a, Expr b);
  static Expr neg(Expr a) { return mul(-1, std::move(a)); }
  static Expr mul(std::int64_t c, Expr a);
  static Expr ite(Expr c, Expr a, Expr b);

  static Expr not_(Expr a);
  static Expr and_(std::vector<Expr> fs);
  static Expr and_(Expr a, Expr b) { return and_(std::vector<Expr>{std::move(a), std::move(b)}); }
  static Expr or_(std::vector<Expr> fs);
  static Expr or_(Expr a, Expr b) { return or_(std::vector<Expr>{std::move(a), std::move(b)}); }
  static Expr implies(Expr a, Expr b) { return or_(not_(std::move(a)), std::move(b)); }
  static Expr eq(Expr a, Expr b);
  static Expr ne(Expr a, Expr b) { return not_(eq(std::move(a), std::move(b))); }
  static Expr le(Expr a, Expr b);
  static Expr lt(Expr a, Expr b);
  static Expr ge(Expr a, Expr b) { return le(std::move(b), std::move(a)); }
  static Expr gt(Expr a, Expr b) { return lt(std::move(b), std::move(a)); }

  bool valid() const { return node_ != nullptr; }
  Op op() const { return node_->op; }
  Sort sort() const { return node_->sort; }
  std::int64_t value() const { return node_->value; }
  const std::string& name() const { return node_->name; }
  const std::vector<Expr>& kids() const { return node_->kids; }

  bool is_true() const { return op() == Op::BoolLit && value() != 0; }
  bool is_false() const { return op() == Op::BoolLit && value() == 0; }
  bool is_const() const { return op() == Op::IntLit || op() == Op::BoolLit; }

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

 private:
  struct Node {
    Op op;
    Sort sort;
    std::int64_t value = 0;
    std::string name;
    std::vector<Expr> kids;
  };
  static Expr make(Op op, Sort sort, std::int64_t value, std::string name, std::vector<Expr> kids);

  std::shared_ptr<const Node> node_;
};

struct Value {
  Sort sort = Sort::Int;
  std::int64_t i = 0;
  bool b = false;

  static Value of_int(std::int64_t v) { return {Sort::Int, v, false}; }
  static Value of_bool(bool v) { return {Sort::Bool, 0, v}; }
  friend bool operator==(const Value& a, const Value& b) {
    return a.sort == b.sort && (a.sort == Sort::Int ? a.i == b.i : a.b == b.b);
  }
};

using Assignment = std::function<Value(const std::string&)>;

Value eval(const Expr& e, const Assignment& env);

/// Variables in order of first occurrence (depth-first, left to right).
void free_vars(const Expr& e, std::vector<Expr>& out);
std::vector<Expr> free_vars(const Expr& e);
bool mentions(const Expr& e, const std::string& var);

Expr substitute(const Expr& e, const std::map<std::string, Expr>& sub);

/// `sum(coeffs[v] * v) + constant`; nullopt when the term is not a plain linear sum.
struct LinearForm {
  std::map<std::string, std::int64_t> coeffs;
  std::int64_t constant = 0;
  friend bool operator==(const LinearForm&, const LinearForm&) = default;
};
std::optional<LinearForm> linear_form(const Expr& e);

/// Quotes a symbol for SMT-LIB2 if it is not a simple symbol.
std::string smt_symbol(const std::string& name);
std::string to_smt(const Expr& e);
/// Infix rendering used by the Horn clause pretty-printer.
std::string to_text(const Expr& e);

/// Overflow-checked arithmetic; throws std::overflow_error.
std::int64_t checked_add(std::int64_t a, std::int64_t b);
std::int64_t checked_mul(std::int64_t a, std::int64_t b);

/// Hands out globally unique variable names of the form `<base>!<n>`.
class VarGen {
 public:
  Expr fresh(const std::string& base, Sort sort) { return Expr::var(base + "!" + std::to_string(next_++), sort); }
  std::uint64_t counter() const { return next_; }
  void reset(std::uint64_t n) { next_ = n; }

 private:
  std::uint64_t next_ = 0;
};

}  // namespace chcv
