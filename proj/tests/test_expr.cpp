#include "chcv/expr.hpp"
#include "doctest.h"

using namespace chcv;

namespace {
Expr x() { return Expr::var("x", Sort::Int); }
Expr y() { return Expr::var("y", Sort::Int); }
}  // namespace

TEST_CASE("linear terms are normalized") {
  Expr e = Expr::add({x(), Expr::int_lit(2), Expr::mul(3, x()), Expr::int_lit(-2)});
  auto lf = linear_form(e);
  REQUIRE(lf);
  CHECK(lf->coeffs.at("x") == 4);
  CHECK(lf->constant == 0);
  CHECK(Expr::sub(x(), x()) == Expr::int_lit(0));
}

TEST_CASE("constant folding of comparisons and connectives") {
  CHECK(Expr::lt(Expr::int_lit(1), Expr::int_lit(2)).is_true());
  CHECK(Expr::and_(Expr::bool_lit(true), Expr::bool_lit(false)).is_false());
  CHECK(Expr::ite(Expr::bool_lit(true), x(), y()) == x());
}

TEST_CASE("evaluation") {
  Assignment env = [](const std::string& n) { return Value::of_int(n == "x" ? 3 : -2); };
  CHECK(eval(Expr::add(x(), Expr::mul(2, y())), env) == Value::of_int(-1));
  CHECK(eval(Expr::ite(Expr::lt(x(), y()), x(), y()), env) == Value::of_int(-2));
  CHECK(eval(Expr::ne(x(), y()), env) == Value::of_bool(true));
}

TEST_CASE("SMT-LIB rendering") {
  CHECK(to_smt(Expr::int_lit(-4)) == "(- 4)");
  CHECK(to_smt(Expr::le(x(), Expr::int_lit(0))) == "(<= x 0)");
  CHECK(smt_symbol("foldl#1&foldl#2") == "|foldl#1&foldl#2|");
  CHECK(smt_symbol("res") == "res");
}

TEST_CASE("readable rendering") {
  CHECK(to_text(Expr::gt(x(), Expr::int_lit(0))) == "x > 0");
  CHECK(to_text(Expr::ne(Expr::add(x(), y()), Expr::int_lit(1))) == "x + y != 1");
  CHECK(to_text(Expr::sub(x(), Expr::int_lit(1))) == "x - 1");
}

TEST_CASE("substitution and free variables") {
  Expr e = Expr::add(x(), y());
  Expr s = substitute(e, {{"x", Expr::int_lit(5)}});
  CHECK(free_vars(s).size() == 1);
  CHECK(mentions(s, "y"));
  CHECK_FALSE(mentions(s, "x"));
}

TEST_CASE("checked arithmetic throws on overflow") {
  CHECK_THROWS(checked_add(INT64_MAX, 1));
  CHECK_THROWS(checked_mul(INT64_MIN, -1));
  CHECK(checked_mul(-3, 4) == -12);
}

TEST_CASE("fresh variables are distinct") {
  VarGen g;
  CHECK(g.fresh("hd", Sort::Int) != g.fresh("hd", Sort::Int));
}
