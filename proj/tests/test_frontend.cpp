#include <filesystem>

#include "doctest.h"
#include "support.hpp"

using namespace chcv;
using namespace chcv::testing;

namespace {

const char* kFoldMap = R"(
(declare-symbolic xs list)
(define (+/typed a b) (+ a b))
(define (inc/typed x) (+ x 1))
(define (sum xs) (foldl +/typed 0 xs))
(verify (assert (= (+ (sum xs) (length xs)) (sum (map inc/typed xs)))))
)";

SourceLoc error_loc(const std::string& src) {
  try {
    program_of(src);
  } catch (const SourceError& e) {
    return e.loc();
  }
  FAIL("expected a SourceError");
  return {};
}

}  // namespace

TEST_CASE("sexpr reader handles comments, booleans and negative literals") {
  auto forms = read_all("; header\n(a #t -3 (b))  ; tail\n#f", "x");
  REQUIRE(forms.size() == 2);
  CHECK(forms[0].items.size() == 4);
  CHECK(forms[0].items[1].kind == Sexp::Kind::Bool);
  CHECK(forms[0].items[2].value == -3);
  CHECK(forms[1].kind == Sexp::Kind::Bool);
}

TEST_CASE("reader reports the location of an unbalanced paren") {
  try {
    read_all("(a\n  (b c)", "f.chl");
    FAIL("no error");
  } catch (const SourceError& e) {
    CHECK(e.loc().line == 1);
    CHECK(std::string(e.what()).rfind("f.chl:1:1:", 0) == 0);
  }
}

TEST_CASE("fold-map parses to three functions and one verify directive") {
  SurfaceProgram sp = parse(kFoldMap);
  CHECK(sp.function_count() == 3);
  CHECK(sp.verify() != nullptr);
}

TEST_CASE("pretty printing round-trips every corpus program") {
  for (const auto& de : std::filesystem::directory_iterator(CHCV_CORPUS_DIR)) {
    if (de.path().extension() != ".chl") continue;
    CAPTURE(de.path().string());
    SurfaceProgram sp = parse_file(de.path().string());
    CHECK(parse(pretty_print(sp)) == sp);
  }
}

TEST_CASE("program without verify is parse-only") {
  Program p = program_of("(define (f x) (+ x 1))");
  CHECK_FALSE(p.has_verify);
}

TEST_CASE("unbound names and type errors carry a position") {
  SourceLoc l = error_loc("(define (f x) (+ x y))\n(verify (= (f 1) 2))");
  CHECK(l.line == 1);
  CHECK(l.col == 20);
  CHECK(error_loc("(declare-symbolic b bool)\n(verify (= (+ b 1) 2))").line == 2);
}

TEST_CASE("nonlinear multiplication is rejected") {
  CHECK_THROWS_AS(program_of("(declare-symbolic x y int)\n(verify (= (* x y) 0))"), SourceError);
  CHECK_NOTHROW(program_of("(declare-symbolic x int)\n(verify (= (* 3 x) 0))"));
}

TEST_CASE("shadowed binders get distinct names") {
  Program p = program_of("(define (f x) (let ((x (+ x 1))) (let ((x (* 2 x))) x)))\n(verify (= (f 0) 2))");
  const FunctionDef* f = p.find_function("f");
  REQUIRE(f);
  const CoreExpr& outer = f->body;
  REQUIRE(outer.kind == CoreExpr::Kind::Let);
  const CoreExpr& inner = outer.args[1];
  REQUIRE(inner.kind == CoreExpr::Kind::Let);
  CHECK(outer.name != inner.name);
  CHECK(outer.name != f->params[0].name);
}

TEST_CASE("mutual recursion marks both functions recursive") {
  Program p = program_of(slurp(corpus_path("mutual-recursion")));
  CHECK(p.find_function("f")->recursive);
  CHECK(p.find_function("g")->recursive);
  Program q = program_of(kFoldMap);
  CHECK_FALSE(q.find_function("sum")->recursive);
}

TEST_CASE("global reads and writes are transitive through calls") {
  Program p = program_of(R"(
(define-global c 0)
(define (bump) (set! c (+ c 1)))
(define (twice) (bump) (bump))
(define (outer x) (twice) x)
(verify (= (outer 1) 1))
)");
  CHECK(p.find_function("outer")->writes == std::set<std::string>{"c"});
  CHECK(p.find_function("outer")->reads.count("c") == 1);
  CHECK(p.find_function("outer")->callees.count("twice") == 1);
}

TEST_CASE("function parameters must be declared with fn") {
  CHECK_THROWS_AS(program_of("(define (app f x) (f x))\n(verify (= (app abs 1) 1))"), SourceError);
  CHECK_NOTHROW(program_of("(define (app (fn f) x) (f x))\n(verify (= (app abs 1) 1))"));
}

TEST_CASE("lambdas are lifted to functions") {
  Program p = program_of("(declare-symbolic xs list)\n(verify (>= (foldl (lambda (x n) (+ n 1)) 0 xs) 0))");
  int lambdas = 0;
  for (const auto& f : p.functions) lambdas += f.is_lambda;
  CHECK(lambdas == 1);
}
