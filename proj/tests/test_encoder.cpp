#include "chcv/encoder.hpp"
#include "doctest.h"
#include "properties.hpp"
#include "support.hpp"

using namespace chcv;
using namespace chcv::testing;

namespace {

bool holds(const Clause& c, const std::map<std::string, std::int64_t>& vals) {
  Assignment look = [&](const std::string& n) { return Value::of_int(vals.at(n)); };
  for (const auto& g : c.constraints())
    if (!eval(g, look).b) return false;
  return true;
}

const char* kCounter = R"(
(define-global c 0)
(define (g x) (set! c (+ c 1)) (if (<= x 0) x (g (- x 1))))
(declare-symbolic n int)
(verify (>= (g n) (- 0 100)))
)";

}  // namespace

TEST_CASE("fold-map encodes to two iterator relations and one query") {
  EncodedProgram ep = encode_program(lower(parse_file(corpus_path("fold-map"))));
  CHECK(isomorphic(ep.system, fold_map_unsynced()));
  CHECK(ep.system.relations.size() == 2);
  for (const auto& r : ep.system.relations) {
    CHECK(r.arity() == 3);
    REQUIRE(r.iterator);
    CHECK(r.iterator->direction == "foldl");
  }
}

TEST_CASE("isomorphism is sensitive to constants") {
  ChcSystem s = fold_map_unsynced();
  s.clauses[3].bindings[0] = Expr::eq(iv("res"), Expr::add({iv("res'"), iv("hd"), lit(2)}));
  CHECK_FALSE(isomorphic(encode_program(lower(parse_file(corpus_path("fold-map")))).system, s));
}

TEST_CASE("same fold instance is shared between call sites") {
  EncodedProgram ep = encode_program(lower(parse_file(corpus_path("fold-eq"))));
  CHECK(ep.system.relations.size() == 1);
  CHECK(ep.system.query()->atoms.size() == 2);
}

TEST_CASE("mutable globals thread through relation arguments") {
  EncodedProgram ep = encode_src(kCounter);
  REQUIRE(ep.system.relations.size() == 1);
  const RelationSymbol& g = ep.system.relations[0];
  REQUIRE(g.arity() == 4);
  CHECK(g.args[0].role == ArgRole::ValueIn);
  CHECK(g.args[1].role == ArgRole::GlobalIn);
  CHECK(g.args[2].role == ArgRole::Out);
  CHECK(g.args[3].role == ArgRole::GlobalOut);
  const Clause* base = ep.system.clauses_of(g.name).front();
  REQUIRE(base->atoms.empty());
  Expr cin = base->head->args[1], cout = base->head->args[3];
  bool found = false;
  for (const auto& b : base->constraints()) found = found || b == Expr::eq(cout, Expr::add(cin, lit(1)));
  CHECK(found);
  // the query starts the counter at its initial value
  CHECK(ep.system.query()->atoms[0].args[1] == lit(0));
}

TEST_CASE("assertions inside called functions reach the query") {
  EncodedProgram ep = encode_src("(define (check x) (assert (>= x 0)) x)\n(declare-symbolic n int)\n(verify (= (check n) n))");
  const Clause& q = *ep.system.query();
  CHECK(holds(q, {{"n", -1}}));
  CHECK_FALSE(holds(q, {{"n", 3}}));
}

TEST_CASE("unreachable assertion yields an unsatisfiable query") {
  EncodedProgram ep = encode_src("(define (f x) (if (< x x) (begin (assert #f) x) x))\n(declare-symbolic n int)\n(verify (= (f n) n))");
  bool has_false = false;
  for (const auto& c : ep.system.query()->constraints()) has_false = has_false || c.is_false();
  CHECK(has_false);
}

TEST_CASE("programs without assertions are rejected") {
  CHECK_THROWS_WITH_AS(encode_src("(declare-symbolic x int)\n(verify)"), doctest::Contains("no assertions"), SourceError);
}

TEST_CASE("recursive assertions thread an ok flag") {
  EncodedProgram ep = encode_src(R"(
(define (walk n) (assert (< n 10)) (if (<= n 0) 0 (walk (- n 1))))
(declare-symbolic n int)
(verify (= (walk n) 0))
)");
  REQUIRE(ep.system.relations.size() == 1);
  CHECK(ep.system.relations[0].args.back().role == ArgRole::Ok);
}

TEST_CASE("a split top level goes through a main relation") {
  EncodedProgram ep = encode_src(R"(
(declare-symbolic xs list)
(declare-symbolic c bool)
(define (add x a) (+ x a))
(verify (implies c (>= (foldl add 0 xs) (foldl add 0 xs))))
)");
  CHECK(ep.system.find("main") != nullptr);
  CHECK(ep.system.query()->atoms.size() == 1);
  CHECK_NOTHROW(ep.system.validate());
}

TEST_CASE("relation names depend only on the instance") {
  CHECK(name_hash("abc") == name_hash("abc"));
  CHECK(name_hash("abc") != name_hash("abd"));
  CHECK(name_hash("abc").size() == 8);
}

TEST_CASE("encoding properties: determinism, polarity and list sources") {
  auto entries = load_corpus(CHCV_CORPUS_DIR);
  for (const auto& r : {emit_determinism(entries), polarity(), source_ids()}) {
    CHECK(r.checked > 0);
    for (const auto& f : r.failures) FAIL_CHECK(f);
  }
}
