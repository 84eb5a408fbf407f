#include "chcv/interp.hpp"
#include "chcv/oracle.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace chcv;
using namespace chcv::testing;

namespace {

struct ZeroChooser : Chooser {
  int choose(int) override { return 0; }
};

CList clist(std::initializer_list<std::int64_t> xs) {
  CList l;
  for (auto x : xs) l.push_back(std::make_shared<Cell>(Cell{x}));
  return l;
}

OracleResult oracle_src(const std::string& src, OracleConfig cfg = {}) { return run_oracle(program_of(src), cfg); }

}  // namespace

TEST_CASE("choice indices enumerate small integers first") {
  std::vector<std::int64_t> got;
  for (int i = 0; i < 5; ++i) got.push_back(Interpreter::choice_value(i));
  CHECK(got == std::vector<std::int64_t>{0, 1, -1, 2, -2});
}

TEST_CASE("concrete fold-map on [1, 2]") {
  Program p = lower(parse_file(corpus_path("fold-map")));
  ZeroChooser ch;
  Interpreter in(p, ch, {});
  CValue r;
  REQUIRE(in.call("sum", {clist({1, 2})}, r).kind == RunOutcome::Kind::Ok);
  CHECK(std::get<std::int64_t>(r) == 3);
  REQUIRE(in.call("sum", {clist({2, 3})}, r).kind == RunOutcome::Kind::Ok);
  CHECK(std::get<std::int64_t>(r) == 5);
}

TEST_CASE("foldr folds from the right") {
  Program p = program_of("(define (sub x a) (- x a))\n(define (r l) (foldr sub 0 l))\n(define (f l) (foldl sub 0 l))\n(verify #t)");
  ZeroChooser ch;
  Interpreter in(p, ch, {});
  CValue r;
  in.call("r", {clist({1, 2, 3})}, r);
  CHECK(std::get<std::int64_t>(r) == 2);  // 1 - (2 - (3 - 0))
  in.call("f", {clist({1, 2, 3})}, r);
  CHECK(std::get<std::int64_t>(r) == 2);  // 3 - (2 - (1 - 0))
}

TEST_CASE("oracle on corpus programs") {
  CHECK(run_oracle(lower(parse_file(corpus_path("fold-map"))), {}).kind == OracleResult::Kind::NoViolation);
  OracleResult bad = run_oracle(lower(parse_file(corpus_path("mutual-recursion-e"))), {});
  CHECK(bad.kind == OracleResult::Kind::Violation);
  CHECK(bad.witness.find("n = ") != std::string::npos);
  OracleResult fm = run_oracle(lower(parse_file(corpus_path("fold-map-e"))), {});
  REQUIRE(fm.kind == OracleResult::Kind::Violation);
  CHECK(fm.witness.find("xs = (list)") != std::string::npos);
}

TEST_CASE("zero bounds check only the empty list and zero") {
  OracleConfig cfg;
  cfg.k = 0;
  cfg.b = 0;
  OracleResult r = oracle_src("(declare-symbolic x int)\n(declare-symbolic xs list)\n(verify (>= (+ x (length xs)) 0))", cfg);
  CHECK(r.kind == OracleResult::Kind::NoViolation);
  CHECK(r.runs == 1);
}

TEST_CASE("enumeration covers the whole bounded domain") {
  OracleResult r = oracle_src("(declare-symbolic x y int)\n(verify (not (and (= x 4) (= y -4))))");
  CHECK(r.kind == OracleResult::Kind::Violation);
  OracleConfig cfg;
  cfg.b = 3;
  CHECK(oracle_src("(declare-symbolic x y int)\n(verify (not (and (= x 4) (= y -4))))", cfg).kind ==
        OracleResult::Kind::NoViolation);
}

TEST_CASE("list elements are only chosen when observed") {
  OracleResult r = oracle_src("(declare-symbolic xs list)\n(verify (>= (length xs) 0))");
  CHECK(r.runs == 5);
}

TEST_CASE("head of an empty list blocks instead of failing") {
  OracleResult r = oracle_src("(declare-symbolic xs list)\n(verify (= (head xs) (head xs)))");
  CHECK(r.kind == OracleResult::Kind::NoViolation);
}

TEST_CASE("a failed assertion is not masked by a later assumption") {
  const char* src = "(declare-symbolic x int)\n(assert (> x 0))\n(assume #f)\n(verify #t)";
  CHECK(oracle_src(src).kind == OracleResult::Kind::Violation);
  EncodedProgram ep = encode_src(src);
  const Clause& q = *ep.system.query();
  Assignment look = [](const std::string&) { return Value::of_int(-1); };
  bool sat = true;
  for (const auto& c : q.constraints()) sat = sat && eval(c, look).b;
  CHECK(sat);
}

TEST_CASE("unbounded recursion hits the depth cap") {
  OracleResult r = oracle_src("(define (loop n) (+ 1 (loop n)))\n(declare-symbolic n int)\n(verify (> (loop n) 0))");
  CHECK(r.kind == OracleResult::Kind::DepthExceeded);
  CHECK(oracle_kind_name(r.kind) == "DEPTH-EXCEEDED");
}

TEST_CASE("oracle configuration is validated") {
  OracleConfig cfg;
  cfg.d = 0;
  CHECK_THROWS(cfg.validate());
  cfg = OracleConfig{};
  cfg.k = -1;
  CHECK_THROWS(cfg.validate());
  CHECK_NOTHROW(OracleConfig{}.validate());
}
