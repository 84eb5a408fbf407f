#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "chcv/chc.hpp"
#include "chcv/core.hpp"
#include "chcv/encoder.hpp"
#include "chcv/frontend.hpp"

namespace chcv::testing {

inline Program program_of(const std::string& src, const std::string& file = "<test>") { return lower(parse(src, file)); }

inline EncodedProgram encode_src(const std::string& src) { return encode_program(program_of(src)); }

inline std::string corpus_path(const std::string& name) { return std::string(CHCV_CORPUS_DIR) + "/" + name + ".chl"; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Expr iv(const std::string& n) { return Expr::var(n, Sort::Int); }
inline Expr lit(std::int64_t v) { return Expr::int_lit(v); }

inline RelationSymbol int_relation(const std::string& name, std::initializer_list<const char*> args) {
  RelationSymbol r;
  r.name = name;
  r.origin = name;
  for (const char* a : args) r.args.push_back({a, Sort::Int, ArgRole::ValueIn});
  return r;
}

inline RelAtom atom(const std::string& rel, std::vector<Expr> args) { return RelAtom{rel, std::move(args), std::nullopt}; }

// Hand-written fold-map systems: two sum iterators before synchronization, and their product after.
inline ChcSystem fold_map_unsynced() {
  ChcSystem s;
  s.relations = {int_relation("SUM", {"l", "acc", "res"}), int_relation("SUM1", {"l", "acc", "res"})};
  for (int k = 0; k < 2; ++k) {
    std::string r = k ? "SUM1" : "SUM";
    Clause base;
    base.head = atom(r, {iv("l"), iv("acc"), iv("res")});
    base.guards = {Expr::eq(iv("l"), lit(0))};
    base.bindings = {Expr::eq(iv("res"), iv("acc"))};
    Clause step;
    step.head = atom(r, {iv("l"), iv("acc"), iv("res")});
    step.atoms = {atom(r, {Expr::sub(iv("l"), lit(1)), iv("acc"), iv("res'")})};
    step.guards = {Expr::gt(iv("l"), lit(0))};
    Expr rhs = Expr::add(iv("res'"), iv("hd"));
    if (k) rhs = Expr::add(rhs, lit(1));
    step.bindings = {Expr::eq(iv("res"), rhs)};
    s.clauses.push_back(base);
    s.clauses.push_back(step);
  }
  Clause q;
  q.atoms = {atom("SUM", {iv("len"), lit(0), iv("r1")}), atom("SUM1", {iv("len"), lit(0), iv("r2")})};
  q.guards = {Expr::ge(iv("len"), lit(0)), Expr::ne(Expr::add(iv("r1"), iv("len")), iv("r2"))};
  s.clauses.push_back(q);
  return s;
}

inline ChcSystem fold_map_synced() {
  ChcSystem s;
  s.relations = {int_relation("PROD", {"l", "acc", "res", "l'", "acc'", "res'"})};
  std::vector<Expr> head{iv("l"), iv("acc"), iv("res"), iv("m"), iv("acc2"), iv("res2")};
  Clause base;
  base.head = atom("PROD", head);
  base.guards = {Expr::eq(iv("l"), lit(0)), Expr::eq(iv("m"), lit(0))};
  base.bindings = {Expr::eq(iv("res"), iv("acc")), Expr::eq(iv("res2"), iv("acc2"))};
  Clause step;
  step.head = atom("PROD", head);
  step.atoms = {atom("PROD", {Expr::sub(iv("l"), lit(1)), iv("acc"), iv("p"), Expr::sub(iv("m"), lit(1)), iv("acc2"), iv("q")})};
  step.guards = {Expr::eq(iv("hd"), iv("hd2")), Expr::gt(iv("l"), lit(0)), Expr::gt(iv("m"), lit(0))};
  step.bindings = {Expr::eq(iv("res"), Expr::add(iv("p"), iv("hd"))),
                   Expr::eq(iv("res2"), Expr::add({iv("q"), iv("hd2"), lit(1)}))};
  Clause q;
  q.atoms = {atom("PROD", {iv("len"), lit(0), iv("r1"), iv("len"), lit(0), iv("r2")})};
  q.guards = {Expr::ge(iv("len"), lit(0)), Expr::ne(Expr::add(iv("r1"), iv("len")), iv("r2"))};
  s.clauses = {base, step, q};
  return s;
}

}  // namespace chcv::testing
