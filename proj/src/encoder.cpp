#include "chcv/encoder.hpp"

#include <cstdio>
#include <stdexcept>

namespace chcv {

std::string name_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>((h >> 32) ^ h));
  return buf;
}

namespace {

std::string base_name(const std::string& unique) { return unique.substr(0, unique.find('~')); }

std::string assignment_text(const FnAssignment& a) {
  std::string s;
  for (const auto& [k, v] : a) s += (s.empty() ? "" : ",") + base_name(k) + "=" + to_string(v);
  return s;
}

Expr obligations_formula(const std::vector<Obligation>& obs) {
  std::vector<Expr> parts;
  for (const auto& o : obs) parts.push_back(Expr::implies(o.guard, o.formula));
  return Expr::and_(parts);
}

}  // namespace

Encoder::Encoder(const Program& program) : program_(program), sources_(std::make_shared<SourceRegistry>()) {}

Encoder::Scope Encoder::scope_of(const FnValue& f) const {
  Scope s;
  if (f.kind != FnValue::Kind::User) return s;
  const FunctionDef* def = program_.find_function(f.name);
  if (!def) throw std::logic_error("unknown function " + f.name);
  s.reads = def->reads;
  s.writes = def->writes;
  s.may_assert = def->may_assert;
  return s;
}

RelationSymbol& Encoder::add_relation(RelationSymbol rel, Instance inst) {
  auto globals = inst.reads;
  globals.insert(inst.writes.begin(), inst.writes.end());
  std::vector<RelArg> in = rel.args;
  rel.args.clear();
  auto global_sort = [&](const std::string& g) { return sort_of(*program_.find_global(g)->type); };
  for (auto& a : in)
    if (a.role == ArgRole::ValueIn) rel.args.push_back(a);
  for (const auto& g : globals) rel.args.push_back({g, global_sort(g), ArgRole::GlobalIn});
  for (auto& a : in)
    if (a.role == ArgRole::Out) rel.args.push_back(a);
  for (const auto& g : inst.writes) rel.args.push_back({g, global_sort(g), ArgRole::GlobalOut});
  if (inst.ok) rel.args.push_back({"ok", Sort::Bool, ArgRole::Ok});
  relations_.push_back(rel);
  instances_[rel.name] = std::move(inst);
  return relations_.back();
}

RelationSymbol Encoder::instantiate(const std::string& fn, const FnAssignment& assignment) {
  std::string key = fn + "|" + assignment_text(assignment);
  if (auto it = by_key_.find(key); it != by_key_.end())
    for (const auto& r : relations_)
      if (r.name == it->second) return r;
  const FunctionDef* def = program_.find_function(fn);
  if (!def) throw std::logic_error("unknown function " + fn);
  Instance inst;
  inst.fn = fn;
  inst.assignment = assignment;
  inst.reads = def->reads;
  inst.writes = def->writes;
  inst.ok = def->may_assert;
  RelationSymbol rel;
  rel.name = assignment.empty() ? fn : fn + "#" + name_hash(key);
  rel.origin = fn;
  for (const auto& p : def->params) {
    if (p.is_function || p.type->is(Type::Kind::Fn)) {
      auto it = assignment.find(p.name);
      if (it == assignment.end()) throw std::logic_error("unassigned function parameter " + p.name + " of " + fn);
      Scope s = scope_of(it->second);
      inst.reads.insert(s.reads.begin(), s.reads.end());
      inst.writes.insert(s.writes.begin(), s.writes.end());
      inst.ok = inst.ok || s.may_assert;
      rel.assignment.emplace_back(base_name(p.name), to_string(it->second));
      continue;
    }
    if (p.type->is(Type::Kind::Unit)) continue;
    rel.args.push_back({base_name(p.name), sort_of(*p.type), ArgRole::ValueIn});
  }
  if (!def->ret->is(Type::Kind::Unit)) rel.args.push_back({"res", sort_of(*def->ret), ArgRole::Out});
  by_key_[key] = rel.name;
  return add_relation(std::move(rel), std::move(inst));
}

RelationSymbol Encoder::instantiate_fold(const FoldKey& key) {
  std::string k = key.canonical();
  if (auto it = by_key_.find(k); it != by_key_.end())
    for (const auto& r : relations_)
      if (r.name == it->second) return r;
  Instance inst;
  inst.fold = key;
  std::vector<FnValue> fns = key.chain;
  fns.push_back(key.fn);
  for (const auto& f : fns) {
    Scope s = scope_of(f);
    inst.reads.insert(s.reads.begin(), s.reads.end());
    inst.writes.insert(s.writes.begin(), s.writes.end());
    inst.ok = inst.ok || s.may_assert;
  }
  RelationSymbol rel;
  std::string dir(list_op_name(key.direction));
  rel.name = dir + "#" + name_hash(k);
  rel.origin = dir;
  rel.assignment.emplace_back("f", to_string(key.fn));
  for (const auto& f : key.chain) rel.assignment.emplace_back("map", to_string(f));
  rel.iterator = IteratorInfo{dir, {0}};
  rel.args.push_back({"l", Sort::Int, ArgRole::ValueIn});
  rel.args.push_back({"acc", key.acc, ArgRole::ValueIn});
  rel.args.push_back({"res", key.acc, ArgRole::Out});
  by_key_[k] = rel.name;
  return add_relation(std::move(rel), std::move(inst));
}

void Encoder::note_iteration(int source, const std::string& rel, const std::string& site) {
  auto& uses = iterations_[source];
  for (const auto& u : uses)
    if (u.first == rel && u.second == site) return;
  uses.emplace_back(rel, site);
}

void Encoder::bind_globals(Executor& ex, const Instance& inst, Path& p, std::vector<Expr>& inputs) {
  auto globals = inst.reads;
  globals.insert(inst.writes.begin(), inst.writes.end());
  for (const auto& g : globals) {
    Expr flat;
    p.globals[g] = ex.fresh_value(*program_.find_global(g)->type, g, &flat);
    inputs.push_back(flat);
  }
}

std::vector<Expr> Encoder::outputs_of(const Path& p, const RelationSymbol& rel) const {
  std::vector<Expr> out;
  for (const auto& a : rel.args) {
    switch (a.role) {
      case ArgRole::Out:
        out.push_back(flatten(p.value).at(0));
        break;
      case ArgRole::GlobalOut:
        out.push_back(flatten(p.globals.at(a.name)).at(0));
        break;
      case ArgRole::Ok:
        out.push_back(obligations_formula(p.obligations));
        break;
      default:
        break;
    }
  }
  return out;
}

std::vector<BranchSummary> Encoder::summarize_function(const RelationSymbol& rel, const Instance& inst) {
  const FunctionDef* def = program_.find_function(inst.fn);
  Executor ex(program_, gen_, *sources_, *this, rel.name);
  Path start;
  Executor::Env env;
  std::vector<Expr> inputs;
  for (const auto& p : def->params) {
    if (p.is_function || p.type->is(Type::Kind::Fn)) {
      env[p.name] = inst.assignment.at(p.name);
      continue;
    }
    Expr flat;
    env[p.name] = ex.fresh_value(*p.type, base_name(p.name), &flat);
    if (!p.type->is(Type::Kind::Unit)) inputs.push_back(flat);
  }
  bind_globals(ex, inst, start, inputs);
  std::vector<BranchSummary> out;
  for (auto& path : ex.run(def->body, start, env)) {
    if (Executor::dead(path)) continue;
    out.push_back({inputs, path.pc, path.calls, path.obligations, outputs_of(path, rel), path.consumed});
  }
  return out;
}

std::vector<BranchSummary> Encoder::summarize_fold(const RelationSymbol& rel, const Instance& inst) {
  const FoldKey& key = *inst.fold;
  Executor ex(program_, gen_, *sources_, *this, rel.name);
  CoreExpr site;
  Expr len = gen_.fresh("l", Sort::Int);
  Expr acc = gen_.fresh("acc", key.acc);
  std::vector<Expr> inputs{len, acc};
  Path start;
  bind_globals(ex, inst, start, inputs);
  int formal = sources_->fresh(len, rel.name);
  note_iteration(formal, rel.name, rel.name);

  std::vector<BranchSummary> out;
  Path base = start;
  Executor::add_guard(base, Expr::eq(len, Expr::int_lit(0)));
  base.value = acc;
  out.push_back({inputs, base.pc, {}, {}, outputs_of(base, rel), {}});

  Path step = start;
  Executor::add_guard(step, Expr::gt(len, Expr::int_lit(0)));
  step.value = *ex.emit_call(rel, {Expr::sub(len, Expr::int_lit(1)), acc}, step, site, formal);
  SymList formal_list{{}, ListTail{formal, len, key.chain}};
  ConsumeStep c = consume_step(formal_list, gen_, *sources_, rel.name,
                               [&](const std::vector<FnValue>& chain, const Expr& raw) { return ex.apply_chain(step, chain, raw, site); });
  Executor::add_guard(step, c.guard);
  if (c.fresh_hd) step.consumed.push_back(*c.fresh_hd);
  for (auto& path : ex.apply(key.fn, {SymValue{c.head}, step.value}, step, site)) {
    if (Executor::dead(path)) continue;
    out.push_back({inputs, path.pc, path.calls, path.obligations, outputs_of(path, rel), path.consumed});
  }
  return out;
}

std::vector<BranchSummary> Encoder::summarize(const std::string& rel) {
  const RelationSymbol* r = nullptr;
  for (const auto& x : relations_)
    if (x.name == rel) r = &x;
  if (!r) throw std::logic_error("unknown relation " + rel);
  RelationSymbol copy = *r;  // summarizing may instantiate further relations
  const Instance inst = instances_.at(rel);
  return inst.fold ? summarize_fold(copy, inst) : summarize_function(copy, inst);
}

std::vector<Clause> encode_function(const RelationSymbol& rel, const std::vector<BranchSummary>& summaries, VarGen& gen) {
  std::vector<Clause> out;
  for (const auto& s : summaries) {
    Clause c;
    RelAtom head;
    head.rel = rel.name;
    head.args = s.inputs;
    std::size_t oi = 0;
    for (const auto& a : rel.args) {
      if (a.role == ArgRole::ValueIn || a.role == ArgRole::GlobalIn) continue;
      Expr v = gen.fresh(a.name, a.sort);
      head.args.push_back(v);
      c.bindings.push_back(Expr::eq(v, s.outputs.at(oi++)));
    }
    if (head.args.size() != rel.arity()) throw std::logic_error("arity mismatch while encoding " + rel.name);
    if (oi != s.outputs.size()) throw std::logic_error("output count mismatch while encoding " + rel.name);
    c.head = head;
    c.atoms = s.calls;
    c.guards = s.pc;
    c.consumed = s.consumed;
    out.push_back(std::move(c));
  }
  return out;
}

Clause encode_query(const std::vector<Expr>& pre, const std::vector<RelAtom>& calls, const std::vector<Obligation>& obligations,
                    const std::vector<Expr>& list_lengths) {
  Clause q;
  q.atoms = calls;
  Expr bad = Expr::not_(obligations_formula(obligations));
  std::vector<Expr> mentioned;
  for (const auto& a : calls)
    for (const auto& e : a.args) free_vars(e, mentioned);
  for (const auto& e : pre) free_vars(e, mentioned);
  free_vars(bad, mentioned);
  for (const auto& len : list_lengths)
    for (const auto& m : mentioned)
      if (m.name() == len.name()) {
        q.guards.push_back(Expr::ge(len, Expr::int_lit(0)));
        break;
      }
  for (const auto& p : pre) q.guards.push_back(p);
  q.bindings.push_back(bad);
  return q;
}

EncodedProgram Encoder::encode() {
  if (!program_.has_assertions()) {
    SourceLoc loc;
    for (const auto& st : program_.main)
      if (st.kind == TopStmt::Kind::Verify) loc = st.loc;
    throw SourceError(program_.file, loc, "vacuous verification: the program contains no assertions");
  }
  EncodedProgram result;
  result.sources = sources_;
  Executor ex(program_, gen_, *sources_, *this, "main");
  std::vector<Path> paths{Path{}};
  std::vector<Expr> lengths;
  for (const auto& st : program_.main) {
    std::vector<Path> next;
    switch (st.kind) {
      case TopStmt::Kind::Declare: {
        const GlobalDef* g = program_.find_global(st.name);
        SymValue v;
        if (g->type->is(Type::Kind::List)) {
          Expr len = Expr::var("len." + st.name, Sort::Int);
          v = SymList{{}, ListTail{sources_->fresh(len, st.name), len, {}}};
          lengths.push_back(len);
          result.declared_lists.emplace(st.name, len);
        } else {
          v = Expr::var(st.name, sort_of(*g->type));
        }
        for (auto& p : paths) p.globals[st.name] = v;
        continue;
      }
      case TopStmt::Kind::DefineValue:
      case TopStmt::Kind::DefineGlobal:
        for (auto& p : paths)
          for (auto& q : ex.run(st.exprs[0], p, {})) {
            q.globals[st.name] = q.value;
            next.push_back(std::move(q));
          }
        break;
      case TopStmt::Kind::Assume:
        for (auto& p : paths)
          for (auto& q : ex.run(st.exprs[0], p, {})) {
            Executor::add_block(q, std::get<Expr>(q.value));
            if (!Executor::dead(q)) next.push_back(std::move(q));
          }
        break;
      case TopStmt::Kind::Assert:
      case TopStmt::Kind::Verify:
        next = paths;
        for (const auto& e : st.exprs) {
          std::vector<Path> cur;
          for (auto& p : next)
            for (auto& q : ex.run(e, p, {})) {
              q.obligations.push_back({Expr::bool_lit(true), std::get<Expr>(q.value)});
              cur.push_back(std::move(q));
            }
          next = std::move(cur);
        }
        break;
    }
    paths = std::move(next);
  }

  std::vector<BranchSummary> main_summaries;
  for (const auto& p : paths) main_summaries.push_back({{}, p.pc, p.calls, p.obligations, {}, p.consumed});

  // Relations instantiated while executing may instantiate more; process in creation order.
  std::map<std::string, std::vector<Clause>> clauses;
  for (std::size_t i = 0; i < relations_.size(); ++i) {
    RelationSymbol rel = relations_[i];
    auto sums = summarize(rel.name);
    clauses[rel.name] = encode_function(rel, sums, gen_);
    result.summaries.emplace_back(rel.name, std::move(sums));
  }
  result.summaries.emplace_back("main", main_summaries);

  ChcSystem& sys = result.system;
  sys.relations = relations_;
  for (const auto& r : relations_)
    for (auto& c : clauses[r.name]) sys.clauses.push_back(std::move(c));
  if (paths.size() == 1) {
    sys.clauses.push_back(encode_query(paths[0].pc, paths[0].calls, paths[0].obligations, lengths));
  } else {
    RelationSymbol main_rel;
    main_rel.name = "main";
    main_rel.origin = "main";
    main_rel.args.push_back({"ok", Sort::Bool, ArgRole::Ok});
    for (const auto& p : paths) {
      Clause q = encode_query(p.pc, p.calls, p.obligations, lengths);
      Expr ok = gen_.fresh("ok", Sort::Bool);
      q.head = RelAtom{"main", {ok}, std::nullopt};
      q.bindings.back() = Expr::eq(ok, Expr::not_(q.bindings.back()));
      q.consumed = p.consumed;
      sys.clauses.push_back(std::move(q));
    }
    sys.relations.push_back(main_rel);
    Clause query;
    Expr ok = gen_.fresh("ok", Sort::Bool);
    query.atoms.push_back(RelAtom{"main", {ok}, std::nullopt});
    query.bindings.push_back(Expr::not_(ok));
    sys.clauses.push_back(std::move(query));
  }
  for (const auto& [src, uses] : iterations_) sys.list_sources[src] = uses;
  sys.validate();
  return result;
}

EncodedProgram encode_program(const Program& program) {
  Encoder enc(program);
  return enc.encode();
}

}  // namespace chcv
