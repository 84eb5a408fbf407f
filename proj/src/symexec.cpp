#include "chcv/symexec.hpp"

#include <stdexcept>

namespace chcv {

namespace {

constexpr int kMaxInlineDepth = 64;

const Expr& as_expr(const SymValue& v) {
  if (const Expr* e = std::get_if<Expr>(&v)) return *e;
  throw std::logic_error("expected a scalar value, got " + to_string(v));
}

const SymList& as_list(const SymValue& v) {
  if (const SymList* l = std::get_if<SymList>(&v)) return *l;
  throw std::logic_error("expected a list value, got " + to_string(v));
}

const FnValue& as_fn(const SymValue& v) {
  if (const FnValue* f = std::get_if<FnValue>(&v)) return *f;
  throw std::logic_error("expected a function value, got " + to_string(v));
}

Expr conj(const std::vector<Expr>& v, std::size_t from) {
  return Expr::and_(std::vector<Expr>(v.begin() + static_cast<std::ptrdiff_t>(from), v.end()));
}

}  // namespace

std::string to_string(const SymValue& v) {
  if (const Expr* e = std::get_if<Expr>(&v)) return to_text(*e);
  if (const SymList* l = std::get_if<SymList>(&v)) return to_string(*l);
  if (const FnValue* f = std::get_if<FnValue>(&v)) return "#<fn " + to_string(*f) + ">";
  return "#<void>";
}

Sort sort_of(const Type& t) { return t.is(Type::Kind::Bool) ? Sort::Bool : Sort::Int; }

std::vector<Expr> flatten(const SymValue& v) {
  if (const Expr* e = std::get_if<Expr>(&v)) return {*e};
  if (const SymList* l = std::get_if<SymList>(&v)) return {builtin_length(*l)};
  if (std::holds_alternative<UnitValue>(v)) return {};
  throw std::logic_error("functional value cannot be passed through a relation");
}

std::optional<SymValue> merge(const Expr& guard, const SymValue& a, const SymValue& b) {
  if (a.index() != b.index()) return std::nullopt;
  if (const Expr* x = std::get_if<Expr>(&a)) {
    const Expr& y = std::get<Expr>(b);
    if (x->sort() != y.sort()) return std::nullopt;
    return SymValue{Expr::ite(guard, *x, y)};
  }
  if (const SymList* x = std::get_if<SymList>(&a)) {
    const SymList& y = std::get<SymList>(b);
    if (*x == y) return a;
    if (x->prefix.size() != y.prefix.size() || x->tail.has_value() != y.tail.has_value()) return std::nullopt;
    if (x->tail && !(*x->tail == *y.tail)) return std::nullopt;
    SymList m;
    m.tail = x->tail;
    for (std::size_t i = 0; i < x->prefix.size(); ++i) m.prefix.push_back(Expr::ite(guard, x->prefix[i], y.prefix[i]));
    return SymValue{m};
  }
  if (std::holds_alternative<FnValue>(a)) {
    if (std::get<FnValue>(a) == std::get<FnValue>(b)) return a;
    return std::nullopt;
  }
  return a;
}

std::string to_text(const BranchSummary& s) {
  std::string out;
  auto sep = [&] {
    if (!out.empty()) out += " ∧ ";
  };
  for (const auto& p : s.pc) {
    sep();
    out += to_text(p);
  }
  for (const auto& c : s.calls) {
    sep();
    out += to_text(c);
  }
  if (out.empty()) out = "true";
  out += " ⊢ (";
  for (std::size_t i = 0; i < s.outputs.size(); ++i) out += (i ? ", " : "") + to_text(s.outputs[i]);
  out += ")";
  for (const auto& o : s.obligations)
    out += "  [assert " + (o.guard.is_true() ? to_text(o.formula) : to_text(o.guard) + " => " + to_text(o.formula)) + "]";
  return out;
}

std::string FoldKey::canonical() const {
  std::string s = std::string(list_op_name(direction)) + "|" + to_string(fn) + "|";
  for (const auto& f : chain) s += to_string(f) + ",";
  return s + "|" + std::string(sort_name(acc));
}

Expr builtin_apply(const std::string& name, const std::vector<Expr>& a) {
  auto need = [&](std::size_t n) {
    if (a.size() != n) throw std::logic_error("builtin '" + name + "' applied to " + std::to_string(a.size()) + " argument(s)");
  };
  if (name == "+") return Expr::add(a);
  if (name == "-") {
    if (a.size() == 1) return Expr::neg(a[0]);
    std::vector<Expr> rest(a.begin() + 1, a.end());
    return Expr::sub(a.at(0), Expr::add(rest));
  }
  if (name == "min" || name == "max") {
    Expr r = a.at(0);
    for (std::size_t i = 1; i < a.size(); ++i)
      r = name == "min" ? Expr::ite(Expr::le(r, a[i]), r, a[i]) : Expr::ite(Expr::le(a[i], r), r, a[i]);
    return r;
  }
  if (name == "abs") {
    need(1);
    return Expr::ite(Expr::lt(a[0], Expr::int_lit(0)), Expr::neg(a[0]), a[0]);
  }
  if (name == "not") {
    need(1);
    return Expr::not_(a[0]);
  }
  need(2);
  if (name == "=" || name == "equal?" || name == "eq?") return Expr::eq(a[0], a[1]);
  if (name == "<") return Expr::lt(a[0], a[1]);
  if (name == "<=") return Expr::le(a[0], a[1]);
  if (name == ">") return Expr::gt(a[0], a[1]);
  if (name == ">=") return Expr::ge(a[0], a[1]);
  throw std::logic_error("unknown builtin '" + name + "'");
}

Executor::Executor(const Program& program, VarGen& gen, SourceRegistry& sources, CallResolver& resolver, std::string consumer)
    : program_(program), gen_(gen), sources_(sources), resolver_(resolver), consumer_(std::move(consumer)) {}

void Executor::fail(const CoreExpr& site, const std::string& msg) const { throw SourceError(program_.file, site.loc, msg); }

void Executor::add_guard(Path& p, const Expr& g) {
  if (g.is_true()) return;
  if (g.op() == Expr::Op::And) {
    for (const auto& k : g.kids()) add_guard(p, k);
    return;
  }
  for (const auto& e : p.pc)
    if (e == g) return;
  p.pc.push_back(g);
}

void Executor::add_block(Path& p, const Expr& g) {
  bool pending = false;
  for (const auto& o : p.obligations) pending = pending || !o.formula.is_true();
  if (!pending) return add_guard(p, g);
  std::vector<Expr> held;
  for (const auto& o : p.obligations) held.push_back(Expr::implies(o.guard, o.formula));
  add_guard(p, Expr::or_(g, Expr::not_(Expr::and_(held))));
}

bool Executor::dead(const Path& p) {
  for (const auto& e : p.pc)
    if (e.is_false()) return true;
  return false;
}

SymValue Executor::fresh_value(const Type& t, const std::string& base, Expr* flat) {
  switch (t.kind) {
    case Type::Kind::Int:
    case Type::Kind::Bool: {
      Expr v = gen_.fresh(base, sort_of(t));
      if (flat) *flat = v;
      return v;
    }
    case Type::Kind::List: {
      Expr len = gen_.fresh(base, Sort::Int);
      if (flat) *flat = len;
      return SymList{{}, ListTail{sources_.fresh(len, consumer_ + ":" + base), len, {}}};
    }
    case Type::Kind::Unit:
      return UnitValue{};
    case Type::Kind::Fn:
      break;
  }
  throw std::logic_error("cannot create a fresh functional value");
}

SymValue Executor::from_flat(const Type& t, const Expr& flat, Path& path) {
  switch (t.kind) {
    case Type::Kind::Int:
    case Type::Kind::Bool:
      return flat;
    case Type::Kind::List:
      add_guard(path, Expr::ge(flat, Expr::int_lit(0)));
      return SymList{{}, ListTail{sources_.fresh(flat, consumer_ + ":result"), flat, {}}};
    case Type::Kind::Unit:
      return UnitValue{};
    case Type::Kind::Fn:
      break;
  }
  throw std::logic_error("functional value cannot be passed through a relation");
}

std::vector<Executor::Valued> Executor::run_all(const std::vector<CoreExpr>& args, const Path& start, const Env& env) {
  std::vector<Valued> cur;
  cur.push_back({start, {}});
  for (const auto& a : args) {
    std::vector<Valued> next;
    for (auto& [p, vals] : cur)
      for (auto& q : run(a, p, env)) {
        auto v = vals;
        v.push_back(q.value);
        next.push_back({std::move(q), std::move(v)});
      }
    cur = std::move(next);
  }
  return cur;
}

std::vector<Path> Executor::run(const CoreExpr& e, const Path& start, const Env& env) {
  using K = CoreExpr::Kind;
  auto single = [&](SymValue v) {
    Path p = start;
    p.value = std::move(v);
    return std::vector<Path>{std::move(p)};
  };
  switch (e.kind) {
    case K::IntLit:
      return single(Expr::int_lit(e.value));
    case K::BoolLit:
      return single(Expr::bool_lit(e.value != 0));
    case K::UnitLit:
      return single(UnitValue{});
    case K::Local: {
      auto it = env.find(e.name);
      if (it == env.end()) fail(e, "internal: unbound local '" + e.name + "'");
      return single(it->second);
    }
    case K::Global: {
      auto it = start.globals.find(e.name);
      if (it == start.globals.end()) fail(e, "global '" + e.name + "' is read before its definition");
      return single(it->second);
    }
    case K::FunRef:
      return single(FnValue{FnValue::Kind::User, e.name});
    case K::BuiltinRef:
      return single(FnValue{FnValue::Kind::Builtin, e.name});
    case K::Prim:
      return run_prim(e, start, env);
    case K::If:
      return run_if(e, start, env);
    case K::Let: {
      std::vector<Path> out;
      for (auto& p : run(e.args[0], start, env)) {
        Env inner = env;
        inner[e.name] = p.value;
        for (auto& q : run(e.args[1], p, inner)) out.push_back(std::move(q));
      }
      return out;
    }
    case K::Call: {
      std::vector<Path> out;
      for (auto& [p, vals] : run_all(e.args, start, env))
        for (auto& q : call_user(e.name, vals, p, e)) out.push_back(std::move(q));
      return out;
    }
    case K::CallLocal: {
      auto it = env.find(e.name);
      if (it == env.end()) fail(e, "internal: unbound function parameter '" + e.name + "'");
      FnValue f = as_fn(it->second);
      std::vector<Path> out;
      for (auto& [p, vals] : run_all(e.args, start, env))
        for (auto& q : apply(f, vals, p, e)) out.push_back(std::move(q));
      return out;
    }
    case K::List:
      return run_list(e, start, env);
    case K::Assert:
    case K::Assume: {
      std::vector<Path> out;
      for (auto& p : run(e.args[0], start, env)) {
        Expr v = as_expr(p.value);
        if (e.kind == K::Assert)
          p.obligations.push_back({Expr::bool_lit(true), v});
        else
          add_block(p, v);
        p.value = UnitValue{};
        if (!dead(p)) out.push_back(std::move(p));
      }
      return out;
    }
    case K::SetGlobal: {
      std::vector<Path> out;
      for (auto& p : run(e.args[0], start, env)) {
        p.globals[e.name] = p.value;
        p.value = UnitValue{};
        out.push_back(std::move(p));
      }
      return out;
    }
    case K::Seq: {
      std::vector<Path> cur{start};
      cur[0].value = UnitValue{};
      for (const auto& a : e.args) {
        std::vector<Path> next;
        for (auto& p : cur)
          for (auto& q : run(a, p, env)) next.push_back(std::move(q));
        cur = std::move(next);
      }
      return cur;
    }
  }
  fail(e, "internal: unhandled expression");
}

namespace {

struct Marks {
  std::size_t pc, obligations, calls, consumed;
};

std::optional<Path> merge_paths(const Expr& c, const Path& base, const Marks& m, const Path& a, std::size_t a_pc,
                                const Path& b, std::size_t b_pc) {
  Path out = base;
  Executor::add_guard(out, Expr::implies(c, conj(a.pc, a_pc)));
  Executor::add_guard(out, Expr::implies(Expr::not_(c), conj(b.pc, b_pc)));
  for (std::size_t i = m.obligations; i < a.obligations.size(); ++i)
    out.obligations.push_back({Expr::and_(c, a.obligations[i].guard), a.obligations[i].formula});
  for (std::size_t i = m.obligations; i < b.obligations.size(); ++i)
    out.obligations.push_back({Expr::and_(Expr::not_(c), b.obligations[i].guard), b.obligations[i].formula});
  for (std::size_t i = m.consumed; i < a.consumed.size(); ++i) out.consumed.push_back(a.consumed[i]);
  for (std::size_t i = m.consumed; i < b.consumed.size(); ++i) out.consumed.push_back(b.consumed[i]);
  out.heads = a.heads;
  for (const auto& [k, v] : b.heads) {
    auto [it, fresh] = out.heads.emplace(k, v);
    if (!fresh && !(it->second == v)) Executor::add_guard(out, Expr::eq(it->second, v));
  }
  out.globals.clear();
  for (const auto& [name, va] : a.globals) {
    auto it = b.globals.find(name);
    if (it == b.globals.end()) return std::nullopt;
    auto mv = merge(c, va, it->second);
    if (!mv) return std::nullopt;
    out.globals.emplace(name, *mv);
  }
  if (b.globals.size() != a.globals.size()) return std::nullopt;
  auto v = merge(c, a.value, b.value);
  if (!v) return std::nullopt;
  out.value = *v;
  return out;
}

}  // namespace

std::vector<Path> Executor::run_if(const CoreExpr& e, const Path& start, const Env& env) {
  std::vector<Path> out;
  for (auto& p : run(e.args[0], start, env)) {
    Expr c = as_expr(p.value);
    if (c.is_true() || c.is_false()) {
      for (auto& q : run(e.args[c.is_true() ? 1 : 2], p, env)) out.push_back(std::move(q));
      continue;
    }
    Marks marks{p.pc.size(), p.obligations.size(), p.calls.size(), p.consumed.size()};
    auto arm = [&](const Expr& g, const CoreExpr& body, std::size_t& base_pc) {
      Path q = p;
      add_guard(q, g);
      base_pc = q.pc.size();
      std::vector<Path> res;
      if (dead(q)) return res;
      for (auto& r : run(body, q, env))
        if (!dead(r)) res.push_back(std::move(r));
      return res;
    };
    std::size_t then_pc = 0, else_pc = 0;
    auto then_paths = arm(c, e.args[1], then_pc);
    auto else_paths = arm(Expr::not_(c), e.args[2], else_pc);
    if (then_paths.size() == 1 && else_paths.size() == 1 && then_paths[0].calls.size() == marks.calls &&
        else_paths[0].calls.size() == marks.calls) {
      if (auto m = merge_paths(c, p, marks, then_paths[0], then_pc, else_paths[0], else_pc)) {
        out.push_back(std::move(*m));
        continue;
      }
    }
    for (auto& q : then_paths) out.push_back(std::move(q));
    for (auto& q : else_paths) out.push_back(std::move(q));
  }
  return out;
}

std::vector<Path> Executor::run_prim(const CoreExpr& e, const Path& start, const Env& env) {
  std::vector<Path> out;
  for (auto& [p, vals] : run_all(e.args, start, env)) {
    std::vector<Expr> a;
    for (const auto& v : vals) a.push_back(as_expr(v));
    Expr r;
    switch (e.prim) {
      case PrimOp::Add: r = Expr::add(a); break;
      case PrimOp::Sub: r = builtin_apply("-", a); break;
      case PrimOp::Neg: r = Expr::neg(a.at(0)); break;
      case PrimOp::Mul: {
        std::int64_t c = 1;
        std::optional<Expr> sym;
        for (const auto& x : a) {
          if (x.is_const()) c = checked_mul(c, x.value());
          else if (sym) fail(e, "non-linear multiplication");
          else sym = x;
        }
        r = sym ? Expr::mul(c, *sym) : Expr::int_lit(c);
        break;
      }
      case PrimOp::Eq: r = Expr::eq(a.at(0), a.at(1)); break;
      case PrimOp::Lt: r = Expr::lt(a.at(0), a.at(1)); break;
      case PrimOp::Le: r = Expr::le(a.at(0), a.at(1)); break;
      case PrimOp::Gt: r = Expr::gt(a.at(0), a.at(1)); break;
      case PrimOp::Ge: r = Expr::ge(a.at(0), a.at(1)); break;
      case PrimOp::Not: r = Expr::not_(a.at(0)); break;
      case PrimOp::Min: r = builtin_apply("min", a); break;
      case PrimOp::Max: r = builtin_apply("max", a); break;
      case PrimOp::Abs: r = builtin_apply("abs", a); break;
    }
    p.value = r;
    out.push_back(std::move(p));
  }
  return out;
}

Expr Executor::head_of(Path& p, const SymList& list, const CoreExpr& site) {
  if (!list.prefix.empty()) return list.prefix.front();
  if (!list.tail) {
    add_block(p, Expr::bool_lit(false));
    return Expr::int_lit(0);
  }
  const ListTail& t = *list.tail;
  add_block(p, Expr::gt(t.length, Expr::int_lit(0)));
  auto key = std::make_pair(t.source, to_smt(t.length));
  Expr raw;
  if (auto it = p.heads.find(key); it != p.heads.end()) {
    raw = it->second;
  } else {
    raw = gen_.fresh("hd", Sort::Int);
    sources_.register_head(t.source, consumer_, raw);
    p.heads.emplace(key, raw);
    p.consumed.push_back(raw);
  }
  return apply_chain(p, t.chain, raw, site);
}

Expr Executor::apply_chain(Path& path, const std::vector<FnValue>& chain, const Expr& raw, const CoreExpr& site) {
  Expr x = raw;
  SymValue saved = path.value;
  for (const auto& f : chain) {
    std::size_t calls = path.calls.size();
    auto res = apply(f, {SymValue{x}}, path, site);
    if (res.empty()) {
      add_block(path, Expr::bool_lit(false));
      break;
    }
    if (res.size() != 1 || res[0].calls.size() != calls)
      fail(site, "function '" + to_string(f) + "' applied element-wise must not branch into relation calls");
    SymValue v = res[0].value;
    path = std::move(res[0]);
    x = as_expr(v);
  }
  path.value = saved;
  return x;
}

void Executor::check_pure_map(const FnValue& f, const CoreExpr& site) const {
  if (f.kind == FnValue::Kind::Builtin) return;
  const FunctionDef* def = program_.find_function(f.name);
  bool ok = def && !def->recursive && !def->may_assert && def->writes.empty();
  if (ok)
    for (const auto& g : def->reads)
      if (const GlobalDef* gd = program_.find_global(g); gd && gd->kind == GlobalDef::Kind::Mutable) ok = false;
  if (!ok)
    fail(site, "function '" + f.name + "' passed to map must be non-recursive, free of assertions and independent of mutable globals");
}

std::vector<Path> Executor::run_list(const CoreExpr& e, const Path& start, const Env& env) {
  std::vector<Path> out;
  for (auto& [p, vals] : run_all(e.args, start, env)) {
    switch (e.list_op) {
      case ListOp::Literal: {
        SymList l;
        for (const auto& v : vals) l.prefix.push_back(as_expr(v));
        p.value = l;
        break;
      }
      case ListOp::Length:
        p.value = builtin_length(as_list(vals[0]));
        break;
      case ListOp::IsNull:
        p.value = Expr::eq(builtin_length(as_list(vals[0])), Expr::int_lit(0));
        break;
      case ListOp::Head:
        p.value = head_of(p, as_list(vals[0]), e);
        break;
      case ListOp::Tail: {
        SymList l = as_list(vals[0]);
        if (!l.prefix.empty()) {
          l.prefix.erase(l.prefix.begin());
        } else if (!l.tail) {
          add_block(p, Expr::bool_lit(false));
        } else {
          add_block(p, Expr::gt(l.tail->length, Expr::int_lit(0)));
          l.tail->length = Expr::sub(l.tail->length, Expr::int_lit(1));
        }
        p.value = l;
        break;
      }
      case ListOp::Cons: {
        SymList l = as_list(vals[1]);
        l.prefix.insert(l.prefix.begin(), as_expr(vals[0]));
        p.value = l;
        break;
      }
      case ListOp::Append:
        p.value = builtin_append(as_list(vals[0]), as_list(vals[1]), sources_);
        break;
      case ListOp::Map: {
        const FnValue& f = as_fn(vals[0]);
        check_pure_map(f, e);
        SymList mapped = fuse_map(f, as_list(vals[1]), [&](const Expr& x) { return apply_chain(p, {f}, x, e); });
        p.value = mapped;
        break;
      }
      case ListOp::Foldl:
      case ListOp::Foldr:
        for (auto& q : fold(e.list_op, as_fn(vals[0]), vals[1], as_list(vals[2]), p, e))
          if (!dead(q)) out.push_back(std::move(q));
        continue;
    }
    if (!dead(p)) out.push_back(std::move(p));
  }
  return out;
}

std::vector<Path> Executor::fold(ListOp dir, const FnValue& f, const SymValue& init, const SymList& list, const Path& start,
                                 const CoreExpr& site) {
  Path first = start;
  first.value = init;
  std::vector<Path> cur{first};
  auto step = [&](const Expr& elem) {
    std::vector<Path> next;
    for (auto& p : cur)
      for (auto& q : apply(f, {SymValue{elem}, p.value}, p, site)) next.push_back(std::move(q));
    cur = std::move(next);
  };
  if (dir == ListOp::Foldl)
    for (const auto& x : list.prefix) step(x);
  if (list.tail) {
    std::vector<Path> next;
    for (auto& p : cur) {
      Expr acc = as_expr(p.value);
      FoldKey key{dir, f, list.tail->chain, acc.sort()};
      RelationSymbol rel = resolver_.instantiate_fold(key);
      resolver_.note_iteration(list.tail->source, rel.name, consumer_);
      p.value = *emit_call(rel, {list.tail->length, acc}, p, site, list.tail->source);
      next.push_back(std::move(p));
    }
    cur = std::move(next);
  }
  if (dir == ListOp::Foldr)
    for (auto it = list.prefix.rbegin(); it != list.prefix.rend(); ++it) step(*it);
  return cur;
}

std::optional<Expr> Executor::emit_call(const RelationSymbol& rel, const std::vector<Expr>& value_in, Path& p,
                                       const CoreExpr& site, std::optional<int> source) {
  RelAtom atom;
  atom.rel = rel.name;
  atom.source = source;
  std::size_t vi = 0;
  std::optional<Expr> res, ok;
  std::vector<std::pair<std::string, Expr>> gouts;
  for (const auto& a : rel.args) {
    switch (a.role) {
      case ArgRole::ValueIn:
        atom.args.push_back(value_in.at(vi++));
        break;
      case ArgRole::GlobalIn: {
        auto it = p.globals.find(a.name);
        if (it == p.globals.end()) fail(site, "global '" + a.name + "' is read before its definition");
        atom.args.push_back(flatten(it->second).at(0));
        break;
      }
      case ArgRole::Out:
        res = gen_.fresh(a.name, a.sort);
        atom.args.push_back(*res);
        break;
      case ArgRole::GlobalOut: {
        Expr v = gen_.fresh(a.name, a.sort);
        gouts.emplace_back(a.name, v);
        atom.args.push_back(v);
        break;
      }
      case ArgRole::Ok:
        ok = gen_.fresh("ok", Sort::Bool);
        atom.args.push_back(*ok);
        break;
    }
  }
  p.calls.push_back(atom);
  for (auto& [g, v] : gouts) p.globals[g] = from_flat(*program_.find_global(g)->type, v, p);
  if (ok) p.obligations.push_back({Expr::bool_lit(true), *ok});
  return res;
}

std::vector<Path> Executor::apply(const FnValue& f, std::vector<SymValue> args, const Path& start, const CoreExpr& site) {
  if (f.kind == FnValue::Kind::Builtin) {
    std::vector<Expr> a;
    for (const auto& v : args) a.push_back(as_expr(v));
    Path p = start;
    p.value = builtin_apply(f.name, a);
    return {p};
  }
  return call_user(f.name, std::move(args), start, site);
}

std::vector<Path> Executor::call_user(const std::string& name, std::vector<SymValue> args, const Path& start,
                                      const CoreExpr& site) {
  const FunctionDef* def = program_.find_function(name);
  if (!def) fail(site, "internal: unknown function '" + name + "'");
  if (args.size() != def->params.size())
    fail(site, "'" + name + "' expects " + std::to_string(def->params.size()) + " argument(s), got " + std::to_string(args.size()));
  if (!def->recursive) {
    if (depth_ >= kMaxInlineDepth) fail(site, "inlining depth limit exceeded at call of '" + name + "'");
    Env env;
    for (std::size_t i = 0; i < args.size(); ++i) env[def->params[i].name] = args[i];
    ++depth_;
    std::vector<Path> out;
    try {
      for (auto& q : run(def->body, start, env))
        if (!dead(q)) out.push_back(std::move(q));
    } catch (...) {
      --depth_;
      throw;
    }
    --depth_;
    return out;
  }
  FnAssignment assignment;
  std::vector<Expr> value_in;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (def->params[i].is_function || def->params[i].type->is(Type::Kind::Fn))
      assignment[def->params[i].name] = as_fn(args[i]);
    else
      for (auto& x : flatten(args[i])) value_in.push_back(x);
  }
  RelationSymbol rel = resolver_.instantiate(name, assignment);
  Path p = start;
  auto res = emit_call(rel, value_in, p, site, std::nullopt);
  p.value = res ? from_flat(*def->ret, *res, p) : SymValue{UnitValue{}};
  return {p};
}

}  // namespace chcv
