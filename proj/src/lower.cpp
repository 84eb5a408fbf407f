#include <algorithm>
#include <deque>
#include <functional>
#include <unordered_map>

#include "chcv/core.hpp"

namespace chcv {

TypePtr Type::make(Kind k) {
  auto t = std::make_shared<Type>();
  t->kind = k;
  return t;
}

std::string to_string(const Type& t) {
  switch (t.kind) {
    case Type::Kind::Int:
      return "int";
    case Type::Kind::Bool:
      return "bool";
    case Type::Kind::List:
      return "list";
    case Type::Kind::Unit:
      return "void";
    case Type::Kind::Fn: {
      std::string s = "(fn (";
      for (std::size_t i = 0; i < t.params.size(); ++i) s += (i ? " " : "") + to_string(*t.params[i]);
      return s + ") " + to_string(*t.ret) + ")";
    }
  }
  return "?";
}

std::string_view prim_name(PrimOp op) {
  switch (op) {
    case PrimOp::Add: return "+";
    case PrimOp::Sub: return "-";
    case PrimOp::Neg: return "neg";
    case PrimOp::Mul: return "*";
    case PrimOp::Eq: return "=";
    case PrimOp::Lt: return "<";
    case PrimOp::Le: return "<=";
    case PrimOp::Gt: return ">";
    case PrimOp::Ge: return ">=";
    case PrimOp::Not: return "not";
    case PrimOp::Min: return "min";
    case PrimOp::Max: return "max";
    case PrimOp::Abs: return "abs";
  }
  return "?";
}

std::string_view list_op_name(ListOp op) {
  switch (op) {
    case ListOp::Length: return "length";
    case ListOp::Head: return "head";
    case ListOp::Tail: return "tail";
    case ListOp::Cons: return "cons";
    case ListOp::Append: return "append";
    case ListOp::Literal: return "list";
    case ListOp::IsNull: return "null?";
    case ListOp::Map: return "map";
    case ListOp::Foldl: return "foldl";
    case ListOp::Foldr: return "foldr";
  }
  return "?";
}

std::size_t FunctionDef::value_arity() const {
  return static_cast<std::size_t>(std::count_if(params.begin(), params.end(), [](const Param& p) { return !p.is_function; }));
}

const FunctionDef* Program::find_function(const std::string& name) const {
  for (const auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

const GlobalDef* Program::find_global(const std::string& name) const {
  for (const auto& g : globals)
    if (g.name == name) return &g;
  return nullptr;
}

namespace {

bool contains_assert(const CoreExpr& e) {
  if (e.kind == CoreExpr::Kind::Assert) return true;
  return std::any_of(e.args.begin(), e.args.end(), contains_assert);
}

void collect_globals(const CoreExpr& e, std::set<std::string>& reads, std::set<std::string>& writes) {
  if (e.kind == CoreExpr::Kind::Global) reads.insert(e.name);
  if (e.kind == CoreExpr::Kind::SetGlobal) writes.insert(e.name);
  for (const auto& a : e.args) collect_globals(a, reads, writes);
}

// ---------------------------------------------------------------------------
// Monomorphic type inference by unification.

struct TNode {
  enum class K { Var, Int, Bool, List, Unit, Fn };
  K k = K::Var;
  std::vector<TNode*> params;
  TNode* ret = nullptr;
  TNode* parent = nullptr;
};

class Types {
 public:
  explicit Types(const std::string& file) : file_(file) {}

  TNode* fresh(TNode::K k = TNode::K::Var) {
    pool_.emplace_back();
    pool_.back().k = k;
    return &pool_.back();
  }
  TNode* fn(std::vector<TNode*> params, TNode* ret) {
    TNode* t = fresh(TNode::K::Fn);
    t->params = std::move(params);
    t->ret = ret;
    return t;
  }

  TNode* find(TNode* t) {
    while (t->parent) {
      if (t->parent->parent) t->parent = t->parent->parent;
      t = t->parent;
    }
    return t;
  }

  std::string show(TNode* t) {
    t = find(t);
    switch (t->k) {
      case TNode::K::Var: return "?";
      case TNode::K::Int: return "int";
      case TNode::K::Bool: return "bool";
      case TNode::K::List: return "list";
      case TNode::K::Unit: return "void";
      case TNode::K::Fn: {
        std::string s = "(fn (";
        for (std::size_t i = 0; i < t->params.size(); ++i) s += (i ? " " : "") + show(t->params[i]);
        return s + ") " + show(t->ret) + ")";
      }
    }
    return "?";
  }

  void unify(TNode* a, TNode* b, SourceLoc loc, const std::string& what) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a->k == TNode::K::Var) {
      if (occurs(a, b)) mismatch(a, b, loc, what);
      a->parent = b;
      return;
    }
    if (b->k == TNode::K::Var) {
      unify(b, a, loc, what);
      return;
    }
    if (a->k != b->k) mismatch(a, b, loc, what);
    if (a->k == TNode::K::Fn) {
      if (a->params.size() != b->params.size()) mismatch(a, b, loc, what);
      for (std::size_t i = 0; i < a->params.size(); ++i) unify(a->params[i], b->params[i], loc, what);
      unify(a->ret, b->ret, loc, what);
    }
  }

  bool is(TNode* t, TNode::K k) { return find(t)->k == k; }

  TypePtr resolve(TNode* t) {
    t = find(t);
    switch (t->k) {
      case TNode::K::Var:
      case TNode::K::Int: return Type::make(Type::Kind::Int);
      case TNode::K::Bool: return Type::make(Type::Kind::Bool);
      case TNode::K::List: return Type::make(Type::Kind::List);
      case TNode::K::Unit: return Type::make(Type::Kind::Unit);
      case TNode::K::Fn: {
        auto r = std::make_shared<Type>();
        r->kind = Type::Kind::Fn;
        for (auto* p : t->params) r->params.push_back(resolve(p));
        r->ret = resolve(t->ret);
        return r;
      }
    }
    return Type::make(Type::Kind::Int);
  }

 private:
  bool occurs(TNode* v, TNode* t) {
    t = find(t);
    if (t == v) return true;
    if (t->k != TNode::K::Fn) return false;
    for (auto* p : t->params)
      if (occurs(v, p)) return true;
    return occurs(v, t->ret);
  }
  [[noreturn]] void mismatch(TNode* a, TNode* b, SourceLoc loc, const std::string& what) {
    throw SourceError(file_, loc, "type mismatch in " + what + ": " + show(a) + " vs " + show(b));
  }

  std::deque<TNode> pool_;
  const std::string& file_;
};

// ---------------------------------------------------------------------------

struct Binding {
  std::string surface;
  std::string unique;
  TNode* type;
};

struct FnCtx {
  std::string owner;                 // function being lowered ("" for main)
  std::set<std::string>* callees;    // edges of the owner
  std::vector<Binding> scope;
  const FnCtx* outer = nullptr;      // enclosing context of a lambda, for capture diagnostics
  std::unordered_map<std::string, int>* counters;
};

struct FnInfo {
  std::size_t index;
  std::vector<TNode*> params;
  TNode* ret;
};

struct GlobalInfo {
  GlobalDef::Kind kind;
  TNode* type;
};

const std::set<std::string> kValuePrims = {"+", "-", "=", "<", "<=", ">", ">=", "not", "min", "max", "abs"};

class Lowerer {
 public:
  explicit Lowerer(const SurfaceProgram& sp) : sp_(sp), types_(sp.file) { program_.file = sp.file; }

  Program run() {
    declare_top_level();
    // Functions first so that bodies may reference each other in any order.
    for (const auto& f : sp_.forms)
      if (f.kind == Form::Kind::DefineFunction) lower_function(f);
    lower_main();
    finish_types();
    compute_call_graph_facts(program_);
    return std::move(program_);
  }

 private:
  const SurfaceProgram& sp_;
  Types types_;
  Program program_;
  std::unordered_map<std::string, FnInfo> fns_;
  std::unordered_map<std::string, GlobalInfo> globals_;
  std::set<std::string> main_defined_;
  std::vector<std::pair<TNode*, SourceLoc>> no_fn_checks_;
  std::vector<std::pair<TNode*, SourceLoc>> fold_acc_checks_;
  std::vector<std::pair<std::size_t, std::vector<TNode*>>> param_types_;  // function index -> param nodes
  int lambda_count_ = 0;

  [[noreturn]] void fail(SourceLoc loc, const std::string& msg) const { throw SourceError(sp_.file, loc, msg); }

  TNode* int_t() { return types_.fresh(TNode::K::Int); }
  TNode* bool_t() { return types_.fresh(TNode::K::Bool); }
  TNode* list_t() { return types_.fresh(TNode::K::List); }
  TNode* unit_t() { return types_.fresh(TNode::K::Unit); }

  void check_fresh_name(const std::string& name, SourceLoc loc) {
    if (fns_.count(name) || globals_.count(name)) fail(loc, "duplicate definition of '" + name + "'");
  }

  void declare_top_level() {
    for (const auto& f : sp_.forms) {
      switch (f.kind) {
        case Form::Kind::DefineFunction: {
          check_fresh_name(f.names[0], f.loc);
          FunctionDef def;
          def.name = f.names[0];
          def.loc = f.loc;
          FnInfo info{program_.functions.size(), {}, types_.fresh()};
          std::set<std::string> seen;
          for (const auto& p : f.params) {
            if (!seen.insert(p.name).second) fail(p.loc, "duplicate parameter '" + p.name + "'");
            info.params.push_back(types_.fresh());
          }
          program_.functions.push_back(std::move(def));
          fns_.emplace(f.names[0], std::move(info));
          break;
        }
        case Form::Kind::DefineValue:
        case Form::Kind::DefineGlobal:
        case Form::Kind::DeclareSymbolic:
          for (const auto& n : f.names) {
            check_fresh_name(n, f.loc);
            GlobalDef g;
            g.name = n;
            g.loc = f.loc;
            g.kind = f.kind == Form::Kind::DeclareSymbolic ? GlobalDef::Kind::Symbolic
                     : f.kind == Form::Kind::DefineGlobal  ? GlobalDef::Kind::Mutable
                                                           : GlobalDef::Kind::Value;
            TNode* t = types_.fresh();
            if (f.kind == Form::Kind::DeclareSymbolic)
              t = types_.fresh(f.sort == SymbolicSort::Int    ? TNode::K::Int
                               : f.sort == SymbolicSort::Bool ? TNode::K::Bool
                                                              : TNode::K::List);
            globals_.emplace(n, GlobalInfo{g.kind, t});
            no_fn_checks_.push_back({t, f.loc});
            program_.globals.push_back(std::move(g));
          }
          break;
        default:
          break;
      }
    }
  }

  std::string bind(FnCtx& ctx, const std::string& surface, TNode* type) {
    int& n = (*ctx.counters)[surface];
    std::string unique = n == 0 ? surface : surface + "~" + std::to_string(n);
    ++n;
    ctx.scope.push_back({surface, unique, type});
    return unique;
  }

  const Binding* lookup_local(const FnCtx& ctx, const std::string& name) const {
    for (auto it = ctx.scope.rbegin(); it != ctx.scope.rend(); ++it)
      if (it->surface == name) return &*it;
    return nullptr;
  }

  void lower_function(const Form& f) {
    const std::size_t index = fns_.at(f.names[0]).index;
    const std::string name = f.names[0];
    std::unordered_map<std::string, int> counters;
    std::set<std::string> callees;
    FnCtx ctx{name, &callees, {}, nullptr, &counters};
    std::vector<Param> params;
    std::vector<TNode*> nodes = fns_.at(name).params;
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      Param p;
      p.is_function = f.params[i].is_function;
      p.name = bind(ctx, f.params[i].name, nodes[i]);
      params.push_back(std::move(p));
    }
    if (f.body.empty()) fail(f.loc, "function '" + name + "' has an empty body");
    auto [body, type] = lower_body(f.body, ctx, f.loc);
    types_.unify(fns_.at(name).ret, type, f.loc, "return value of '" + name + "'");
    // Nested lambda lifting may have grown `functions`; index again.
    FunctionDef& def = program_.functions[index];
    def.params = std::move(params);
    def.body = std::move(body);
    def.callees = std::move(callees);
    param_types_.push_back({index, nodes});
  }

  std::pair<CoreExpr, TNode*> lower_body(const std::vector<Sexp>& body, FnCtx& ctx, SourceLoc loc) {
    if (body.size() == 1) return lower(body[0], ctx);
    CoreExpr seq;
    seq.kind = CoreExpr::Kind::Seq;
    seq.loc = loc;
    TNode* last = unit_t();
    for (const auto& b : body) {
      auto [e, t] = lower(b, ctx);
      seq.args.push_back(std::move(e));
      last = t;
    }
    if (seq.args.empty()) seq.kind = CoreExpr::Kind::UnitLit;
    return {std::move(seq), last};
  }

  static CoreExpr node(CoreExpr::Kind k, SourceLoc loc) {
    CoreExpr e;
    e.kind = k;
    e.loc = loc;
    return e;
  }
  static CoreExpr bool_lit(bool v, SourceLoc loc) {
    CoreExpr e = node(CoreExpr::Kind::BoolLit, loc);
    e.value = v;
    return e;
  }
  static CoreExpr if_node(CoreExpr c, CoreExpr t, CoreExpr e, SourceLoc loc) {
    CoreExpr n = node(CoreExpr::Kind::If, loc);
    n.args.push_back(std::move(c));
    n.args.push_back(std::move(t));
    n.args.push_back(std::move(e));
    return n;
  }

  void expect_args(const Sexp& s, std::size_t lo, std::size_t hi) {
    std::size_t n = s.items.size() - 1;
    if (n < lo || n > hi) {
      std::string want = lo == hi ? std::to_string(lo) : hi == SIZE_MAX ? "at least " + std::to_string(lo)
                                                                           : std::to_string(lo) + "-" + std::to_string(hi);
      fail(s.loc, "'" + std::string(s.head()) + "' expects " + want + " argument(s), got " + std::to_string(n));
    }
  }

  CoreExpr lower_typed(const Sexp& s, FnCtx& ctx, TNode* want, const std::string& what) {
    auto [e, t] = lower(s, ctx);
    types_.unify(want, t, s.loc, what);
    return std::move(e);
  }

  std::pair<CoreExpr, TNode*> builtin_value(const std::string& name, SourceLoc loc) {
    CoreExpr e = node(CoreExpr::Kind::BuiltinRef, loc);
    e.name = name;
    TNode* t;
    if (name == "+" || name == "-" || name == "min" || name == "max")
      t = types_.fn({int_t(), int_t()}, int_t());
    else if (name == "abs")
      t = types_.fn({int_t()}, int_t());
    else if (name == "not")
      t = types_.fn({bool_t()}, bool_t());
    else
      t = types_.fn({int_t(), int_t()}, bool_t());
    return {std::move(e), t};
  }

  std::pair<CoreExpr, TNode*> lower_symbol(const Sexp& s, FnCtx& ctx) {
    const std::string& name = s.text;
    if (const Binding* b = lookup_local(ctx, name)) {
      CoreExpr e = node(CoreExpr::Kind::Local, s.loc);
      e.name = b->unique;
      return {std::move(e), b->type};
    }
    for (const FnCtx* o = ctx.outer; o; o = o->outer)
      if (lookup_local(*o, name))
        fail(s.loc, "lambda captures local variable '" + name + "'; only closed lambdas are supported");
    if (auto it = fns_.find(name); it != fns_.end()) {
      CoreExpr e = node(CoreExpr::Kind::FunRef, s.loc);
      e.name = name;
      ctx.callees->insert(name);
      return {std::move(e), types_.fn(it->second.params, it->second.ret)};
    }
    if (auto it = globals_.find(name); it != globals_.end()) {
      if (ctx.owner.empty() && !main_defined_.count(name)) fail(s.loc, "'" + name + "' is used before its definition");
      CoreExpr e = node(CoreExpr::Kind::Global, s.loc);
      e.name = name;
      return {std::move(e), it->second.type};
    }
    if (name == "empty" || name == "null") {
      CoreExpr e = node(CoreExpr::Kind::List, s.loc);
      e.list_op = ListOp::Literal;
      return {std::move(e), list_t()};
    }
    if (kValuePrims.count(name)) return builtin_value(name, s.loc);
    if (name == "*") fail(s.loc, "'*' cannot be used as a function value (multiplication must have a constant operand)");
    fail(s.loc, "unbound identifier '" + name + "'");
  }

  static bool is_int_literal(const Sexp& s) {
    if (s.kind == Sexp::Kind::Int) return true;
    return s.is_list() && s.items.size() == 2 && s.items[0].is_symbol("-") && s.items[1].kind == Sexp::Kind::Int;
  }

  std::pair<CoreExpr, TNode*> lower_lambda(const Sexp& s, FnCtx& ctx) {
    if (s.items.size() < 3 || !s.items[1].is_list()) fail(s.loc, "malformed lambda");
    FunctionDef def;
    def.name = "lambda@" + std::to_string(s.loc.line) + ":" + std::to_string(s.loc.col);
    if (fns_.count(def.name)) def.name += "#" + std::to_string(++lambda_count_);
    def.loc = s.loc;
    def.is_lambda = true;
    FnInfo info{program_.functions.size(), {}, types_.fresh()};
    program_.functions.push_back(def);
    auto& added = fns_.emplace(def.name, std::move(info)).first->second;
    std::unordered_map<std::string, int> counters;
    std::set<std::string> callees;
    FnCtx inner{def.name, &callees, {}, &ctx, &counters};
    std::vector<Param> params;
    for (const auto& p : s.items[1].items) {
      bool is_fn = false;
      const Sexp* n = &p;
      if (p.is_list()) {
        if (p.items.size() != 2 || !p.items[0].is_symbol("fn")) fail(p.loc, "malformed lambda parameter");
        is_fn = true;
        n = &p.items[1];
      }
      if (!n->is_symbol()) fail(p.loc, "malformed lambda parameter");
      TNode* t = types_.fresh();
      added.params.push_back(t);
      Param par;
      par.is_function = is_fn;
      par.name = bind(inner, n->text, t);
      params.push_back(std::move(par));
    }
    std::vector<Sexp> body(s.items.begin() + 2, s.items.end());
    auto [b, t] = lower_body(body, inner, s.loc);
    FnInfo& again = fns_.at(def.name);
    types_.unify(again.ret, t, s.loc, "lambda body");
    FunctionDef& stored = program_.functions[again.index];
    stored.params = std::move(params);
    stored.body = std::move(b);
    stored.callees = std::move(callees);
    param_types_.push_back({again.index, again.params});
    ctx.callees->insert(def.name);
    CoreExpr ref = node(CoreExpr::Kind::FunRef, s.loc);
    ref.name = def.name;
    return {std::move(ref), types_.fn(again.params, again.ret)};
  }

  std::pair<CoreExpr, TNode*> lower_let(const Sexp& s, FnCtx& ctx, bool sequential) {
    if (s.items.size() < 3 || !s.items[1].is_list()) fail(s.loc, "malformed let");
    std::vector<std::tuple<std::string, CoreExpr, TNode*, SourceLoc>> inits;
    std::size_t scope_mark = ctx.scope.size();
    for (const auto& b : s.items[1].items) {
      if (!b.is_list() || b.items.size() != 2 || !b.items[0].is_symbol()) fail(b.loc, "malformed let binding");
      auto [e, t] = lower(b.items[1], ctx);
      if (sequential) {
        std::string u = bind(ctx, b.items[0].text, t);
        inits.emplace_back(u, std::move(e), t, b.loc);
      } else {
        inits.emplace_back(b.items[0].text, std::move(e), t, b.loc);
      }
    }
    if (!sequential)
      for (auto& [name, e, t, loc] : inits) name = bind(ctx, name, t);
    std::vector<Sexp> body(s.items.begin() + 2, s.items.end());
    auto [result, type] = lower_body(body, ctx, s.loc);
    ctx.scope.resize(scope_mark);
    for (auto it = inits.rbegin(); it != inits.rend(); ++it) {
      CoreExpr let = node(CoreExpr::Kind::Let, std::get<3>(*it));
      let.name = std::get<0>(*it);
      let.args.push_back(std::move(std::get<1>(*it)));
      let.args.push_back(std::move(result));
      result = std::move(let);
    }
    return {std::move(result), type};
  }

  std::pair<CoreExpr, TNode*> lower_cond(const Sexp& s, std::size_t from, FnCtx& ctx) {
    if (from >= s.items.size()) return {node(CoreExpr::Kind::UnitLit, s.loc), unit_t()};
    const Sexp& clause = s.items[from];
    if (!clause.is_list() || clause.items.empty()) fail(clause.loc, "malformed cond clause");
    std::vector<Sexp> body(clause.items.begin() + 1, clause.items.end());
    if (clause.items[0].is_symbol("else")) {
      if (from + 1 != s.items.size()) fail(clause.loc, "else must be the last cond clause");
      return lower_body(body, ctx, clause.loc);
    }
    CoreExpr c = lower_typed(clause.items[0], ctx, bool_t(), "cond test");
    auto [t, tt] = lower_body(body, ctx, clause.loc);
    auto [e, et] = lower_cond(s, from + 1, ctx);
    types_.unify(tt, et, clause.loc, "cond branches");
    no_fn_checks_.push_back({tt, clause.loc});
    return {if_node(std::move(c), std::move(t), std::move(e), s.loc), tt};
  }

  std::pair<CoreExpr, TNode*> lower_prim(const Sexp& s, const std::string& op, FnCtx& ctx) {
    const auto& it = s.items;
    CoreExpr e = node(CoreExpr::Kind::Prim, s.loc);
    auto ints = [&](std::size_t from) {
      for (std::size_t i = from; i < it.size(); ++i) e.args.push_back(lower_typed(it[i], ctx, int_t(), "'" + op + "' operand"));
    };
    if (op == "+") {
      if (it.size() == 1) {
        CoreExpr z = node(CoreExpr::Kind::IntLit, s.loc);
        return {std::move(z), int_t()};
      }
      e.prim = PrimOp::Add;
      ints(1);
      return {std::move(e), int_t()};
    }
    if (op == "-") {
      expect_args(s, 1, SIZE_MAX);
      e.prim = it.size() == 2 ? PrimOp::Neg : PrimOp::Sub;
      ints(1);
      return {std::move(e), int_t()};
    }
    if (op == "*") {
      expect_args(s, 1, SIZE_MAX);
      std::size_t symbolic = 0;
      for (std::size_t i = 1; i < it.size(); ++i) symbolic += !is_int_literal(it[i]);
      if (symbolic > 1) fail(s.loc, "non-linear multiplication: at most one operand of '*' may be non-constant");
      e.prim = PrimOp::Mul;
      ints(1);
      return {std::move(e), int_t()};
    }
    if (op == "min" || op == "max") {
      expect_args(s, 1, SIZE_MAX);
      e.prim = op == "min" ? PrimOp::Min : PrimOp::Max;
      ints(1);
      return {std::move(e), int_t()};
    }
    if (op == "abs") {
      expect_args(s, 1, 1);
      e.prim = PrimOp::Abs;
      ints(1);
      return {std::move(e), int_t()};
    }
    if (op == "not") {
      expect_args(s, 1, 1);
      e.prim = PrimOp::Not;
      e.args.push_back(lower_typed(it[1], ctx, bool_t(), "'not' operand"));
      return {std::move(e), bool_t()};
    }
    expect_args(s, 2, 2);
    if (op == "=" || op == "equal?" || op == "eq?") {
      e.prim = PrimOp::Eq;
      auto [a, ta] = lower(it[1], ctx);
      auto [b, tb] = lower(it[2], ctx);
      types_.unify(ta, tb, s.loc, "'=' operands");
      if (types_.is(ta, TNode::K::Var)) types_.unify(ta, int_t(), s.loc, "'=' operands");
      if (!types_.is(ta, TNode::K::Int) && !types_.is(ta, TNode::K::Bool))
        fail(s.loc, "'=' compares integers or booleans, got " + types_.show(ta));
      e.args.push_back(std::move(a));
      e.args.push_back(std::move(b));
      return {std::move(e), bool_t()};
    }
    e.prim = op == "<" ? PrimOp::Lt : op == "<=" ? PrimOp::Le : op == ">" ? PrimOp::Gt : PrimOp::Ge;
    ints(1);
    return {std::move(e), bool_t()};
  }

  std::pair<CoreExpr, TNode*> lower_list_op(const Sexp& s, const std::string& op, FnCtx& ctx) {
    const auto& it = s.items;
    CoreExpr e = node(CoreExpr::Kind::List, s.loc);
    auto list_arg = [&](std::size_t i) { e.args.push_back(lower_typed(it[i], ctx, list_t(), "'" + op + "' list argument")); };
    auto int_arg = [&](std::size_t i) {
      e.args.push_back(lower_typed(it[i], ctx, int_t(), "'" + op + "' element (lists hold integers only)"));
    };
    if (op == "length") {
      expect_args(s, 1, 1);
      e.list_op = ListOp::Length;
      list_arg(1);
      return {std::move(e), int_t()};
    }
    if (op == "head" || op == "car" || op == "first") {
      expect_args(s, 1, 1);
      e.list_op = ListOp::Head;
      list_arg(1);
      return {std::move(e), int_t()};
    }
    if (op == "tail" || op == "cdr" || op == "rest") {
      expect_args(s, 1, 1);
      e.list_op = ListOp::Tail;
      list_arg(1);
      return {std::move(e), list_t()};
    }
    if (op == "null?" || op == "empty?") {
      expect_args(s, 1, 1);
      e.list_op = ListOp::IsNull;
      list_arg(1);
      return {std::move(e), bool_t()};
    }
    if (op == "cons") {
      expect_args(s, 2, 2);
      e.list_op = ListOp::Cons;
      int_arg(1);
      list_arg(2);
      return {std::move(e), list_t()};
    }
    if (op == "append") {
      expect_args(s, 2, 2);
      e.list_op = ListOp::Append;
      list_arg(1);
      list_arg(2);
      return {std::move(e), list_t()};
    }
    if (op == "list") {
      e.list_op = ListOp::Literal;
      for (std::size_t i = 1; i < it.size(); ++i) int_arg(i);
      return {std::move(e), list_t()};
    }
    if (op == "map") {
      expect_args(s, 2, 2);
      e.list_op = ListOp::Map;
      e.args.push_back(lower_typed(it[1], ctx, types_.fn({int_t()}, int_t()), "'map' function"));
      list_arg(2);
      return {std::move(e), list_t()};
    }
    // foldl / foldr
    expect_args(s, 3, 3);
    e.list_op = op == "foldl" ? ListOp::Foldl : ListOp::Foldr;
    TNode* acc = types_.fresh();
    e.args.push_back(lower_typed(it[1], ctx, types_.fn({int_t(), acc}, acc), "'" + op + "' function"));
    e.args.push_back(lower_typed(it[2], ctx, acc, "'" + op + "' initial value"));
    list_arg(3);
    fold_acc_checks_.push_back({acc, s.loc});
    return {std::move(e), acc};
  }

  std::pair<CoreExpr, TNode*> lower_call(const Sexp& s, FnCtx& ctx) {
    const auto& it = s.items;
    std::vector<std::pair<CoreExpr, TNode*>> args;
    for (std::size_t i = 1; i < it.size(); ++i) args.push_back(lower(it[i], ctx));
    const Sexp& head = it[0];
    auto bind_args = [&](CoreExpr& call, const std::vector<TNode*>& params, const std::string& callee) {
      if (params.size() != args.size())
        fail(s.loc, "'" + callee + "' expects " + std::to_string(params.size()) + " argument(s), got " + std::to_string(args.size()));
      for (std::size_t i = 0; i < args.size(); ++i) {
        types_.unify(params[i], args[i].second, it[i + 1].loc, "argument " + std::to_string(i + 1) + " of '" + callee + "'");
        call.args.push_back(std::move(args[i].first));
      }
    };
    if (head.is_symbol()) {
      if (const Binding* b = lookup_local(ctx, head.text)) {
        CoreExpr call = node(CoreExpr::Kind::CallLocal, s.loc);
        call.name = b->unique;
        std::vector<TNode*> params;
        for (auto& a : args) params.push_back(a.second);
        TNode* ret = types_.fresh();
        types_.unify(b->type, types_.fn(params, ret), s.loc, "call of '" + head.text + "'");
        for (auto& a : args) call.args.push_back(std::move(a.first));
        return {std::move(call), ret};
      }
      if (auto f = fns_.find(head.text); f != fns_.end()) {
        CoreExpr call = node(CoreExpr::Kind::Call, s.loc);
        call.name = head.text;
        ctx.callees->insert(head.text);
        auto params = f->second.params;
        TNode* ret = f->second.ret;
        bind_args(call, params, head.text);
        return {std::move(call), ret};
      }
      for (const FnCtx* o = ctx.outer; o; o = o->outer)
        if (lookup_local(*o, head.text))
          fail(head.loc, "lambda captures local variable '" + head.text + "'; only closed lambdas are supported");
      if (globals_.count(head.text)) fail(head.loc, "'" + head.text + "' is not a function");
      fail(head.loc, "unbound identifier '" + head.text + "'");
    }
    if (head.is_list() && head.head() == "lambda") {
      auto [ref, type] = lower_lambda(head, ctx);
      CoreExpr call = node(CoreExpr::Kind::Call, s.loc);
      call.name = ref.name;
      ctx.callees->insert(ref.name);
      FnInfo& info = fns_.at(ref.name);
      auto params = info.params;
      bind_args(call, params, "lambda");
      return {std::move(call), info.ret};
    }
    fail(head.loc, "cannot call '" + to_string(head) + "': functional values must be statically resolvable");
  }

  std::pair<CoreExpr, TNode*> lower(const Sexp& s, FnCtx& ctx) {
    switch (s.kind) {
      case Sexp::Kind::Int: {
        CoreExpr e = node(CoreExpr::Kind::IntLit, s.loc);
        e.value = s.value;
        return {std::move(e), int_t()};
      }
      case Sexp::Kind::Bool:
        return {bool_lit(s.value != 0, s.loc), bool_t()};
      case Sexp::Kind::Symbol:
        if (s.text == "true" || s.text == "false") return {bool_lit(s.text == "true", s.loc), bool_t()};
        return lower_symbol(s, ctx);
      case Sexp::Kind::List:
        break;
    }
    if (s.items.empty()) fail(s.loc, "empty application '()'");
    const auto& it = s.items;
    std::string head = it[0].is_symbol() ? it[0].text : "";
    bool user_shadowed = !head.empty() && (lookup_local(ctx, head) || fns_.count(head));
    if (head == "quote") {
      if (it.size() == 2 && it[1].is_list() && it[1].items.empty()) {
        CoreExpr e = node(CoreExpr::Kind::List, s.loc);
        e.list_op = ListOp::Literal;
        return {std::move(e), list_t()};
      }
      fail(s.loc, "only the empty list may be quoted");
    }
    if (head == "if") {
      expect_args(s, 3, 3);
      CoreExpr c = lower_typed(it[1], ctx, bool_t(), "if condition");
      auto [t, tt] = lower(it[2], ctx);
      auto [e, et] = lower(it[3], ctx);
      types_.unify(tt, et, s.loc, "if branches");
      no_fn_checks_.push_back({tt, s.loc});
      return {if_node(std::move(c), std::move(t), std::move(e), s.loc), tt};
    }
    if (head == "when" || head == "unless") {
      expect_args(s, 2, SIZE_MAX);
      CoreExpr c = lower_typed(it[1], ctx, bool_t(), head + " condition");
      std::vector<Sexp> body(it.begin() + 2, it.end());
      auto [b, bt] = lower_body(body, ctx, s.loc);
      (void)bt;
      CoreExpr unit = node(CoreExpr::Kind::UnitLit, s.loc);
      CoreExpr seq = node(CoreExpr::Kind::Seq, s.loc);
      seq.args.push_back(std::move(b));
      seq.args.push_back(node(CoreExpr::Kind::UnitLit, s.loc));
      if (head == "when") return {if_node(std::move(c), std::move(seq), std::move(unit), s.loc), unit_t()};
      return {if_node(std::move(c), std::move(unit), std::move(seq), s.loc), unit_t()};
    }
    if (head == "cond") return lower_cond(s, 1, ctx);
    if (head == "and" || head == "or") {
      bool is_and = head == "and";
      if (it.size() == 1) return {bool_lit(is_and, s.loc), bool_t()};
      CoreExpr acc = lower_typed(it.back(), ctx, bool_t(), "'" + head + "' operand");
      for (std::size_t i = it.size() - 2; i >= 1; --i) {
        CoreExpr c = lower_typed(it[i], ctx, bool_t(), "'" + head + "' operand");
        acc = is_and ? if_node(std::move(c), std::move(acc), bool_lit(false, s.loc), s.loc)
                     : if_node(std::move(c), bool_lit(true, s.loc), std::move(acc), s.loc);
      }
      return {std::move(acc), bool_t()};
    }
    if (head == "implies" || head == "=>") {
      expect_args(s, 2, 2);
      CoreExpr a = lower_typed(it[1], ctx, bool_t(), "implication premise");
      CoreExpr b = lower_typed(it[2], ctx, bool_t(), "implication conclusion");
      return {if_node(std::move(a), std::move(b), bool_lit(true, s.loc), s.loc), bool_t()};
    }
    if (head == "let") return lower_let(s, ctx, false);
    if (head == "let*") return lower_let(s, ctx, true);
    if (head == "begin") {
      std::vector<Sexp> body(it.begin() + 1, it.end());
      return lower_body(body, ctx, s.loc);
    }
    if (head == "lambda" || head == "λ") return lower_lambda(s, ctx);
    if (head == "void") {
      expect_args(s, 0, 0);
      return {node(CoreExpr::Kind::UnitLit, s.loc), unit_t()};
    }
    if (head == "assert" || head == "assume") {
      expect_args(s, 1, 1);
      CoreExpr e = node(head == "assert" ? CoreExpr::Kind::Assert : CoreExpr::Kind::Assume, s.loc);
      e.args.push_back(lower_typed(it[1], ctx, bool_t(), head));
      return {std::move(e), unit_t()};
    }
    if (head == "set-global!" || head == "set!") {
      expect_args(s, 2, 2);
      if (!it[1].is_symbol()) fail(it[1].loc, "set-global! expects a global name");
      const std::string& g = it[1].text;
      if (lookup_local(ctx, g)) fail(it[1].loc, "cannot mutate local variable '" + g + "'");
      auto gi = globals_.find(g);
      if (gi == globals_.end()) fail(it[1].loc, "unbound global '" + g + "'");
      if (gi->second.kind != GlobalDef::Kind::Mutable) fail(it[1].loc, "'" + g + "' is not a mutable global (use define-global)");
      CoreExpr e = node(CoreExpr::Kind::SetGlobal, s.loc);
      e.name = g;
      e.args.push_back(lower_typed(it[2], ctx, gi->second.type, "assignment to '" + g + "'"));
      return {std::move(e), unit_t()};
    }
    if (!user_shadowed) {
      static const std::set<std::string> prims = {"+", "-", "*", "=", "<", "<=", ">", ">=", "not", "min", "max", "abs", "equal?", "eq?"};
      static const std::set<std::string> lists = {"length", "head", "car", "first", "tail", "cdr", "rest", "null?", "empty?",
                                                  "cons", "append", "list", "map", "foldl", "foldr"};
      if (prims.count(head)) return lower_prim(s, head, ctx);
      if (lists.count(head)) return lower_list_op(s, head, ctx);
    }
    return lower_call(s, ctx);
  }

  void lower_main() {
    std::unordered_map<std::string, int> counters;
    std::set<std::string> callees;
    FnCtx ctx{"", &callees, {}, nullptr, &counters};
    for (const auto& f : sp_.forms) {
      TopStmt st;
      st.loc = f.loc;
      switch (f.kind) {
        case Form::Kind::DefineFunction:
          continue;
        case Form::Kind::DeclareSymbolic:
          for (const auto& n : f.names) {
            TopStmt d;
            d.kind = TopStmt::Kind::Declare;
            d.loc = f.loc;
            d.name = n;
            program_.main.push_back(std::move(d));
            main_defined_.insert(n);
          }
          continue;
        case Form::Kind::DefineValue:
        case Form::Kind::DefineGlobal: {
          st.kind = f.kind == Form::Kind::DefineValue ? TopStmt::Kind::DefineValue : TopStmt::Kind::DefineGlobal;
          st.name = f.names[0];
          st.exprs.push_back(lower_typed(f.body[0], ctx, globals_.at(st.name).type, "definition of '" + st.name + "'"));
          main_defined_.insert(st.name);
          break;
        }
        case Form::Kind::Assume:
        case Form::Kind::Assert:
          st.kind = f.kind == Form::Kind::Assume ? TopStmt::Kind::Assume : TopStmt::Kind::Assert;
          st.exprs.push_back(lower_typed(f.body[0], ctx, bool_t(), f.kind == Form::Kind::Assume ? "assume" : "assert"));
          break;
        case Form::Kind::Verify:
          st.kind = TopStmt::Kind::Verify;
          for (const auto& b : f.body) {
            bool wrapped = b.is_list() && b.items.size() == 2 && b.items[0].is_symbol("assert");
            st.exprs.push_back(lower_typed(wrapped ? b.items[1] : b, ctx, bool_t(), "verify"));
          }
          program_.has_verify = true;
          break;
      }
      program_.main.push_back(std::move(st));
    }
  }

  void finish_types() {
    for (auto& [node, loc] : no_fn_checks_)
      if (types_.is(node, TNode::K::Fn)) fail(loc, "functional values may not be stored or returned from conditionals");
    for (auto& [node, loc] : fold_acc_checks_)
      if (!types_.is(node, TNode::K::Int) && !types_.is(node, TNode::K::Bool) && !types_.is(node, TNode::K::Var))
        fail(loc, "fold accumulator must be an integer or boolean, got " + types_.show(node));
    for (auto& [index, nodes] : param_types_) {
      FunctionDef& def = program_.functions[index];
      const FnInfo& info = fns_.at(def.name);
      for (std::size_t i = 0; i < def.params.size(); ++i) {
        bool fn_typed = types_.is(nodes[i], TNode::K::Fn);
        if (def.params[i].is_function && !fn_typed && !types_.is(nodes[i], TNode::K::Var))
          fail(def.loc, "parameter '" + def.params[i].name + "' of '" + def.name + "' is declared (fn ...) but used as " + types_.show(nodes[i]));
        if (!def.params[i].is_function && fn_typed)
          fail(def.loc, "parameter '" + def.params[i].name + "' of '" + def.name + "' is used as a function; declare it as (fn " +
                            def.params[i].name + ")");
        if (def.params[i].is_function && !fn_typed) types_.unify(nodes[i], types_.fn({}, unit_t()), def.loc, "unused function parameter");
        def.params[i].type = types_.resolve(nodes[i]);
      }
      if (types_.is(info.ret, TNode::K::Fn)) fail(def.loc, "function '" + def.name + "' returns a functional value; this is not supported");
      def.ret = types_.resolve(info.ret);
    }
    for (auto& g : program_.globals) g.type = types_.resolve(globals_.at(g.name).type);
  }
};

}  // namespace

bool Program::has_assertions() const {
  for (const auto& f : functions)
    if (contains_assert(f.body)) return true;
  for (const auto& st : main) {
    if (st.kind == TopStmt::Kind::Assert) return true;
    if (st.kind == TopStmt::Kind::Verify && !st.exprs.empty()) return true;
    for (const auto& e : st.exprs)
      if (contains_assert(e)) return true;
  }
  return false;
}

void compute_call_graph_facts(Program& program) {
  auto& fns = program.functions;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < fns.size(); ++i) index[fns[i].name] = i;
  for (auto& f : fns) {
    f.reads.clear();
    f.writes.clear();
    collect_globals(f.body, f.reads, f.writes);
    f.may_assert = contains_assert(f.body);
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (auto& f : fns) {
      for (const auto& c : f.callees) {
        const FunctionDef& g = fns[index.at(c)];
        for (const auto& r : g.reads) changed |= f.reads.insert(r).second;
        for (const auto& w : g.writes) changed |= f.writes.insert(w).second;
        if (g.may_assert && !f.may_assert) f.may_assert = changed = true;
      }
    }
  }
  // Tarjan's SCC to mark recursive functions.
  std::vector<int> order(fns.size(), -1), low(fns.size(), 0);
  std::vector<bool> on_stack(fns.size(), false);
  std::vector<std::size_t> stack;
  int counter = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    order[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (const auto& c : fns[v].callees) {
      std::size_t w = index.at(c);
      if (order[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], order[w]);
      }
    }
    if (low[v] == order[v]) {
      std::vector<std::size_t> scc;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        scc.push_back(w);
      } while (w != v);
      bool cyclic = scc.size() > 1 || fns[v].callees.count(fns[v].name);
      for (auto m : scc) fns[m].recursive = cyclic;
    }
  };
  for (std::size_t v = 0; v < fns.size(); ++v)
    if (order[v] < 0) visit(v);
}

Program lower(const SurfaceProgram& sp) { return Lowerer(sp).run(); }

}  // namespace chcv
