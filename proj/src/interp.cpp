#include "chcv/interp.hpp"

#include "chcv/expr.hpp"

namespace chcv {

namespace {

std::int64_t as_int(const CValue& v) {
  if (auto p = std::get_if<std::int64_t>(&v)) return *p;
  throw std::logic_error("expected an integer, got " + to_string(v));
}

bool as_bool(const CValue& v) {
  if (auto p = std::get_if<bool>(&v)) return *p;
  throw std::logic_error("expected a boolean, got " + to_string(v));
}

bool mentions_local(const CoreExpr& e, const std::string& name) {
  if (e.kind == CoreExpr::Kind::Local && e.name == name) return true;
  for (const auto& a : e.args)
    if (mentions_local(a, name)) return true;
  return false;
}

// Whether `f` can observe its first argument. Unobserved list elements are never chosen.
bool reads_first_param(const Program& p, const FnValue& f) {
  if (f.kind != FnValue::Kind::User) return true;
  const FunctionDef* def = p.find_function(f.name);
  return !def || def->params.empty() || mentions_local(def->body, def->params[0].name);
}

const CList& as_clist(const CValue& v) {
  if (auto p = std::get_if<CList>(&v)) return *p;
  throw std::logic_error("expected a list, got " + to_string(v));
}

std::shared_ptr<Cell> known(std::int64_t v) { return std::make_shared<Cell>(Cell{v}); }

}  // namespace

std::string to_string(const CValue& v) {
  if (auto p = std::get_if<std::int64_t>(&v)) return std::to_string(*p);
  if (auto p = std::get_if<bool>(&v)) return *p ? "#t" : "#f";
  if (auto p = std::get_if<CList>(&v)) {
    std::string s = "(list";
    for (const auto& c : *p) s += " " + (c->value ? std::to_string(*c->value) : std::string("_"));
    return s + ")";
  }
  if (auto p = std::get_if<FnValue>(&v)) return "#<fn " + to_string(*p) + ">";
  return "#<void>";
}

CValue builtin_concrete(const std::string& name, const std::vector<CValue>& a) {
  auto i = [&](std::size_t k) { return as_int(a.at(k)); };
  if (name == "+") {
    std::int64_t s = 0;
    for (const auto& x : a) s = checked_add(s, as_int(x));
    return s;
  }
  if (name == "-") {
    if (a.size() == 1) return checked_mul(-1, i(0));
    std::int64_t s = i(0);
    for (std::size_t k = 1; k < a.size(); ++k) s = checked_add(s, checked_mul(-1, i(k)));
    return s;
  }
  if (name == "*") {
    std::int64_t s = 1;
    for (const auto& x : a) s = checked_mul(s, as_int(x));
    return s;
  }
  if (name == "min" || name == "max") {
    std::int64_t r = i(0);
    for (std::size_t k = 1; k < a.size(); ++k) r = name == "min" ? std::min(r, i(k)) : std::max(r, i(k));
    return r;
  }
  if (name == "abs") return i(0) < 0 ? checked_mul(-1, i(0)) : i(0);
  if (name == "not") return !as_bool(a.at(0));
  if (name == "=" || name == "equal?" || name == "eq?") {
    if (std::holds_alternative<bool>(a.at(0))) return as_bool(a[0]) == as_bool(a.at(1));
    return i(0) == i(1);
  }
  if (name == "<") return i(0) < i(1);
  if (name == "<=") return i(0) <= i(1);
  if (name == ">") return i(0) > i(1);
  if (name == ">=") return i(0) >= i(1);
  throw std::logic_error("unknown builtin '" + name + "'");
}

Interpreter::Interpreter(const Program& program, Chooser& chooser, Limits limits)
    : program_(program), chooser_(chooser), limits_(limits) {}

std::int64_t Interpreter::choice_value(int index) { return index % 2 ? (index + 1) / 2 : -(index / 2); }

void Interpreter::stop(RunOutcome::Kind k, SourceLoc loc, std::string msg) { throw Stop{RunOutcome{k, loc, std::move(msg)}}; }

std::int64_t Interpreter::force(Cell& c) {
  if (!c.value) c.value = choice_value(chooser_.choose(2 * limits_.bound + 1));
  return *c.value;
}

CValue Interpreter::choose_symbolic(const Type& t) {
  switch (t.kind) {
    case Type::Kind::Int:
      return choice_value(chooser_.choose(2 * limits_.bound + 1));
    case Type::Kind::Bool:
      return chooser_.choose(2) == 1;
    case Type::Kind::List: {
      int n = chooser_.choose(limits_.max_len + 1);
      CList l;
      for (int k = 0; k < n; ++k) l.push_back(std::make_shared<Cell>());
      return l;
    }
    default:
      throw std::logic_error("unsupported symbolic type " + to_string(t));
  }
}

std::string Interpreter::witness() const {
  std::string s;
  for (const auto& [name, v] : declared_) s += name + " = " + to_string(v) + "\n";
  return s;
}

RunOutcome Interpreter::run_main() {
  globals_.clear();
  declared_.clear();
  depth_ = 0;
  try {
    for (const auto& st : program_.main) {
      switch (st.kind) {
        case TopStmt::Kind::Declare: {
          CValue v = choose_symbolic(*program_.find_global(st.name)->type);
          globals_[st.name] = v;
          declared_.emplace_back(st.name, v);
          break;
        }
        case TopStmt::Kind::DefineValue:
        case TopStmt::Kind::DefineGlobal:
          globals_[st.name] = eval(st.exprs[0], {});
          break;
        case TopStmt::Kind::Assume:
          if (!as_bool(eval(st.exprs[0], {}))) stop(RunOutcome::Kind::Blocked, st.loc, "assumption does not hold");
          break;
        case TopStmt::Kind::Assert:
        case TopStmt::Kind::Verify:
          for (const auto& e : st.exprs)
            if (!as_bool(eval(e, {}))) stop(RunOutcome::Kind::Violation, e.loc, "assertion violated");
          break;
      }
    }
  } catch (const Stop& s) {
    return s.outcome;
  } catch (const std::overflow_error& e) {
    return RunOutcome{RunOutcome::Kind::Blocked, {}, e.what()};
  }
  return {};
}

RunOutcome Interpreter::call(const std::string& fn, const std::vector<CValue>& args, CValue& result) {
  depth_ = 0;
  try {
    result = call_user(fn, args, CoreExpr{});
  } catch (const Stop& s) {
    return s.outcome;
  } catch (const std::overflow_error& e) {
    return RunOutcome{RunOutcome::Kind::Blocked, {}, e.what()};
  }
  return {};
}

CValue Interpreter::call_user(const std::string& name, std::vector<CValue> args, const CoreExpr& site) {
  const FunctionDef* def = program_.find_function(name);
  if (!def) throw std::logic_error("unknown function " + name);
  if (depth_ >= limits_.max_depth) stop(RunOutcome::Kind::DepthExceeded, site.loc, "recursion depth limit reached");
  Env env;
  for (std::size_t i = 0; i < def->params.size(); ++i) env[def->params[i].name] = args.at(i);
  ++depth_;
  CValue v = eval(def->body, env);
  --depth_;
  return v;
}

CValue Interpreter::apply(const FnValue& f, std::vector<CValue> args, const CoreExpr& site) {
  if (f.kind == FnValue::Kind::Builtin) return builtin_concrete(f.name, args);
  return call_user(f.name, std::move(args), site);
}

CValue Interpreter::eval(const CoreExpr& e, const Env& env) {
  using K = CoreExpr::Kind;
  auto all = [&] {
    std::vector<CValue> v;
    for (const auto& a : e.args) v.push_back(eval(a, env));
    return v;
  };
  switch (e.kind) {
    case K::IntLit: return e.value;
    case K::BoolLit: return e.value != 0;
    case K::UnitLit: return CUnit{};
    case K::Local: return env.at(e.name);
    case K::Global: {
      auto it = globals_.find(e.name);
      if (it == globals_.end()) throw std::logic_error("global '" + e.name + "' read before its definition");
      return it->second;
    }
    case K::FunRef: return FnValue{FnValue::Kind::User, e.name};
    case K::BuiltinRef: return FnValue{FnValue::Kind::Builtin, e.name};
    case K::Prim: {
      auto v = all();
      switch (e.prim) {
        case PrimOp::Add: return builtin_concrete("+", v);
        case PrimOp::Sub: return builtin_concrete("-", v);
        case PrimOp::Neg: return builtin_concrete("-", v);
        case PrimOp::Mul: return builtin_concrete("*", v);
        case PrimOp::Eq: return builtin_concrete("=", v);
        case PrimOp::Lt: return builtin_concrete("<", v);
        case PrimOp::Le: return builtin_concrete("<=", v);
        case PrimOp::Gt: return builtin_concrete(">", v);
        case PrimOp::Ge: return builtin_concrete(">=", v);
        case PrimOp::Not: return builtin_concrete("not", v);
        case PrimOp::Min: return builtin_concrete("min", v);
        case PrimOp::Max: return builtin_concrete("max", v);
        case PrimOp::Abs: return builtin_concrete("abs", v);
      }
      break;
    }
    case K::If:
      return as_bool(eval(e.args[0], env)) ? eval(e.args[1], env) : eval(e.args[2], env);
    case K::Let: {
      Env inner = env;
      inner[e.name] = eval(e.args[0], env);
      return eval(e.args[1], inner);
    }
    case K::Call:
      return call_user(e.name, all(), e);
    case K::CallLocal: {
      FnValue f = std::get<FnValue>(env.at(e.name));
      return apply(f, all(), e);
    }
    case K::List:
      return eval_list(e, env);
    case K::Assert:
      if (!as_bool(eval(e.args[0], env))) stop(RunOutcome::Kind::Violation, e.loc, "assertion violated");
      return CUnit{};
    case K::Assume:
      if (!as_bool(eval(e.args[0], env))) stop(RunOutcome::Kind::Blocked, e.loc, "assumption does not hold");
      return CUnit{};
    case K::SetGlobal:
      globals_[e.name] = eval(e.args[0], env);
      return CUnit{};
    case K::Seq: {
      CValue last = CUnit{};
      for (const auto& a : e.args) last = eval(a, env);
      return last;
    }
  }
  throw std::logic_error("unhandled expression");
}

CValue Interpreter::eval_list(const CoreExpr& e, const Env& env) {
  std::vector<CValue> v;
  for (const auto& a : e.args) v.push_back(eval(a, env));
  switch (e.list_op) {
    case ListOp::Literal: {
      CList l;
      for (const auto& x : v) l.push_back(known(as_int(x)));
      return l;
    }
    case ListOp::Length:
      return static_cast<std::int64_t>(as_clist(v[0]).size());
    case ListOp::IsNull:
      return as_clist(v[0]).empty();
    case ListOp::Head: {
      const CList& l = as_clist(v[0]);
      if (l.empty()) stop(RunOutcome::Kind::Blocked, e.loc, "head of an empty list");
      return force(*l.front());
    }
    case ListOp::Tail: {
      const CList& l = as_clist(v[0]);
      if (l.empty()) stop(RunOutcome::Kind::Blocked, e.loc, "tail of an empty list");
      return CList(l.begin() + 1, l.end());
    }
    case ListOp::Cons: {
      CList l{known(as_int(v[0]))};
      const CList& rest = as_clist(v[1]);
      l.insert(l.end(), rest.begin(), rest.end());
      return l;
    }
    case ListOp::Append: {
      CList l = as_clist(v[0]);
      const CList& b = as_clist(v[1]);
      l.insert(l.end(), b.begin(), b.end());
      return l;
    }
    case ListOp::Map: {
      FnValue f = std::get<FnValue>(v[0]);
      CList out;
      bool reads = reads_first_param(program_, f);
      for (const auto& c : as_clist(v[1]))
        out.push_back(known(as_int(apply(f, {CValue{reads ? force(*c) : 0}}, e))));
      return out;
    }
    case ListOp::Foldl:
    case ListOp::Foldr: {
      FnValue f = std::get<FnValue>(v[0]);
      CValue acc = v[1];
      const CList& l = as_clist(v[2]);
      bool reads = reads_first_param(program_, f);
      auto elem = [&](Cell& c) { return CValue{reads ? force(c) : 0}; };
      if (e.list_op == ListOp::Foldl)
        for (const auto& c : l) acc = apply(f, {elem(*c), acc}, e);
      else
        for (auto it = l.rbegin(); it != l.rend(); ++it) acc = apply(f, {elem(**it), acc}, e);
      return acc;
    }
  }
  throw std::logic_error("unhandled list operation");
}

}  // namespace chcv
