#include "chcv/expr.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace chcv {

std::string_view sort_name(Sort s) { return s == Sort::Int ? "Int" : "Bool"; }

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("integer overflow in constant arithmetic");
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("integer overflow in constant arithmetic");
  return r;
}

Expr Expr::make(Op op, Sort sort, std::int64_t value, std::string name, std::vector<Expr> kids) {
  Expr e;
  e.node_ = std::make_shared<const Node>(Node{op, sort, value, std::move(name), std::move(kids)});
  return e;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  return x.op == y.op && x.sort == y.sort && x.value == y.value && x.name == y.name && x.kids == y.kids;
}

Expr Expr::int_lit(std::int64_t v) { return make(Op::IntLit, Sort::Int, v, {}, {}); }
Expr Expr::bool_lit(bool v) { return make(Op::BoolLit, Sort::Bool, v ? 1 : 0, {}, {}); }
Expr Expr::var(std::string name, Sort sort) { return make(Op::Var, sort, 0, std::move(name), {}); }

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::logic_error(std::string("ill-sorted expression: ") + what);
}

// Collects `coeff * atom` pairs of a sum, combining equal atoms.
void flatten_sum(const Expr& e, std::int64_t scale, std::vector<std::pair<std::int64_t, Expr>>& atoms, std::int64_t& constant) {
  switch (e.op()) {
    case Expr::Op::IntLit:
      constant = checked_add(constant, checked_mul(scale, e.value()));
      return;
    case Expr::Op::Add:
      for (const auto& k : e.kids()) flatten_sum(k, scale, atoms, constant);
      return;
    case Expr::Op::Mul:
      flatten_sum(e.kids()[0], checked_mul(scale, e.value()), atoms, constant);
      return;
    default:
      for (auto& [c, a] : atoms)
        if (a == e) {
          c = checked_add(c, scale);
          return;
        }
      atoms.emplace_back(scale, e);
  }
}

}  // namespace

Expr Expr::add(std::vector<Expr> terms) {
  std::vector<std::pair<std::int64_t, Expr>> atoms;
  std::int64_t constant = 0;
  for (const auto& t : terms) {
    require(t.sort() == Sort::Int, "+ over non-integer");
    flatten_sum(t, 1, atoms, constant);
  }
  std::vector<Expr> kids;
  for (auto& [c, a] : atoms) {
    if (c == 0) continue;
    kids.push_back(c == 1 ? a : make(Op::Mul, Sort::Int, c, {}, {a}));
  }
  if (constant != 0 || kids.empty()) kids.push_back(int_lit(constant));
  if (kids.size() == 1) return kids[0];
  return make(Op::Add, Sort::Int, 0, {}, std::move(kids));
}

Expr Expr::sub(Expr a, Expr b) { return add(std::move(a), mul(-1, std::move(b))); }

Expr Expr::mul(std::int64_t c, Expr a) {
  require(a.sort() == Sort::Int, "* over non-integer");
  if (c == 0) return int_lit(0);
  if (c == 1) return a;
  switch (a.op()) {
    case Op::IntLit:
      return int_lit(checked_mul(c, a.value()));
    case Op::Mul:
      return mul(checked_mul(c, a.value()), a.kids()[0]);
    case Op::Add: {
      std::vector<Expr> scaled;
      for (const auto& k : a.kids()) scaled.push_back(mul(c, k));
      return add(std::move(scaled));
    }
    default:
      return make(Op::Mul, Sort::Int, c, {}, {std::move(a)});
  }
}

Expr Expr::ite(Expr c, Expr a, Expr b) {
  require(c.sort() == Sort::Bool && a.sort() == b.sort(), "ite");
  if (c.is_true()) return a;
  if (c.is_false()) return b;
  if (a == b) return a;
  if (a.sort() == Sort::Bool) {
    if (a.is_true() && b.is_false()) return c;
    if (a.is_false() && b.is_true()) return not_(c);
    if (b.is_false()) return and_(c, a);
    if (a.is_true()) return or_(c, b);
    if (a.is_false()) return and_(not_(c), b);
    if (b.is_true()) return or_(not_(c), a);
  }
  if (c.op() == Op::Not) return ite(c.kids()[0], b, a);
  Sort s = a.sort();
  return make(Op::Ite, s, 0, {}, {std::move(c), std::move(a), std::move(b)});
}

Expr Expr::not_(Expr a) {
  require(a.sort() == Sort::Bool, "not");
  if (a.op() == Op::BoolLit) return bool_lit(!a.value());
  if (a.op() == Op::Not) return a.kids()[0];
  return make(Op::Not, Sort::Bool, 0, {}, {std::move(a)});
}

namespace {

Expr connective(Expr::Op op, std::vector<Expr> fs) {
  const bool is_and = op == Expr::Op::And;
  std::vector<Expr> kids;
  std::vector<Expr> work = std::move(fs);
  for (std::size_t i = 0; i < work.size(); ++i) {
    Expr f = work[i];
    require(f.sort() == Sort::Bool, "connective over non-boolean");
    if (f.op() == op) {
      for (const auto& k : f.kids()) kids.push_back(k);
      continue;
    }
    if (f.op() == Expr::Op::BoolLit) {
      if ((f.value() != 0) == is_and) continue;
      return Expr::bool_lit(!is_and);
    }
    kids.push_back(f);
  }
  std::vector<Expr> unique;
  for (auto& k : kids)
    if (std::find(unique.begin(), unique.end(), k) == unique.end()) unique.push_back(k);
  if (unique.empty()) return Expr::bool_lit(is_and);
  if (unique.size() == 1) return unique[0];
  return is_and ? Expr::and_(std::move(unique)) : Expr::or_(std::move(unique));
}

}  // namespace

Expr Expr::and_(std::vector<Expr> fs) {
  bool normalized = fs.size() > 1;
  for (std::size_t i = 0; i < fs.size() && normalized; ++i) {
    normalized = fs[i].op() != Op::And && fs[i].op() != Op::BoolLit;
    for (std::size_t j = 0; j < i && normalized; ++j) normalized = !(fs[i] == fs[j]);
  }
  if (!normalized) return connective(Op::And, std::move(fs));
  return make(Op::And, Sort::Bool, 0, {}, std::move(fs));
}

Expr Expr::or_(std::vector<Expr> fs) {
  bool normalized = fs.size() > 1;
  for (std::size_t i = 0; i < fs.size() && normalized; ++i) {
    normalized = fs[i].op() != Op::Or && fs[i].op() != Op::BoolLit;
    for (std::size_t j = 0; j < i && normalized; ++j) normalized = !(fs[i] == fs[j]);
  }
  if (!normalized) return connective(Op::Or, std::move(fs));
  return make(Op::Or, Sort::Bool, 0, {}, std::move(fs));
}

namespace {
// a - b when it normalizes to a constant.
std::optional<std::int64_t> const_difference(const Expr& a, const Expr& b) {
  if (a.sort() != Sort::Int) return std::nullopt;
  Expr d = Expr::sub(a, b);
  if (d.op() == Expr::Op::IntLit) return d.value();
  return std::nullopt;
}
}  // namespace

Expr Expr::eq(Expr a, Expr b) {
  require(a.sort() == b.sort(), "= over different sorts");
  if (a == b) return bool_lit(true);
  if (a.is_const() && b.is_const()) return bool_lit(a.value() == b.value());
  if (auto d = const_difference(a, b)) return bool_lit(*d == 0);
  if (a.sort() == Sort::Bool) {
    if (a.is_true()) return b;
    if (b.is_true()) return a;
    if (a.is_false()) return not_(b);
    if (b.is_false()) return not_(a);
  }
  return make(Op::Eq, Sort::Bool, 0, {}, {std::move(a), std::move(b)});
}

Expr Expr::le(Expr a, Expr b) {
  require(a.sort() == Sort::Int && b.sort() == Sort::Int, "<=");
  if (a.is_const() && b.is_const()) return bool_lit(a.value() <= b.value());
  if (a == b) return bool_lit(true);
  if (auto d = const_difference(a, b)) return bool_lit(*d <= 0);
  return make(Op::Le, Sort::Bool, 0, {}, {std::move(a), std::move(b)});
}

Expr Expr::lt(Expr a, Expr b) {
  require(a.sort() == Sort::Int && b.sort() == Sort::Int, "<");
  if (a.is_const() && b.is_const()) return bool_lit(a.value() < b.value());
  if (a == b) return bool_lit(false);
  if (auto d = const_difference(a, b)) return bool_lit(*d < 0);
  return make(Op::Lt, Sort::Bool, 0, {}, {std::move(a), std::move(b)});
}

Value eval(const Expr& e, const Assignment& env) {
  using Op = Expr::Op;
  const auto& k = e.kids();
  switch (e.op()) {
    case Op::IntLit:
      return Value::of_int(e.value());
    case Op::BoolLit:
      return Value::of_bool(e.value() != 0);
    case Op::Var:
      return env(e.name());
    case Op::Add: {
      std::int64_t s = 0;
      for (const auto& x : k) s = checked_add(s, eval(x, env).i);
      return Value::of_int(s);
    }
    case Op::Mul:
      return Value::of_int(checked_mul(e.value(), eval(k[0], env).i));
    case Op::Ite:
      return eval(k[0], env).b ? eval(k[1], env) : eval(k[2], env);
    case Op::Not:
      return Value::of_bool(!eval(k[0], env).b);
    case Op::And:
      for (const auto& x : k)
        if (!eval(x, env).b) return Value::of_bool(false);
      return Value::of_bool(true);
    case Op::Or:
      for (const auto& x : k)
        if (eval(x, env).b) return Value::of_bool(true);
      return Value::of_bool(false);
    case Op::Eq:
      return Value::of_bool(eval(k[0], env) == eval(k[1], env));
    case Op::Le:
      return Value::of_bool(eval(k[0], env).i <= eval(k[1], env).i);
    case Op::Lt:
      return Value::of_bool(eval(k[0], env).i < eval(k[1], env).i);
  }
  return {};
}

void free_vars(const Expr& e, std::vector<Expr>& out) {
  if (e.op() == Expr::Op::Var) {
    for (const auto& v : out)
      if (v.name() == e.name()) return;
    out.push_back(e);
    return;
  }
  for (const auto& k : e.kids()) free_vars(k, out);
}

std::vector<Expr> free_vars(const Expr& e) {
  std::vector<Expr> out;
  free_vars(e, out);
  return out;
}

bool mentions(const Expr& e, const std::string& var) {
  if (e.op() == Expr::Op::Var) return e.name() == var;
  return std::any_of(e.kids().begin(), e.kids().end(), [&](const Expr& k) { return mentions(k, var); });
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& sub) {
  using Op = Expr::Op;
  const auto& k = e.kids();
  switch (e.op()) {
    case Op::IntLit:
    case Op::BoolLit:
      return e;
    case Op::Var: {
      auto it = sub.find(e.name());
      return it == sub.end() ? e : it->second;
    }
    default:
      break;
  }
  std::vector<Expr> ks;
  for (const auto& x : k) ks.push_back(substitute(x, sub));
  switch (e.op()) {
    case Op::Add:
      return Expr::add(std::move(ks));
    case Op::Mul:
      return Expr::mul(e.value(), ks[0]);
    case Op::Ite:
      return Expr::ite(ks[0], ks[1], ks[2]);
    case Op::Not:
      return Expr::not_(ks[0]);
    case Op::And:
      return Expr::and_(std::move(ks));
    case Op::Or:
      return Expr::or_(std::move(ks));
    case Op::Eq:
      return Expr::eq(ks[0], ks[1]);
    case Op::Le:
      return Expr::le(ks[0], ks[1]);
    case Op::Lt:
      return Expr::lt(ks[0], ks[1]);
    default:
      return e;
  }
}

std::optional<LinearForm> linear_form(const Expr& e) {
  LinearForm out;
  std::function<bool(const Expr&, std::int64_t)> walk = [&](const Expr& x, std::int64_t scale) {
    switch (x.op()) {
      case Expr::Op::IntLit:
        out.constant = checked_add(out.constant, checked_mul(scale, x.value()));
        return true;
      case Expr::Op::Var:
        if (x.sort() != Sort::Int) return false;
        out.coeffs[x.name()] = checked_add(out.coeffs[x.name()], scale);
        return true;
      case Expr::Op::Add:
        for (const auto& k : x.kids())
          if (!walk(k, scale)) return false;
        return true;
      case Expr::Op::Mul:
        return walk(x.kids()[0], checked_mul(scale, x.value()));
      default:
        return false;
    }
  };
  if (!walk(e, 1)) return std::nullopt;
  for (auto it = out.coeffs.begin(); it != out.coeffs.end();) it = it->second == 0 ? out.coeffs.erase(it) : std::next(it);
  return out;
}

std::string smt_symbol(const std::string& name) {
  static const std::string extra = "~!@$%^&*_-+=<>.?/";
  bool simple = !name.empty() && !std::isdigit(static_cast<unsigned char>(name[0]));
  for (char c : name) simple = simple && (std::isalnum(static_cast<unsigned char>(c)) || extra.find(c) != std::string::npos);
  return simple ? name : "|" + name + "|";
}

std::string to_smt(const Expr& e) {
  using Op = Expr::Op;
  auto nary = [&](const char* op) {
    std::string s = std::string("(") + op;
    for (const auto& k : e.kids()) s += " " + to_smt(k);
    return s + ")";
  };
  switch (e.op()) {
    case Op::IntLit:
      if (e.value() < 0) return "(- " + std::to_string(-static_cast<std::uint64_t>(e.value())) + ")";
      return std::to_string(e.value());
    case Op::BoolLit:
      return e.value() ? "true" : "false";
    case Op::Var:
      return smt_symbol(e.name());
    case Op::Add:
      return nary("+");
    case Op::Mul:
      return "(* " + to_smt(Expr::int_lit(e.value())) + " " + to_smt(e.kids()[0]) + ")";
    case Op::Ite:
      return nary("ite");
    case Op::Not:
      return nary("not");
    case Op::And:
      return nary("and");
    case Op::Or:
      return nary("or");
    case Op::Eq:
      return nary("=");
    case Op::Le:
      return nary("<=");
    case Op::Lt:
      return nary("<");
  }
  return "?";
}

namespace {

int precedence(const Expr& e) {
  switch (e.op()) {
    case Expr::Op::Or: return 1;
    case Expr::Op::And: return 2;
    case Expr::Op::Not: return 3;
    case Expr::Op::Eq:
    case Expr::Op::Le:
    case Expr::Op::Lt: return 4;
    case Expr::Op::Add: return 5;
    case Expr::Op::Mul: return 6;
    default: return 7;
  }
}

std::string text_at(const Expr& e, int min_prec) {
  std::string s = to_text(e);
  return precedence(e) < min_prec ? "(" + s + ")" : s;
}

}  // namespace

std::string to_text(const Expr& e) {
  using Op = Expr::Op;
  const auto& k = e.kids();
  switch (e.op()) {
    case Op::IntLit:
      return std::to_string(e.value());
    case Op::BoolLit:
      return e.value() ? "true" : "false";
    case Op::Var:
      return e.name();
    case Op::Add: {
      std::string s = text_at(k[0], 5);
      for (std::size_t i = 1; i < k.size(); ++i) {
        const Expr& t = k[i];
        if (t.op() == Op::IntLit && t.value() < 0)
          s += " - " + std::to_string(-t.value());
        else if (t.op() == Op::Mul && t.value() < 0)
          s += " - " + to_text(Expr::mul(-1, t));
        else
          s += " + " + text_at(t, 6);
      }
      return s;
    }
    case Op::Mul:
      if (e.value() == -1) return "-" + text_at(k[0], 7);
      return std::to_string(e.value()) + "*" + text_at(k[0], 7);
    case Op::Ite:
      return "ite(" + to_text(k[0]) + ", " + to_text(k[1]) + ", " + to_text(k[2]) + ")";
    case Op::Not:
      if (k[0].op() == Op::Eq) return text_at(k[0].kids()[0], 5) + " != " + text_at(k[0].kids()[1], 5);
      if (k[0].op() == Op::Le || k[0].op() == Op::Lt) {
        const Expr& a = k[0].kids()[0];
        const Expr& b = k[0].kids()[1];
        const char* fwd = k[0].op() == Op::Le ? " > " : " >= ";
        const char* rev = k[0].op() == Op::Le ? " < " : " <= ";
        if (a.is_const() && !b.is_const()) return text_at(b, 5) + rev + text_at(a, 5);
        return text_at(a, 5) + fwd + text_at(b, 5);
      }
      return "not " + text_at(k[0], 4);
    case Op::And:
    case Op::Or: {
      std::string s;
      for (std::size_t i = 0; i < k.size(); ++i) s += (i ? (e.op() == Op::And ? " and " : " or ") : "") + text_at(k[i], precedence(e) + 1);
      return s;
    }
    case Op::Eq:
      return text_at(k[0], 5) + " = " + text_at(k[1], 5);
    case Op::Le:
    case Op::Lt: {
      const char* fwd = e.op() == Op::Le ? " <= " : " < ";
      const char* rev = e.op() == Op::Le ? " >= " : " > ";
      if (k[0].is_const() && !k[1].is_const()) return text_at(k[1], 5) + rev + text_at(k[0], 5);
      return text_at(k[0], 5) + fwd + text_at(k[1], 5);
    }
  }
  return "?";
}

}  // namespace chcv
