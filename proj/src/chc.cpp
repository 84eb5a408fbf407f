#include "chcv/chc.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

namespace chcv {

std::string_view role_name(ArgRole r) {
  switch (r) {
    case ArgRole::ValueIn: return "in";
    case ArgRole::GlobalIn: return "global-in";
    case ArgRole::Out: return "out";
    case ArgRole::GlobalOut: return "global-out";
    case ArgRole::Ok: return "ok";
  }
  return "?";
}

std::vector<Expr> Clause::constraints() const {
  std::vector<Expr> out = guards;
  out.insert(out.end(), bindings.begin(), bindings.end());
  return out;
}

const RelationSymbol* ChcSystem::find(const std::string& name) const {
  for (const auto& r : relations)
    if (r.name == name) return &r;
  return nullptr;
}

const Clause* ChcSystem::query() const {
  for (const auto& c : clauses)
    if (c.is_query()) return &c;
  return nullptr;
}

std::vector<const Clause*> ChcSystem::clauses_of(const std::string& rel) const {
  std::vector<const Clause*> out;
  for (const auto& c : clauses)
    if (c.head && c.head->rel == rel) out.push_back(&c);
  return out;
}

void ChcSystem::validate() const {
  auto check = [&](const RelAtom& a) {
    const RelationSymbol* r = find(a.rel);
    if (!r) throw std::logic_error("undeclared relation " + a.rel);
    if (r->arity() != a.args.size())
      throw std::logic_error("arity mismatch for " + a.rel + ": expected " + std::to_string(r->arity()) + ", got " +
                             std::to_string(a.args.size()));
    for (std::size_t i = 0; i < a.args.size(); ++i)
      if (a.args[i].sort() != r->args[i].sort) throw std::logic_error("sort mismatch in argument " + std::to_string(i) + " of " + a.rel);
  };
  int queries = 0;
  for (const auto& c : clauses) {
    if (c.head) check(*c.head);
    else ++queries;
    for (const auto& a : c.atoms) check(a);
    for (const auto& g : c.constraints())
      if (g.sort() != Sort::Bool) throw std::logic_error("non-boolean clause constraint");
  }
  if (queries > 1) throw std::logic_error("more than one query clause");
}

namespace {

void atom_vars(const RelAtom& a, std::vector<Expr>& out) {
  for (const auto& e : a.args) free_vars(e, out);
}

std::vector<Expr> ordered_vars(const Clause& c) {
  std::vector<Expr> vs;
  if (c.head) atom_vars(*c.head, vs);
  for (const auto& a : c.atoms) atom_vars(a, vs);
  for (const auto& g : c.guards) free_vars(g, vs);
  for (const auto& g : c.bindings) free_vars(g, vs);
  return vs;
}

}  // namespace

std::map<std::string, std::string> clause_renaming(const Clause& c) {
  std::vector<Expr> vs = ordered_vars(c);
  std::set<std::string> taken;
  for (const auto& v : vs)
    if (v.name().find('!') == std::string::npos) taken.insert(v.name());
  std::map<std::string, int> counters;
  std::map<std::string, std::string> out;
  for (const auto& v : vs) {
    const std::string& n = v.name();
    auto bang = n.rfind('!');
    if (bang == std::string::npos) continue;
    std::string base = n.substr(0, bang);
    std::string pretty;
    do pretty = base + std::to_string(++counters[base]);
    while (taken.count(pretty));
    taken.insert(pretty);
    out[n] = pretty;
  }
  return out;
}

namespace {

Expr rename(const Expr& e, const std::map<std::string, std::string>& names) {
  if (names.empty()) return e;
  std::map<std::string, Expr> sub;
  std::vector<Expr> vs = free_vars(e);
  for (const auto& v : vs)
    if (auto it = names.find(v.name()); it != names.end()) sub.emplace(v.name(), Expr::var(it->second, v.sort()));
  return substitute(e, sub);
}

}  // namespace

std::string to_text(const RelAtom& a, const std::map<std::string, std::string>& names) {
  std::string s = a.rel + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) s += (i ? ", " : "") + to_text(rename(a.args[i], names));
  return s + ")";
}

std::string to_text(const Clause& c) {
  auto names = clause_renaming(c);
  std::vector<std::string> body;
  for (const auto& a : c.atoms) body.push_back(to_text(a, names));
  for (const auto& g : c.constraints()) {
    Expr r = rename(g, names);
    if (r.op() == Expr::Op::And)
      for (const auto& k : r.kids()) body.push_back(to_text(k));
    else
      body.push_back(to_text(r));
  }
  std::string s = c.head ? to_text(*c.head, names) : "false";
  s += " <- ";
  if (body.empty()) body.push_back("true");
  for (std::size_t i = 0; i < body.size(); ++i) s += (i ? ", " : "") + body[i];
  return s;
}

std::string to_text(const ChcSystem& sys) {
  std::string s;
  for (const auto& r : sys.relations) {
    s += "rel " + r.name + "(";
    for (std::size_t i = 0; i < r.args.size(); ++i)
      s += (i ? ", " : "") + r.args[i].name + ": " + std::string(sort_name(r.args[i].sort));
    s += ")\n";
  }
  if (!sys.relations.empty()) s += "\n";
  for (const auto& c : sys.clauses) s += to_text(c) + "\n";
  return s;
}

ChcSystem prune_unreachable(const ChcSystem& sys) {
  std::set<std::string> live;
  std::vector<std::string> work;
  auto visit = [&](const std::vector<RelAtom>& atoms) {
    for (const auto& a : atoms)
      if (live.insert(a.rel).second) work.push_back(a.rel);
  };
  if (const Clause* q = sys.query()) visit(q->atoms);
  while (!work.empty()) {
    std::string r = work.back();
    work.pop_back();
    for (const Clause* c : sys.clauses_of(r)) visit(c->atoms);
  }
  ChcSystem out;
  for (const auto& r : sys.relations)
    if (live.count(r.name)) out.relations.push_back(r);
  for (const auto& c : sys.clauses)
    if (!c.head || live.count(c.head->rel)) out.clauses.push_back(c);
  for (const auto& [src, uses] : sys.list_sources)
    for (const auto& u : uses)
      if (live.count(u.first)) out.list_sources[src].push_back(u);
  return out;
}

// ---- isomorphism ----

namespace {

std::string lf_text(LinearForm lf, bool sign_free) {
  if (sign_free && !lf.coeffs.empty() && lf.coeffs.begin()->second < 0) {
    for (auto& [v, c] : lf.coeffs) c = -c;
    lf.constant = -lf.constant;
  }
  std::string s;
  for (const auto& [v, c] : lf.coeffs) s += std::to_string(c) + "*" + v + "+";
  return s + std::to_string(lf.constant);
}

std::string canon_term(const Expr& e) {
  if (e.sort() == Sort::Int)
    if (auto lf = linear_form(e)) return lf_text(*lf, false);
  return to_smt(e);
}

std::string canon_atom(const Expr& c) {
  using Op = Expr::Op;
  bool neg = false;
  Expr e = c;
  if (e.op() == Op::Not) {
    neg = true;
    e = e.kids()[0];
  }
  if ((e.op() == Op::Eq || e.op() == Op::Le || e.op() == Op::Lt) && e.kids()[0].sort() == Sort::Int) {
    Expr a = e.kids()[0], b = e.kids()[1];
    auto diff = linear_form(Expr::sub(a, b));
    auto rdiff = linear_form(Expr::sub(b, a));
    if (diff && rdiff) {
      if (e.op() == Op::Eq) return (neg ? "!=" : "=") + lf_text(*diff, true);
      if (e.op() == Op::Le) {
        if (!neg) return "<=" + lf_text(*diff, false);
        LinearForm f = *rdiff;  // b - a + 1 <= 0
        f.constant = checked_add(f.constant, 1);
        return "<=" + lf_text(f, false);
      }
      if (!neg) {
        LinearForm f = *diff;
        f.constant = checked_add(f.constant, 1);
        return "<=" + lf_text(f, false);
      }
      return "<=" + lf_text(*rdiff, false);
    }
  }
  if (e.op() == Op::Eq && e.kids()[0].sort() == Sort::Bool) {
    std::string x = to_smt(e.kids()[0]), y = to_smt(e.kids()[1]);
    if (y < x) std::swap(x, y);
    return std::string(neg ? "!" : "") + "(= " + x + " " + y + ")";
  }
  return to_smt(c);
}

void conjuncts(const Expr& e, std::vector<Expr>& out) {
  if (e.op() == Expr::Op::And) {
    for (const auto& k : e.kids()) conjuncts(k, out);
    return;
  }
  if (e.is_true()) return;
  out.push_back(e);
}

struct CanonClause {
  std::vector<std::string> atoms;  // head first (if any), then body atoms, as rel|args
  std::multiset<std::string> constraints;
  friend bool operator==(const CanonClause&, const CanonClause&) = default;
};

CanonClause canonicalize(const Clause& c, const std::vector<std::size_t>& atom_order, const std::vector<Expr>& leftovers,
                         const std::map<std::string, std::string>& relmap) {
  std::map<std::string, std::string> names;
  std::vector<Expr> vs;
  if (c.head) atom_vars(*c.head, vs);
  for (std::size_t i : atom_order) atom_vars(c.atoms[i], vs);
  for (const auto& v : vs) names.emplace(v.name(), "v" + std::to_string(names.size()));
  for (const auto& v : leftovers) names.emplace(v.name(), "v" + std::to_string(names.size()));
  auto atom_text = [&](const RelAtom& a) {
    auto it = relmap.find(a.rel);
    std::string s = (it == relmap.end() ? a.rel : it->second) + "|";
    for (const auto& e : a.args) s += canon_term(rename(e, names)) + ";";
    return s;
  };
  CanonClause out;
  out.atoms.push_back(c.head ? atom_text(*c.head) : "false");
  for (std::size_t i : atom_order) out.atoms.push_back(atom_text(c.atoms[i]));
  std::vector<Expr> cs;
  for (const auto& g : c.constraints()) conjuncts(rename(g, names), cs);
  for (const auto& g : cs) out.constraints.insert(canon_atom(g));
  return out;
}

std::vector<Expr> leftover_vars(const Clause& c) {
  std::vector<Expr> in_atoms;
  if (c.head) atom_vars(*c.head, in_atoms);
  for (const auto& a : c.atoms) atom_vars(a, in_atoms);
  std::vector<Expr> all;
  for (const auto& g : c.constraints()) free_vars(g, all);
  std::vector<Expr> out;
  for (const auto& v : all)
    if (std::none_of(in_atoms.begin(), in_atoms.end(), [&](const Expr& w) { return w.name() == v.name(); })) out.push_back(v);
  return out;
}

bool clauses_match(const Clause& a, const Clause& b, const std::map<std::string, std::string>& relmap) {
  if (a.is_query() != b.is_query() || a.atoms.size() != b.atoms.size()) return false;
  if (a.head && relmap.at(a.head->rel) != b.head->rel) return false;
  std::vector<std::size_t> ida(a.atoms.size());
  for (std::size_t i = 0; i < ida.size(); ++i) ida[i] = i;
  std::vector<Expr> left_a = leftover_vars(a);
  std::vector<Expr> left_b = leftover_vars(b);
  if (left_a.size() != left_b.size() || left_a.size() > 7) return false;
  CanonClause ca = canonicalize(a, ida, left_a, relmap);
  std::map<std::string, std::string> identity;
  for (const auto& [k, v] : relmap) identity[v] = v;
  std::vector<std::size_t> perm = ida;
  do {
    bool rels_ok = true;
    for (std::size_t i = 0; i < perm.size() && rels_ok; ++i) rels_ok = relmap.at(a.atoms[i].rel) == b.atoms[perm[i]].rel;
    if (!rels_ok) continue;
    std::vector<std::size_t> lperm(left_b.size());
    for (std::size_t i = 0; i < lperm.size(); ++i) lperm[i] = i;
    do {
      std::vector<Expr> lb;
      for (std::size_t i : lperm) lb.push_back(left_b[i]);
      if (canonicalize(b, perm, lb, identity) == ca) return true;
    } while (std::next_permutation(lperm.begin(), lperm.end()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

bool match_clauses(const ChcSystem& a, const ChcSystem& b, const std::map<std::string, std::string>& relmap) {
  std::vector<bool> used(b.clauses.size(), false);
  std::function<bool(std::size_t)> go = [&](std::size_t i) {
    if (i == a.clauses.size()) return true;
    for (std::size_t j = 0; j < b.clauses.size(); ++j) {
      if (used[j] || !clauses_match(a.clauses[i], b.clauses[j], relmap)) continue;
      used[j] = true;
      if (go(i + 1)) return true;
      used[j] = false;
    }
    return false;
  };
  return go(0);
}

bool same_signature(const RelationSymbol& x, const RelationSymbol& y) {
  if (x.arity() != y.arity()) return false;
  for (std::size_t i = 0; i < x.arity(); ++i)
    if (x.args[i].sort != y.args[i].sort) return false;
  return true;
}

}  // namespace

bool isomorphic(const ChcSystem& a, const ChcSystem& b) {
  if (a.relations.size() != b.relations.size() || a.clauses.size() != b.clauses.size()) return false;
  std::map<std::string, std::string> relmap;
  std::vector<bool> used(b.relations.size(), false);
  std::function<bool(std::size_t)> go = [&](std::size_t i) {
    if (i == a.relations.size()) return match_clauses(a, b, relmap);
    for (std::size_t j = 0; j < b.relations.size(); ++j) {
      if (used[j] || !same_signature(a.relations[i], b.relations[j])) continue;
      used[j] = true;
      relmap[a.relations[i].name] = b.relations[j].name;
      if (go(i + 1)) return true;
      used[j] = false;
    }
    relmap.erase(a.relations[i].name);
    return false;
  };
  return go(0);
}

}  // namespace chcv
