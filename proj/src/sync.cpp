#include "chcv/sync.hpp"

#include <algorithm>
#include <set>

namespace chcv {

namespace {

struct StepShape {
  const Clause* base = nullptr;
  const Clause* step = nullptr;
  std::size_t self_atom = 0;
};

std::size_t self_atoms(const Clause& c, const std::string& rel) {
  return static_cast<std::size_t>(std::count_if(c.atoms.begin(), c.atoms.end(), [&](const RelAtom& a) { return a.rel == rel; }));
}

std::optional<StepShape> step_shape(const ChcSystem& sys, const std::string& rel) {
  auto cs = sys.clauses_of(rel);
  if (cs.size() != 2) return std::nullopt;
  for (int b = 0; b < 2; ++b) {
    const Clause* base = cs[static_cast<std::size_t>(b)];
    const Clause* step = cs[static_cast<std::size_t>(1 - b)];
    if (self_atoms(*base, rel) != 0 || self_atoms(*step, rel) != 1) continue;
    StepShape s{base, step, 0};
    for (std::size_t i = 0; i < step->atoms.size(); ++i)
      if (step->atoms[i].rel == rel) s.self_atom = i;
    return s;
  }
  return std::nullopt;
}

bool only_mentions(const std::vector<Expr>& fs, const std::string& var) {
  for (const auto& f : fs)
    for (const auto& v : free_vars(f))
      if (v.name() != var) return false;
  return true;
}

// Collects the breakpoints of every comparison in `f`; false when some comparison is not linear.
bool breakpoints(const Expr& f, const std::string& x, std::set<std::int64_t>& out) {
  using Op = Expr::Op;
  if ((f.op() == Op::Eq || f.op() == Op::Le || f.op() == Op::Lt) && f.kids()[0].sort() == Sort::Int) {
    auto lf = linear_form(Expr::sub(f.kids()[0], f.kids()[1]));
    if (!lf) return false;
    auto it = lf->coeffs.find(x);
    if (it == lf->coeffs.end()) return true;
    std::int64_t a = it->second, b = lf->constant;
    std::int64_t q = -b / a;
    for (std::int64_t d = -2; d <= 2; ++d) out.insert(q + d);
    return lf->coeffs.size() == 1;
  }
  for (const auto& k : f.kids())
    if (!breakpoints(k, x, out)) return false;
  return true;
}

// Exact satisfiability of a linear formula over the single integer variable `x`.
std::optional<bool> satisfiable_in(const Expr& f, const std::string& x) {
  std::set<std::int64_t> pts;
  if (!breakpoints(f, x, pts)) return std::nullopt;
  if (pts.empty()) pts.insert(0);
  pts.insert(*pts.begin() - 1);
  pts.insert(*pts.rbegin() + 1);
  for (std::int64_t v : pts) {
    Value r = eval(f, [&](const std::string&) { return Value::of_int(v); });
    if (r.b) return true;
  }
  return false;
}

std::optional<std::size_t> induction_arg(const RelationSymbol& rel, const StepShape& s) {
  const RelAtom& head = *s.step->head;
  const RelAtom& self = s.step->atoms[s.self_atom];
  for (std::size_t i = 0; i < rel.arity(); ++i) {
    if (rel.args[i].role != ArgRole::ValueIn || rel.args[i].sort != Sort::Int) continue;
    const Expr& x = head.args[i];
    if (x.op() != Expr::Op::Var) continue;
    auto lf = linear_form(Expr::sub(self.args[i], x));
    if (!lf || !lf->coeffs.empty() || lf->constant >= 0) continue;
    const Expr& bx = s.base->head->args[i];
    if (bx.op() != Expr::Op::Var) continue;
    if (!only_mentions(s.step->guards, x.name()) || !only_mentions(s.base->guards, bx.name())) continue;
    // Base and step must be mutually exclusive on the induction argument.
    std::map<std::string, Expr> sub{{bx.name(), x}};
    Expr both = Expr::and_(substitute(Expr::and_(s.base->guards), sub), Expr::and_(s.step->guards));
    auto sat = satisfiable_in(both, x.name());
    if (!sat || *sat) continue;
    return i;
  }
  return std::nullopt;
}

bool lengths_agree(const RelationSymbol& r, const RelAtom& a, const Expr& len) {
  for (std::size_t pos : r.iterator->length_positions)
    if (!(a.args.at(pos) == len)) return false;
  return true;
}

}  // namespace

std::vector<SyncCandidate> find_candidates(const ChcSystem& sys) {
  std::vector<SyncCandidate> out;
  const Clause* q = sys.query();
  if (!q) return out;
  for (std::size_t i = 0; i < q->atoms.size(); ++i)
    for (std::size_t j = i + 1; j < q->atoms.size(); ++j) {
      const RelAtom& a = q->atoms[i];
      const RelAtom& b = q->atoms[j];
      const RelationSymbol* ra = sys.find(a.rel);
      const RelationSymbol* rb = sys.find(b.rel);
      if (!ra || !rb) continue;
      if (ra->iterator && rb->iterator) {
        if (!a.source || a.source != b.source || ra->iterator->direction != rb->iterator->direction) continue;
        const Expr& len = a.args.at(ra->iterator->length_positions.at(0));
        if (!lengths_agree(*ra, a, len) || !lengths_agree(*rb, b, len)) continue;
        out.push_back({SyncCandidate::Kind::List, i, j, a.rel, b.rel, a.source, 0});
        continue;
      }
      if (a.rel != b.rel || ra->iterator) continue;
      // Shape is checked by synchronize, which reports a mismatch instead of dropping it silently.
      std::size_t ind = 0;
      if (auto shape = step_shape(sys, a.rel))
        if (auto k = induction_arg(*ra, *shape)) ind = *k;
      out.push_back({SyncCandidate::Kind::Numeric, i, j, a.rel, b.rel, std::nullopt, ind});
    }
  return out;
}

namespace {

Expr prime(const Expr& e) {
  std::map<std::string, Expr> sub;
  for (const auto& v : free_vars(e))
    if (v.name().find('!') != std::string::npos) sub.emplace(v.name(), Expr::var(v.name() + "'", v.sort()));
  return substitute(e, sub);
}

RelAtom prime(const RelAtom& a) {
  RelAtom out = a;
  for (auto& e : out.args) e = prime(e);
  return out;
}

Clause prime(const Clause& c) {
  Clause out;
  if (c.head) out.head = prime(*c.head);
  for (const auto& a : c.atoms) out.atoms.push_back(prime(a));
  for (const auto& g : c.guards) out.guards.push_back(prime(g));
  for (const auto& g : c.bindings) out.bindings.push_back(prime(g));
  for (const auto& g : c.consumed) out.consumed.push_back(prime(g));
  return out;
}

RelAtom concat(const std::string& name, const RelAtom& a, const RelAtom& b) {
  RelAtom out{name, a.args, a.source};
  out.args.insert(out.args.end(), b.args.begin(), b.args.end());
  return out;
}

Clause product_clause(const std::string& name, const Clause& p, const Clause& q, const std::string& prel,
                      const std::string& qrel, std::optional<Expr> implant) {
  Clause out;
  out.head = concat(name, *p.head, *q.head);
  std::optional<RelAtom> sp, sq;
  std::vector<RelAtom> rest;
  for (const auto& a : p.atoms) {
    if (a.rel == prel && !sp) sp = a;
    else rest.push_back(a);
  }
  for (const auto& a : q.atoms) {
    if (a.rel == qrel && !sq) sq = a;
    else rest.push_back(a);
  }
  if (sp) out.atoms.push_back(concat(name, *sp, *sq));
  out.atoms.insert(out.atoms.end(), rest.begin(), rest.end());
  if (implant) out.guards.push_back(*implant);
  out.guards.insert(out.guards.end(), p.guards.begin(), p.guards.end());
  out.guards.insert(out.guards.end(), q.guards.begin(), q.guards.end());
  out.bindings = p.bindings;
  out.bindings.insert(out.bindings.end(), q.bindings.begin(), q.bindings.end());
  out.consumed = p.consumed;
  out.consumed.insert(out.consumed.end(), q.consumed.begin(), q.consumed.end());
  return out;
}

}  // namespace

SyncResult synchronize(const ChcSystem& sys, const SyncCandidate& cand) {
  SyncResult r{sys, false, {}};
  const RelationSymbol* rp = sys.find(cand.p);
  const RelationSymbol* rq = sys.find(cand.q);
  auto sp = step_shape(sys, cand.p);
  auto sq = step_shape(sys, cand.q);
  if (!rp || !rq || !sp || !sq) {
    r.warning = "skipping synchronization of " + cand.p + " and " + cand.q + ": no base/step decomposition";
    return r;
  }
  if (cand.kind == SyncCandidate::Kind::Numeric) {
    auto ind = induction_arg(*rp, *sp);
    const Clause* q = sys.query();
    if (!ind || *ind != cand.induction) {
      r.warning = "skipping synchronization of " + cand.p + " with itself: no argument decreases by a constant in every step";
      return r;
    }
    if (!q || !(q->atoms.at(cand.atom_p).args.at(*ind) == q->atoms.at(cand.atom_q).args.at(*ind))) {
      r.warning = "skipping synchronization of " + cand.p + " with itself: the calls do not start in lockstep";
      return r;
    }
  }
  std::string name = cand.p + "&" + cand.q;
  ChcSystem out = sys;
  if (!out.find(name)) {
    Clause qbase = prime(*sq->base);
    Clause qstep = prime(*sq->step);
    std::optional<Expr> implant;
    if (cand.kind == SyncCandidate::Kind::List) {
      if (sp->step->consumed.empty() || qstep.consumed.empty()) {
        r.warning = "skipping synchronization of " + cand.p + " and " + cand.q + ": step does not consume an element";
        return r;
      }
      implant = Expr::eq(sp->step->consumed.front(), qstep.consumed.front());
    } else {
      implant = Expr::eq(sp->step->head->args.at(cand.induction), qstep.head->args.at(cand.induction));
    }
    RelationSymbol prod;
    prod.name = name;
    prod.origin = "sync";
    prod.args = rp->args;
    prod.args.insert(prod.args.end(), rq->args.begin(), rq->args.end());
    prod.assignment = rp->assignment;
    prod.assignment.insert(prod.assignment.end(), rq->assignment.begin(), rq->assignment.end());
    if (rp->iterator && rq->iterator) {
      IteratorInfo it = *rp->iterator;
      for (std::size_t pos : rq->iterator->length_positions) it.length_positions.push_back(pos + rp->arity());
      prod.iterator = it;
    }
    out.relations.push_back(prod);
    auto at = std::find_if(out.clauses.begin(), out.clauses.end(), [](const Clause& c) { return c.is_query(); });
    at = out.clauses.insert(at, product_clause(name, *sp->step, qstep, cand.p, cand.q, implant));
    out.clauses.insert(at, product_clause(name, *sp->base, qbase, cand.p, cand.q, std::nullopt));
  }
  for (auto& c : out.clauses) {
    if (!c.is_query()) continue;
    RelAtom merged = concat(name, c.atoms.at(cand.atom_p), c.atoms.at(cand.atom_q));
    c.atoms[cand.atom_p] = merged;
    c.atoms.erase(c.atoms.begin() + static_cast<std::ptrdiff_t>(cand.atom_q));
    if (merged.source) {
      auto& uses = out.list_sources[*merged.source];
      if (std::find(uses.begin(), uses.end(), std::make_pair(name, std::string("query"))) == uses.end())
        uses.emplace_back(name, "query");
    }
  }
  r.system = prune_unreachable(out);
  r.applied = true;
  return r;
}

ChcSystem apply_all(const ChcSystem& sys, std::vector<std::string>* warnings) {
  ChcSystem cur = sys;
  for (;;) {
    bool progressed = false;
    for (const auto& cand : find_candidates(cur)) {
      SyncResult r = synchronize(cur, cand);
      if (!r.warning.empty() && warnings &&
          std::find(warnings->begin(), warnings->end(), r.warning) == warnings->end())
        warnings->push_back(r.warning);
      if (r.applied) {
        cur = std::move(r.system);
        progressed = true;
        break;
      }
    }
    if (!progressed) return cur;
  }
}

}  // namespace chcv
