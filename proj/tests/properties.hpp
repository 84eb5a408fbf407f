#pragma once

// Solver-free checks shared by the unit suite and the acceptance runner.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "chcv/backend.hpp"
#include "chcv/encoder.hpp"
#include "chcv/harness.hpp"
#include "chcv/interp.hpp"
#include "chcv/oracle.hpp"
#include "chcv/sync.hpp"
#include "support.hpp"

namespace chcv::testing {

struct PropertyResult {
  std::size_t checked = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

inline bool integer_only(const FunctionDef& f) {
  if (f.is_lambda || !f.reads.empty() || !f.writes.empty() || f.may_assert || f.params.empty()) return false;
  for (const auto& p : f.params)
    if (p.is_function || !p.type->is(Type::Kind::Int)) return false;
  return f.ret->is(Type::Kind::Int) || f.ret->is(Type::Kind::Bool);
}

namespace detail {

struct ZeroChooser : Chooser {
  int choose(int) override { return 0; }
};

inline Value to_value(const CValue& v) {
  if (auto b = std::get_if<bool>(&v)) return Value::of_bool(*b);
  return Value::of_int(std::get<std::int64_t>(v));
}

inline void for_each_input(std::size_t arity, int bound, const std::function<void(const std::vector<std::int64_t>&)>& fn) {
  std::vector<std::int64_t> xs(arity, -bound);
  for (;;) {
    fn(xs);
    std::size_t i = 0;
    while (i < arity && xs[i] == bound) xs[i++] = -bound;
    if (i == arity) return;
    ++xs[i];
  }
}

}  // namespace detail

/// For every integer-only function and every input in [-bound, bound]^n: exactly one summary's path
/// condition holds, and its output equals the concrete result. Callee atoms are resolved with the
/// concrete interpreter.
inline PropertyResult symexec_bounded_soundness(const Program& p, int bound) {
  PropertyResult res;
  detail::ZeroChooser chooser;
  for (const auto& f : p.functions) {
    if (!integer_only(f)) continue;
    Encoder enc(p);
    RelationSymbol rel = enc.instantiate(f.name, {});
    std::vector<BranchSummary> sums = enc.summarize(rel.name);
    std::map<std::string, std::string> origin;
    for (const auto& r : enc.relations()) origin[r.name] = r.origin;
    detail::for_each_input(f.params.size(), bound, [&](const std::vector<std::int64_t>& xs) {
      Interpreter interp(p, chooser, {bound, 0, 64});
      std::vector<CValue> args(xs.begin(), xs.end());
      CValue expected;
      if (interp.call(f.name, args, expected).kind != RunOutcome::Kind::Ok) return;
      ++res.checked;
      std::string where = f.name + "(" ;
      for (std::size_t i = 0; i < xs.size(); ++i) where += (i ? "," : "") + std::to_string(xs[i]);
      where += ")";
      int matching = 0;
      for (const auto& s : sums) {
        std::map<std::string, Value> env;
        for (std::size_t i = 0; i < s.inputs.size(); ++i) env[s.inputs[i].name()] = Value::of_int(xs[i]);
        Assignment look = [&](const std::string& n) {
          auto it = env.find(n);
          if (it == env.end()) throw std::runtime_error("unbound " + n);
          return it->second;
        };
        bool feasible = true;
        for (const auto& atom : s.calls) {
          std::vector<CValue> in;
          const RelationSymbol* cr = nullptr;
          for (const auto& r : enc.relations())
            if (r.name == atom.rel) cr = &r;
          std::size_t nin = 0;
          for (const auto& a : cr->args) nin += a.role == ArgRole::ValueIn;
          for (std::size_t i = 0; i < nin; ++i) {
            Value v = eval(atom.args[i], look);
            in.push_back(v.sort == Sort::Int ? CValue{v.i} : CValue{v.b});
          }
          Interpreter sub(p, chooser, {bound, 0, 64});
          CValue out;
          if (sub.call(origin.at(atom.rel), in, out).kind != RunOutcome::Kind::Ok) {
            feasible = false;
            break;
          }
          env[atom.args[nin].name()] = detail::to_value(out);
        }
        if (!feasible) continue;
        bool pc = true;
        for (const auto& g : s.pc) pc = pc && eval(g, look).b;
        if (!pc) continue;
        ++matching;
        Value got = eval(s.outputs.at(0), look);
        if (!(got == detail::to_value(expected))) res.failures.push_back(where + ": summary output differs from concrete result");
      }
      if (matching != 1) res.failures.push_back(where + ": " + std::to_string(matching) + " summaries apply");
    });
  }
  return res;
}

/// Oracle verdicts agree with the corpus labels, and with solver verdicts when given.
inline PropertyResult oracle_agreement(const std::vector<BenchmarkEntry>& entries, const OracleConfig& cfg,
                                       const std::map<std::string, Outcome>* verdicts = nullptr) {
  PropertyResult res;
  for (const auto& e : entries) {
    OracleResult o = run_oracle(lower(parse_file(e.path)), cfg);
    ++res.checked;
    bool violation = o.kind == OracleResult::Kind::Violation;
    if (e.expected == Outcome::Unsafe && !violation) res.failures.push_back(e.name + ": oracle found no violation");
    if (e.expected == Outcome::Safe && violation) res.failures.push_back(e.name + ": oracle found " + o.message);
    if (verdicts && verdicts->count(e.name) && verdicts->at(e.name) == Outcome::Safe && violation)
      res.failures.push_back(e.name + ": verified SAFE but the oracle found a violation");
  }
  return res;
}

/// Re-encoding yields byte-identical SMT-LIB, before and after synchronization.
inline PropertyResult emit_determinism(const std::vector<BenchmarkEntry>& entries) {
  PropertyResult res;
  for (const auto& e : entries) {
    std::string src = slurp(e.path);
    auto once = [&] {
      EncodedProgram ep = encode_program(lower(parse(src, e.path)));
      return emit_smt2(ep.system) + "\n" + emit_smt2(apply_all(ep.system));
    };
    ++res.checked;
    if (once() != once()) res.failures.push_back(e.name + ": encoding is not deterministic");
  }
  return res;
}

/// `(assert false)` gives a query whose body is trivially satisfiable; `(assert true)` one whose
/// body is unsatisfiable.
inline PropertyResult polarity() {
  PropertyResult res;
  auto query_of = [](const std::string& src) { return *encode_src(src).system.query(); };
  const char* prefix = "(declare-symbolic x int)\n(define (id y) y)\n";
  for (const char* post : {"#f", "(< (id x) (id x))", "(= x (+ x 1))"}) {
    Clause q = query_of(std::string(prefix) + "(verify " + post + ")");
    ++res.checked;
    bool all_true = q.atoms.empty();
    for (const auto& c : q.constraints()) all_true = all_true && c.is_true();
    if (!all_true) res.failures.push_back(std::string("assert ") + post + ": query body is not trivially true");
  }
  for (const char* post : {"#t", "(= (id x) x)", "(<= x (+ x 2))"}) {
    Clause q = query_of(std::string(prefix) + "(verify " + post + ")");
    ++res.checked;
    bool has_false = false;
    for (const auto& c : q.constraints()) has_false = has_false || c.is_false();
    if (!has_false) res.failures.push_back(std::string("assert ") + post + ": query body is not trivially false");
  }
  return res;
}

/// Iterators over a mapped list share its source; append of two unbounded lists iterates a new one.
inline PropertyResult source_ids() {
  PropertyResult res;
  auto sources = [](const std::string& file) {
    EncodedProgram ep = encode_program(lower(parse_file(corpus_path(file))));
    std::vector<std::optional<int>> out;
    for (const auto& a : ep.system.query()->atoms) out.push_back(a.source);
    return out;
  };
  auto fm = sources("fold-map");
  ++res.checked;
  if (fm.size() != 2 || !fm[0] || fm[0] != fm[1]) res.failures.push_back("fold-map: iterators do not share one source");
  auto la = sources("length-append");
  ++res.checked;
  if (la.size() != 3 || !la[0] || !la[1] || !la[2] || la[0] == la[1] || la[0] == la[2] || la[1] == la[2])
    res.failures.push_back("length-append: append does not iterate a fresh source");
  return res;
}

}  // namespace chcv::testing
