#include "chcv/lists.hpp"

#include <stdexcept>

namespace chcv {

Expr builtin_length(const SymList& lv) {
  Expr n = Expr::int_lit(static_cast<std::int64_t>(lv.prefix.size()));
  return lv.tail ? Expr::add(lv.tail->length, n) : n;
}

int SourceRegistry::fresh(Expr length, std::string origin) {
  std::lock_guard<std::mutex> lock(mu_);
  int id = static_cast<int>(sources_.size());
  sources_.push_back({id, std::move(length), std::move(origin)});
  return id;
}

SourceInfo SourceRegistry::info(int id) const {
  std::lock_guard<std::mutex> lock(mu_);
  return sources_.at(static_cast<std::size_t>(id));
}

std::size_t SourceRegistry::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return sources_.size();
}

void SourceRegistry::register_head(int source, const std::string& consumer, const Expr& hd) {
  std::lock_guard<std::mutex> lock(mu_);
  for (const auto& h : heads_)
    if (h.hd == hd) throw std::logic_error("element variable " + hd.name() + " registered twice");
  heads_.push_back({source, consumer, hd});
}

std::vector<HeadRecord> SourceRegistry::heads() const {
  std::lock_guard<std::mutex> lock(mu_);
  return heads_;
}

std::vector<HeadRecord> SourceRegistry::heads_of(int source) const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<HeadRecord> out;
  for (const auto& h : heads_)
    if (h.source == source) out.push_back(h);
  return out;
}

ConsumeStep consume_step(const SymList& lv, VarGen& gen, SourceRegistry& reg, const std::string& consumer,
                         const ChainApply& apply) {
  ConsumeStep step;
  if (!lv.prefix.empty()) {
    step.head = lv.prefix.front();
    step.rest.prefix.assign(lv.prefix.begin() + 1, lv.prefix.end());
    step.rest.tail = lv.tail;
    step.guard = Expr::bool_lit(true);
    return step;
  }
  if (!lv.tail) {
    step.head = Expr::int_lit(0);
    step.rest = lv;
    step.guard = Expr::bool_lit(false);
    return step;
  }
  const ListTail& t = *lv.tail;
  Expr hd = gen.fresh("hd", Sort::Int);
  reg.register_head(t.source, consumer, hd);
  step.fresh_hd = hd;
  step.head = t.chain.empty() ? hd : apply(t.chain, hd);
  step.guard = Expr::gt(t.length, Expr::int_lit(0));
  step.rest.tail = ListTail{t.source, Expr::sub(t.length, Expr::int_lit(1)), t.chain};
  return step;
}

SymList builtin_append(const SymList& a, const SymList& b, SourceRegistry& reg) {
  SymList out;
  out.prefix = a.prefix;
  if (!a.tail) {
    out.prefix.insert(out.prefix.end(), b.prefix.begin(), b.prefix.end());
    out.tail = b.tail;
    return out;
  }
  Expr len = Expr::add(a.tail->length, builtin_length(b));
  out.tail = ListTail{reg.fresh(len, "append"), len, {}};
  return out;
}

SymList fuse_map(const FnValue& f, const SymList& lv, const std::function<Expr(const Expr&)>& apply) {
  SymList out;
  for (const auto& e : lv.prefix) out.prefix.push_back(apply(e));
  out.tail = lv.tail;
  if (out.tail) out.tail->chain.push_back(f);
  return out;
}

std::string to_string(const FnValue& f) { return f.kind == FnValue::Kind::Builtin ? "builtin:" + f.name : f.name; }

std::string to_string(const SymList& lv) {
  std::string s = "[";
  for (std::size_t i = 0; i < lv.prefix.size(); ++i) s += (i ? ", " : "") + to_text(lv.prefix[i]);
  s += "]";
  if (lv.tail) {
    s += " ++ S" + std::to_string(lv.tail->source) + "(" + to_text(lv.tail->length) + ")";
    for (const auto& f : lv.tail->chain) s += " |> " + to_string(f);
  }
  return s;
}

}  // namespace chcv
