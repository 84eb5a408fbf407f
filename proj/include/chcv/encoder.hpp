#pragma once

#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "chcv/chc.hpp"
#include "chcv/core.hpp"
#include "chcv/lists.hpp"
#include "chcv/symexec.hpp"

namespace chcv {

struct EncodedProgram {
  ChcSystem system;
  /// Summaries per relation in creation order; the top level appears as "main".
  std::vector<std::pair<std::string, std::vector<BranchSummary>>> summaries;
  std::shared_ptr<SourceRegistry> sources;
  /// Length variables of declared symbolic lists.
  std::map<std::string, Expr> declared_lists;
};

/// Builds one relation per recursive function instance and per unbounded fold instance.
/// Non-recursive functions and lambdas are inlined by the executor.
class Encoder : public CallResolver {
 public:
  explicit Encoder(const Program& program);

  RelationSymbol instantiate(const std::string& fn, const FnAssignment& assignment) override;
  RelationSymbol instantiate_fold(const FoldKey& key) override;
  void note_iteration(int source, const std::string& rel, const std::string& site) override;

  /// Summaries of an instantiated relation.
  std::vector<BranchSummary> summarize(const std::string& rel);

  /// Encodes the whole program: relations reachable from the top level, then the query.
  /// Throws SourceError when the program has no assertion at all.
  EncodedProgram encode();

  VarGen& gen() { return gen_; }
  SourceRegistry& sources() { return *sources_; }
  const std::vector<RelationSymbol>& relations() const { return relations_; }

 private:
  struct Instance {
    std::string fn;  // empty for folds
    FnAssignment assignment;
    std::optional<FoldKey> fold;
    std::set<std::string> reads, writes;
    bool ok = false;
  };

  struct Scope {
    std::set<std::string> reads, writes;
    bool may_assert = false;
  };
  Scope scope_of(const FnValue& f) const;
  RelationSymbol& add_relation(RelationSymbol rel, Instance inst);
  std::vector<BranchSummary> summarize_function(const RelationSymbol& rel, const Instance& inst);
  std::vector<BranchSummary> summarize_fold(const RelationSymbol& rel, const Instance& inst);
  void bind_globals(Executor& ex, const Instance& inst, Path& p, std::vector<Expr>& inputs);
  std::vector<Expr> outputs_of(const Path& p, const RelationSymbol& rel) const;

  const Program& program_;
  VarGen gen_;
  std::shared_ptr<SourceRegistry> sources_;
  std::vector<RelationSymbol> relations_;
  std::map<std::string, Instance> instances_;
  std::map<std::string, std::string> by_key_;
  std::map<int, std::vector<std::pair<std::string, std::string>>> iterations_;
};

/// One clause per summary: `rel(inputs, outs) <- calls, pc, outs = outputs`.
std::vector<Clause> encode_function(const RelationSymbol& rel, const std::vector<BranchSummary>& summaries, VarGen& gen);

/// `false <- calls, lengths >= 0, pre, not (post and obligations)`.
Clause encode_query(const std::vector<Expr>& pre, const std::vector<RelAtom>& calls,
                    const std::vector<Obligation>& obligations, const std::vector<Expr>& list_lengths);

EncodedProgram encode_program(const Program& program);

/// Stable short hash used in relation names.
std::string name_hash(const std::string& text);

}  // namespace chcv
