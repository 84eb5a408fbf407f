#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "chcv/chc.hpp"

namespace chcv {

struct SyncCandidate {
  enum class Kind { List, Numeric };
  Kind kind = Kind::List;
  std::size_t atom_p = 0, atom_q = 0;  // positions in the query body
  std::string p, q;
  std::optional<int> source;          // list candidates
  std::size_t induction = 0;          // numeric candidates: argument decremented by the step
};

/// Pairs of query atoms that iterate the same list source in lockstep, or two copies of the same
/// numeric recursion. Leftmost pairs come first.
std::vector<SyncCandidate> find_candidates(const ChcSystem& sys);

struct SyncResult {
  ChcSystem system;
  bool applied = false;
  std::string warning;
};

/// Replaces the candidate's two query atoms by one product relation whose step conjoins both steps
/// and equates the elements (or induction arguments) consumed at the same time.
SyncResult synchronize(const ChcSystem& sys, const SyncCandidate& cand);

/// Synchronizes until no candidate applies.
ChcSystem apply_all(const ChcSystem& sys, std::vector<std::string>* warnings = nullptr);

}  // namespace chcv
