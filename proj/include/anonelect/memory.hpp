#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <unordered_set>
#include <vector>

#include "anonelect/error.hpp"
#include "anonelect/graph.hpp"

namespace anonelect {

// An agent's whole memory is the sequence of tokens it has observed. Chains
// are interned append-only: a node identifies its entire prefix, so snapshot
// exchange, equality and common-prefix search are pointer operations. Nothing
// an agent can observe identifies nodes or agents; ports, degrees and nested
// snapshots are all there is.

struct MemoryNode;
using MemRef = const MemoryNode*;  // nullptr = empty memory

struct Token {
  enum class Kind { kWake, kEnter, kExit, kMeet };
  Kind kind = Kind::kWake;
  int a = 0;  // Wake: degree; Enter: entry port; Exit: exit port
  int b = 0;  // Enter: degree of the entered node
  std::vector<MemRef> meet;  // Meet: canonically sorted, deduplicated

  static Token wake(int degree) { return {Kind::kWake, degree, 0, {}}; }
  static Token enter(Port p, int degree) { return {Kind::kEnter, p, degree, {}}; }
  static Token exit(Port q) { return {Kind::kExit, q, 0, {}}; }
  static Token meet_of(std::vector<MemRef> items) {
    return {Kind::kMeet, 0, 0, std::move(items)};
  }

  bool operator==(const Token&) const = default;
};

struct MemoryNode {
  MemRef parent = nullptr;
  Token token;
  std::uint64_t length = 0;  // token count including this one
  std::uint64_t id = 0;      // arena-assigned, deterministic per run
};

class MemoryArena {
 public:
  MemRef append(MemRef parent, Token t);

  // Canonical order: tokenwise from the front; a proper prefix orders first.
  // Tokens order by kind (Wake, Enter, Exit, Meet), then fields; Meet lists
  // by item count then itemwise recursively. Equality is pointer equality.
  int compare(MemRef a, MemRef b);

  // Sorted, deduplicated Meet payload.
  std::vector<MemRef> canonical_meet(std::vector<MemRef> items);

 private:
  struct Hash {
    std::size_t operator()(const MemoryNode* n) const;
  };
  struct Eq {
    bool operator()(const MemoryNode* a, const MemoryNode* b) const;
  };
  int compare_tokens(const Token& x, const Token& y);

  std::mutex mu_;
  std::deque<MemoryNode> store_;
  std::unordered_set<const MemoryNode*, Hash, Eq> table_;
  std::map<std::pair<MemRef, MemRef>, int> compare_memo_;
};

inline std::uint64_t memory_length(MemRef m) { return m ? m->length : 0; }

// Tokens in observation order (front first).
std::vector<const Token*> memory_tokens(MemRef m);

// Flat integer form: Wake -> 0 d, Enter -> 1 p d, Exit -> 2 q,
// Meet -> 3 k then each snapshot's serialization inlined. Refuses outputs
// longer than cap.
std::vector<std::int64_t> memory_serialize(MemRef m, std::uint64_t cap = kDefaultTrailCap);

}  // namespace anonelect
