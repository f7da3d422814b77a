#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "anonelect/error.hpp"
#include "anonelect/graph.hpp"

namespace anonelect {

// Route trails that double in length every stage are kept as shared DAGs of
// concatenations and reversals over even-length literal pieces. Lengths stay
// exact in 64 bits far beyond any walkable horizon; traversal, equality and
// feasibility all work element by element without materializing.

struct RopeNode;
using RopeRef = const RopeNode*;

struct RopeNode {
  enum class Kind { kLeaf, kConcat, kRev };
  Kind kind = Kind::kLeaf;
  Trail leaf;                // kLeaf
  RopeRef left = nullptr;    // kConcat, kRev
  RopeRef right = nullptr;   // kConcat
  std::uint64_t length = 0;
};

class RopeArena {
 public:
  RopeRef empty();
  RopeRef leaf(Trail t);                 // t must have even length
  RopeRef concat(RopeRef a, RopeRef b);  // drops empty sides
  RopeRef rev(RopeRef a);                // collapses double reversal

 private:
  RopeRef store(RopeNode n);

  struct TrailHash {
    std::size_t operator()(const Trail& t) const;
  };
  std::mutex mu_;
  std::deque<RopeNode> store_;
  std::unordered_map<Trail, RopeRef, TrailHash> leaves_;
  std::map<std::tuple<int, RopeRef, RopeRef>, RopeRef> composites_;
  RopeRef empty_ = nullptr;
};

// Element-at-a-time cursor. next() yields ports in trail order.
class RopeIter {
 public:
  explicit RopeIter(RopeRef r) { if (r && r->length > 0) push(r, false); }
  bool next(Port& out);

 private:
  void push(RopeRef n, bool rev);
  struct Pending {
    RopeRef node;
    bool rev;
  };
  std::vector<Pending> pending_;
  RopeRef leaf_ = nullptr;
  bool leaf_rev_ = false;
  std::uint64_t leaf_pos_ = 0;
};

bool rope_equal(RopeRef a, RopeRef b);

// Materializes the whole trail; refuses ropes longer than cap.
Trail rope_materialize(RopeRef r, std::uint64_t cap = kDefaultTrailCap);

// True when the first t.size() elements of r are exactly t. t.size() may not
// exceed the rope length.
bool rope_starts_with(RopeRef r, const Trail& t);

// Walks ropes through a deterministic port world (same concept as
// walk_trail), memoizing the end state per (rope node, direction, start
// state). Worlds reachable from a bounded graph keep the memo small no
// matter how long the rope is.
template <class World>
class RopeWalker {
 public:
  explicit RopeWalker(World w) : w_(std::move(w)) {}

  using State = typename World::State;

  // End state of the traversal, or nullopt when some step is infeasible.
  std::optional<State> run(RopeRef r, bool reversed, State from) {
    if (r == nullptr || r->length == 0) return from;
    Key key{r, reversed, from};
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    std::optional<State> out;
    switch (r->kind) {
      case RopeNode::Kind::kLeaf: {
        std::optional<State> cur = from;
        std::uint64_t pairs = r->leaf.size() / 2;
        for (std::uint64_t i = 0; i < pairs && cur; ++i) {
          Port exit, entry;
          if (!reversed) {
            exit = r->leaf[2 * i];
            entry = r->leaf[2 * i + 1];
          } else {
            exit = r->leaf[r->leaf.size() - 1 - 2 * i];
            entry = r->leaf[r->leaf.size() - 2 - 2 * i];
          }
          if (exit < 0 || exit >= w_.degree(*cur)) {
            cur.reset();
            break;
          }
          auto [got, next] = w_.step(*cur, exit);
          if (got != entry) {
            cur.reset();
            break;
          }
          cur = next;
        }
        out = cur;
        break;
      }
      case RopeNode::Kind::kConcat: {
        RopeRef first = reversed ? r->right : r->left;
        RopeRef second = reversed ? r->left : r->right;
        auto mid = run(first, reversed, from);
        out = mid ? run(second, reversed, *mid) : std::nullopt;
        break;
      }
      case RopeNode::Kind::kRev:
        out = run(r->left, !reversed, from);
        break;
    }
    memo_[key] = out;
    return out;
  }

 private:
  struct Key {
    RopeRef node;
    bool rev;
    State from;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = std::hash<const void*>()(k.node);
      h ^= std::hash<State>()(k.from) + 0x9e3779b97f4a7c15ULL + (h << 6) +
           (h >> 2);
      return h ^ (k.rev ? 0x5bd1e995u : 0u);
    }
  };
  World w_;
  std::unordered_map<Key, std::optional<State>, KeyHash> memo_;
};

}  // namespace anonelect
