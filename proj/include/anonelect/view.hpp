#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "anonelect/graph.hpp"

namespace anonelect {

// Truncated views are rooted port-labeled trees: every node carries a degree,
// every node at positive remaining depth has exactly one child per port, and
// all leaves sit at the same depth. They are stored as maximally shared
// immutable DAGs interned in a ViewArena, so structural equality of two views
// from the same arena is pointer equality. Binary marks (agent positions) are
// part of the interned structure; plain views carry mark 0 everywhere.
struct ViewNode;
using ViewRef = const ViewNode*;

struct ViewChild {
  Port entry;     // port at the child end of the edge
  ViewRef node;
  bool operator==(const ViewChild&) const = default;
};

struct ViewNode {
  std::uint8_t mark = 0;
  int degree = 0;
  int depth = 0;            // remaining depth; 0 for frontier nodes
  std::uint64_t size = 1;   // number of tree positions in this subtree
  std::uint64_t code_len = 0;
  std::vector<ViewChild> children;  // empty iff frontier (or degree 0)
};

class ViewArena {
 public:
  ViewArena() = default;
  ViewArena(const ViewArena&) = delete;
  ViewArena& operator=(const ViewArena&) = delete;

  // Children must be empty (frontier) or exactly `degree` entries whose
  // subtree depths agree; entry ports must be valid at the child.
  ViewRef intern(std::uint8_t mark, int degree, std::vector<ViewChild> children);

  // Depth-k prefix of v (identity when k >= depth).
  ViewRef truncate(ViewRef v, int k);

 private:
  struct Hash {
    std::size_t operator()(const ViewNode* n) const;
  };
  struct Eq {
    bool operator()(const ViewNode* a, const ViewNode* b) const;
  };
  std::mutex mu_;
  std::deque<ViewNode> store_;
  std::unordered_set<const ViewNode*, Hash, Eq> table_;
  std::unordered_map<const ViewNode*,
                     std::unordered_map<int, ViewRef>> trunc_memo_;
};

// Depth-l truncated view from v; marks all zero.
ViewRef truncated_view(ViewArena& a, const Configuration& g, NodeId v, int l);
// Same tree with each position marked by the occupancy of its graph node.
ViewRef enhanced_view(ViewArena& a, const Configuration& g, NodeId v, int l);

// Closed smaller-port-first DFS traversal trail of the view (port pairs for
// every downward and return edge traversal). Equals dfs_trail on the graph.
Trail view_dfs_trail(ViewRef v);

// Canonical integer code of a view. The code records the closed DFS
// traversal: each downward edge emits (port_out, port_in), each return edge
// emits (port_in, port_out), and on first arrival at a frontier node its
// degree is emitted between the two. Marks are ignored. Depth-0 views encode
// to the empty sequence (their root degree is not recoverable; codes separate
// views of depth >= 1).
std::vector<int> view_code(ViewRef v);

// Streaming element-by-element comparison of two codes without
// materialization. Returns <0, 0, >0.
int code_compare_streaming(ViewRef a, ViewRef b);

// Inverse of view_code. Rejects sequences that are not the code of any view.
// The empty sequence decodes to the single degree-0 node.
ViewRef decode_code(ViewArena& a, const std::vector<int>& code);

// Subtree at the end of the trail from the root, or nullptr when the trail
// does not exist in the view (wrong ports or too deep).
ViewRef node_at_trail_end(ViewRef v, const Trail& t);

// Number of positions at depth <= k.
std::uint64_t position_count_to_depth(ViewRef v, int k);

// Preorder (xi-DFS) index of the position reached by the trail; nullopt when
// absent.
std::optional<std::uint64_t> position_index(ViewRef v, const Trail& t);

// ---- binary mappings over a view's positions, in xi-DFS preorder ----

struct BinaryMapping {
  std::vector<std::uint64_t> words;
  std::uint64_t n_bits = 0;

  static BinaryMapping zeros(std::uint64_t bits);
  bool get(std::uint64_t i) const {
    return (words[i >> 6] >> (i & 63)) & 1u;
  }
  void set(std::uint64_t i) { words[i >> 6] |= std::uint64_t(1) << (i & 63); }
  bool subset_of(const BinaryMapping& o) const;
  std::uint64_t count() const;
  bool operator==(const BinaryMapping&) const = default;
};

// Lexicographic comparison bit by bit from index 0.
std::strong_ordering mapping_lex_compare(const BinaryMapping& a,
                                         const BinaryMapping& b);

// Mapping with bit 1 exactly at positions whose graph node is occupied
// (over truncated_view(g, v, l)).
BinaryMapping ground_truth_mapping(const Configuration& g, NodeId v, int l);

// Mapping with bit 1 exactly at positions of depth <= k.
BinaryMapping depth_mask(ViewRef v, int k);

// Marked view obtained by stamping mapping bits onto a plain view.
ViewRef apply_mapping(ViewArena& a, ViewRef v, const BinaryMapping& m);
// Bits of a marked view, xi-DFS order.
BinaryMapping mapping_of_marked_view(ViewRef v);

// ---- complete identifiers ----

struct CompleteIdentifier {
  std::vector<int> code;
  BinaryMapping marks;
};

std::strong_ordering identifier_compare(const CompleteIdentifier& a,
                                        const CompleteIdentifier& b);

// (code of the depth-(|nodes|-1) view from v, ground-truth marks).
CompleteIdentifier complete_identifier(ViewArena& a, const Configuration& g,
                                       NodeId v);

// ---- walking arbitrary trails inside a view ----

// Transition system over depth-(n-1) subtree classes of a view of depth
// >= 2n-1 (n a bound on the graph size). Lets arbitrary-length trails be
// walked "inside" the view: each class determines port degrees and successor
// classes, because depth-(n-1) views determine views of every depth.
class ViewWalker {
 public:
  using State = ViewRef;

  ViewWalker(ViewArena& a, ViewRef home, int n);

  ViewRef root_class() const { return root_class_; }
  int degree(ViewRef cls) const { return cls->degree; }
  // Exit via port p: (entry port, successor class). Port must be < degree.
  std::pair<Port, ViewRef> step(ViewRef cls, Port p) const;

 private:
  ViewArena* arena_;
  int n_;
  ViewRef root_class_;
  std::unordered_map<ViewRef, ViewRef> succ_;  // depth n-1 class -> depth n
};

// True when the trail is realizable from the root of v, using class
// transitions when the trail is longer than the view is deep.
// Pre: depth(v) >= 2n-1.
bool view_trail_feasible(ViewArena& a, ViewRef v, const Trail& t, int n);

// Walk a materialized trail over any world; nullopt when infeasible.
template <class World>
std::optional<typename World::State> walk_trail(
    const World& w, typename World::State from, const Trail& t) {
  if (t.size() % 2 != 0) return std::nullopt;
  typename World::State cur = from;
  for (std::size_t i = 0; i < t.size(); i += 2) {
    Port p = t[i];
    if (p < 0 || p >= w.degree(cur)) return std::nullopt;
    auto [q, nxt] = w.step(cur, p);
    if (q != t[i + 1]) return std::nullopt;
    cur = nxt;
  }
  return cur;
}

// World over the actual graph (simulator / oracle side).
struct ConfigWorld {
  using State = NodeId;
  const Configuration* g;
  int degree(NodeId v) const { return g->degree(v); }
  std::pair<Port, NodeId> step(NodeId v, Port p) const {
    auto [far, entry] = g->traverse(v, p);
    return {entry, far};
  }
};

// World over view classes (agent side).
struct ClassWorld {
  using State = ViewRef;
  const ViewWalker* w;
  int degree(ViewRef c) const { return w->degree(c); }
  std::pair<Port, ViewRef> step(ViewRef c, Port p) const {
    return w->step(c, p);
  }
};

// ---- extension ----

// Rebuild the view at depth l from a view of depth >= 2n-1 (n bounding the
// graph size), without access to the graph. l <= depth(v) truncates.
ViewRef extend_view(ViewArena& a, ViewRef v, int l, int n);

// ---- transitions between views ----

// Position map from a depth-2(n-1) view of u into a depth-3(n-1) view of v,
// anchored at the position of u inside v's view: position(path P) maps to
// position(anchor ++ P). Verified structurally at construction.
struct Transition {
  ViewRef from_view;
  ViewRef into_view;
  Trail anchor;  // root path of the anchor position in into_view
};

// Pre: anchor realizable in into_view, |anchor|/2 <= n-1, and the subtree at
// the anchor agrees with from_view on their common depth (checked; this makes
// the map total).
Transition compute_transition(ViewArena& a, ViewRef from_view, ViewRef into_view,
                              const Trail& anchor, int n);

// For every position y of the transition's source view with depth <=
// depth_limit whose image carries a 1 in into_marks, set y's bit in
// from_marks.
void pull_marks(const Transition& tr, const BinaryMapping& into_marks,
                BinaryMapping& from_marks, int depth_limit);

}  // namespace anonelect
