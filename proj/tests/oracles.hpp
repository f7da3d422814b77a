#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "anonelect/graph.hpp"

// Deliberately naive reference implementations. They recompute everything
// from the raw edge list with plain recursion and no sharing, memoization or
// pruning, so agreement with the production code is meaningful.

namespace oracles {

using anonelect::Configuration;
using anonelect::NodeId;
using anonelect::Port;
using anonelect::Trail;

// ---- routes, straight off the edge list ----

inline std::optional<NodeId> naive_route_end(
    const std::vector<Configuration::Edge>& edges, NodeId from,
    const Trail& t) {
  if (t.size() % 2 != 0) return std::nullopt;
  NodeId cur = from;
  for (std::size_t i = 0; i < t.size(); i += 2) {
    Port exit = t[i], entry = t[i + 1];
    std::optional<std::pair<NodeId, Port>> hit;
    for (const auto& e : edges) {
      if (e.u == cur && e.pu == exit) hit = {e.v, e.pv};
      if (e.v == cur && e.pv == exit) hit = {e.u, e.pu};
    }
    if (!hit || hit->second != entry) return std::nullopt;
    cur = hit->first;
  }
  return cur;
}

// ---- views as plain recursive trees ----

struct NaiveView {
  NodeId gnode = 0;  // which graph node this position is; oracle bookkeeping
  int mark = 0;
  int degree = 0;
  int depth = 0;
  // child reached by exiting port p (vector index), with its entry port
  std::vector<std::pair<Port, std::unique_ptr<NaiveView>>> children;
};

inline std::unique_ptr<NaiveView> naive_view(const Configuration& g, NodeId v,
                                             int depth, bool enhanced) {
  auto node = std::make_unique<NaiveView>();
  node->gnode = v;
  node->mark = enhanced && g.is_occupied(v) ? 1 : 0;
  node->degree = g.degree(v);
  node->depth = depth;
  if (depth > 0) {
    for (Port p = 0; p < g.degree(v); ++p) {
      auto [w, q] = g.traverse(v, p);
      node->children.emplace_back(q, naive_view(g, w, depth - 1, enhanced));
    }
  }
  return node;
}

// Structural equality, marks included, graph identities ignored.
inline bool naive_equal(const NaiveView& a, const NaiveView& b) {
  if (a.mark != b.mark || a.degree != b.degree || a.depth != b.depth)
    return false;
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (a.children[i].first != b.children[i].first) return false;
    if (!naive_equal(*a.children[i].second, *b.children[i].second))
      return false;
  }
  return true;
}

// The canonical code: closed DFS in port order, (out, in) on the way down,
// (in, out) on the way back, the degree of a frontier node on first arrival.
inline void naive_code_rec(const NaiveView& n, std::vector<int>& out) {
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    Port out_port = static_cast<Port>(i);
    Port in_port = n.children[i].first;
    const NaiveView& child = *n.children[i].second;
    out.push_back(out_port);
    out.push_back(in_port);
    if (child.children.empty() && child.depth == 0) out.push_back(child.degree);
    naive_code_rec(child, out);
    out.push_back(in_port);
    out.push_back(out_port);
  }
}

inline std::vector<int> naive_code(const NaiveView& n) {
  std::vector<int> out;
  naive_code_rec(n, out);
  return out;
}

// Positions in preorder, children in port order.
inline void naive_preorder(const NaiveView& n,
                           std::vector<const NaiveView*>& out) {
  out.push_back(&n);
  for (const auto& [entry, child] : n.children) naive_preorder(*child, out);
}

inline std::vector<const NaiveView*> naive_preorder(const NaiveView& n) {
  std::vector<const NaiveView*> out;
  naive_preorder(n, out);
  return out;
}

// Number of distinct views among all nodes at the given depth.
inline int naive_view_classes(const Configuration& g, int depth,
                              bool enhanced) {
  std::vector<std::unique_ptr<NaiveView>> all;
  for (NodeId v = 0; v < g.node_count(); ++v)
    all.push_back(naive_view(g, v, depth, enhanced));
  int classes = 0;
  std::vector<bool> seen(all.size(), false);
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (seen[i]) continue;
    classes += 1;
    for (std::size_t j = i + 1; j < all.size(); ++j)
      if (!seen[j] && naive_equal(*all[i], *all[j])) seen[j] = true;
  }
  return classes;
}

// Same-view relation on a node pair.
inline bool naive_views_equal(const Configuration& g, NodeId u, NodeId v,
                              int depth, bool enhanced) {
  return naive_equal(*naive_view(g, u, depth, enhanced),
                     *naive_view(g, v, depth, enhanced));
}

}  // namespace oracles
