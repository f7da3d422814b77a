#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "anonelect/error.hpp"

namespace anonelect {

using NodeId = int;
using Port = int;

// A trail is a flat port sequence; route trails alternate (exit, entry) and
// have even length.
using Trail = std::vector<Port>;

struct RouteStep {
  Port out = 0;   // port at the node being left
  Port in = 0;    // port at the node being entered
  NodeId to = 0;  // node being entered
};

struct Route {
  NodeId start = 0;
  std::vector<RouteStep> steps;

  NodeId end() const { return steps.empty() ? start : steps.back().to; }
  std::size_t edge_count() const { return steps.size(); }
};

// Port-labeled undirected graph plus agent placement and the known bound on
// the number of nodes. Degree-d nodes carry ports exactly 0..d-1; each edge
// has one port at each endpoint. Simple (no loops, no parallel edges),
// connected, at least one node occupied, at most one agent per node.
class Configuration {
 public:
  struct Edge {
    NodeId u;
    Port pu;
    NodeId v;
    Port pv;
  };

  Configuration(int nodes, int bound_n, const std::vector<Edge>& edges,
                std::vector<NodeId> occupied);

  int node_count() const { return static_cast<int>(adj_.size()); }
  int bound() const { return bound_n_; }
  int degree(NodeId v) const { return static_cast<int>(adj_[v].size()); }

  // Follow port p out of v; returns (far node, entry port at far node).
  std::pair<NodeId, Port> traverse(NodeId v, Port p) const {
    return adj_[v][p];
  }

  const std::vector<NodeId>& occupied() const { return occupied_; }
  bool is_occupied(NodeId v) const { return occ_mask_[v] != 0; }
  int agent_count() const { return static_cast<int>(occupied_.size()); }

  std::vector<Edge> edges() const;

 private:
  std::vector<std::vector<std::pair<NodeId, Port>>> adj_;  // [v][p]
  std::vector<NodeId> occupied_;
  std::vector<char> occ_mask_;
  int bound_n_ = 0;
};

struct Infeasible {
  // Index (into the trail) of the first element that fails: even index = exit
  // port missing at the current node, odd index = entry port mismatch.
  std::size_t index = 0;
};

using RouteResult = std::variant<Route, Infeasible>;

// Unique route from v with the given trail, if it exists.
RouteResult route_from_trail(const Configuration& g, NodeId v, const Trail& t);

inline bool feasible(const RouteResult& r) {
  return std::holds_alternative<Route>(r);
}

Trail trail_of_route(const Route& r);
Trail reverse_trail(const Trail& t);
bool is_palindrome(const Trail& t);

// Trail of the closed smaller-port-first depth-first traversal of the
// depth-`depth` truncated view from v; starts and ends at v.
Trail dfs_trail(const Configuration& g, NodeId v, int depth);

inline constexpr std::size_t kDefaultTrailCap = 10'000'000;

// All even-length trails with terms in 0..n-2 and length <= 6(n-1), in
// canonical order (length ascending, then lexicographic). With feasible_only,
// restricted to trails feasible from at least one node of g (same order).
std::vector<Trail> enumerate_trails(const Configuration& g, int n,
                                    bool feasible_only,
                                    std::size_t cap = kDefaultTrailCap);

// Canonical text form: decimal ports, comma-separated, parenthesized.
std::string format_trail(const Trail& t);
Trail parse_trail(std::string_view s);

}  // namespace anonelect
