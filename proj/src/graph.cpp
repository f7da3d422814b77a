#include "anonelect/graph.hpp"

#include <algorithm>
#include <charconv>
#include <set>

namespace anonelect {

Configuration::Configuration(int nodes, int bound_n,
                             const std::vector<Edge>& edges,
                             std::vector<NodeId> occupied)
    : occupied_(std::move(occupied)), bound_n_(bound_n) {
  if (nodes <= 0)
    throw Error(Error::Code::kValidation, "node count must be positive");
  if (bound_n_ < nodes)
    throw Error(Error::Code::kValidation,
                "bound n (" + std::to_string(bound_n_) + ") below node count " +
                    std::to_string(nodes));

  // Collect per-node port maps, rejecting loops / parallel edges / reuse.
  std::vector<std::vector<std::pair<Port, std::pair<NodeId, Port>>>> ports(
      nodes);
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const Edge& e : edges) {
    if (e.u < 0 || e.u >= nodes || e.v < 0 || e.v >= nodes)
      throw Error(Error::Code::kValidation, "edge endpoint out of range");
    if (e.u == e.v)
      throw Error(Error::Code::kValidation,
                  "self-loop at node " + std::to_string(e.u));
    auto key = std::minmax(e.u, e.v);
    if (!seen.insert({key.first, key.second}).second)
      throw Error(Error::Code::kValidation,
                  "parallel edge between " + std::to_string(e.u) + " and " +
                      std::to_string(e.v));
    if (e.pu < 0 || e.pv < 0)
      throw Error(Error::Code::kValidation, "negative port");
    ports[e.u].push_back({e.pu, {e.v, e.pv}});
    ports[e.v].push_back({e.pv, {e.u, e.pu}});
  }

  adj_.assign(nodes, {});
  for (NodeId v = 0; v < nodes; ++v) {
    int d = static_cast<int>(ports[v].size());
    adj_[v].assign(d, {-1, -1});
    for (auto& [p, far] : ports[v]) {
      if (p >= d || adj_[v][p].first != -1)
        throw Error(Error::Code::kValidation,
                    "ports at node " + std::to_string(v) +
                        " are not exactly 0.." + std::to_string(d - 1));
      adj_[v][p] = far;
    }
  }

  // Connectivity.
  std::vector<char> vis(nodes, 0);
  std::vector<NodeId> stack{0};
  vis[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (auto& [w, q] : adj_[v])
      if (!vis[w]) {
        vis[w] = 1;
        ++count;
        stack.push_back(w);
      }
  }
  if (count != nodes)
    throw Error(Error::Code::kValidation, "graph is disconnected");

  if (occupied_.empty())
    throw Error(Error::Code::kValidation, "no node is occupied");
  std::sort(occupied_.begin(), occupied_.end());
  occ_mask_.assign(nodes, 0);
  for (NodeId v : occupied_) {
    if (v < 0 || v >= nodes)
      throw Error(Error::Code::kValidation, "occupied node out of range");
    if (occ_mask_[v])
      throw Error(Error::Code::kValidation,
                  "node " + std::to_string(v) + " occupied twice");
    occ_mask_[v] = 1;
  }
}

std::vector<Configuration::Edge> Configuration::edges() const {
  std::vector<Edge> out;
  for (NodeId v = 0; v < node_count(); ++v)
    for (Port p = 0; p < degree(v); ++p) {
      auto [w, q] = adj_[v][p];
      if (v < w) out.push_back({v, p, w, q});
    }
  return out;
}

RouteResult route_from_trail(const Configuration& g, NodeId v, const Trail& t) {
  if (t.size() % 2 != 0)
    throw Error(Error::Code::kPrecondition, "odd-length trail");
  Route r;
  r.start = v;
  NodeId cur = v;
  for (std::size_t i = 0; i < t.size(); i += 2) {
    Port out = t[i], in = t[i + 1];
    if (out < 0 || out >= g.degree(cur)) return Infeasible{i};
    auto [far, entry] = g.traverse(cur, out);
    if (entry != in) return Infeasible{i + 1};
    r.steps.push_back({out, in, far});
    cur = far;
  }
  return r;
}

Trail trail_of_route(const Route& r) {
  Trail t;
  t.reserve(r.steps.size() * 2);
  for (const RouteStep& s : r.steps) {
    t.push_back(s.out);
    t.push_back(s.in);
  }
  return t;
}

Trail reverse_trail(const Trail& t) {
  return Trail(t.rbegin(), t.rend());
}

bool is_palindrome(const Trail& t) {
  return std::equal(t.begin(), t.begin() + t.size() / 2, t.rbegin());
}

namespace {

void dfs_rec(const Configuration& g, NodeId v, int depth, Trail& out) {
  if (depth == 0) return;
  for (Port p = 0; p < g.degree(v); ++p) {
    auto [w, q] = g.traverse(v, p);
    out.push_back(p);
    out.push_back(q);
    dfs_rec(g, w, depth - 1, out);
    out.push_back(q);
    out.push_back(p);
  }
}

}  // namespace

Trail dfs_trail(const Configuration& g, NodeId v, int depth) {
  if (depth < 0) throw Error(Error::Code::kPrecondition, "negative depth");
  Trail out;
  dfs_rec(g, v, depth, out);
  return out;
}

std::vector<Trail> enumerate_trails(const Configuration& g, int n,
                                    bool feasible_only, std::size_t cap) {
  if (n < 2) throw Error(Error::Code::kPrecondition, "need n >= 2");
  const int max_len = 6 * (n - 1);
  const int max_term = n - 2;
  std::vector<Trail> out;

  if (!feasible_only) {
    // Count first so the cap fails fast.
    long double total = 0;
    for (int len = 2; len <= max_len; len += 2) {
      long double c = 1;
      for (int i = 0; i < len; ++i) c *= (max_term + 1);
      total += c;
      if (total > static_cast<long double>(cap))
        throw Error(Error::Code::kBudget,
                    "trail enumeration exceeds cap of " + std::to_string(cap) +
                        " (instance too large)");
    }
    for (int len = 2; len <= max_len; len += 2) {
      Trail t(len, 0);
      while (true) {
        out.push_back(t);
        int i = len - 1;
        while (i >= 0 && t[i] == max_term) t[i--] = 0;
        if (i < 0) break;
        ++t[i];
      }
    }
    return out;
  }

  // Feasibility states: the set of (start, current) walk endpoints still
  // alive; a prefix dies when no start can realize it.
  struct Rec {
    Trail prefix;
    std::vector<std::pair<NodeId, NodeId>> states;
  };
  std::vector<std::pair<NodeId, NodeId>> init;
  for (NodeId v = 0; v < g.node_count(); ++v) init.push_back({v, v});

  // Depth-first over (exit, entry) pairs; collect every even prefix, sort by
  // canonical order at the end.
  Trail prefix;
  std::vector<std::vector<std::pair<NodeId, NodeId>>> stack_states{init};
  auto rec = [&](auto&& self) -> void {
    // copy: the recursion below grows stack_states, invalidating references
    const auto states = stack_states.back();
    if (!prefix.empty()) {
      out.push_back(prefix);
      if (out.size() > cap)
        throw Error(Error::Code::kBudget,
                    "trail enumeration exceeds cap of " + std::to_string(cap) +
                        " (instance too large)");
    }
    if (static_cast<int>(prefix.size()) >= max_len) return;
    for (Port p = 0; p <= max_term; ++p) {
      // Group successors by entry port.
      std::vector<std::vector<std::pair<NodeId, NodeId>>> by_q(max_term + 1);
      for (auto [s, cur] : states) {
        if (p >= g.degree(cur)) continue;
        auto [far, q] = g.traverse(cur, p);
        if (q <= max_term) by_q[q].push_back({s, far});
      }
      for (Port q = 0; q <= max_term; ++q) {
        if (by_q[q].empty()) continue;
        prefix.push_back(p);
        prefix.push_back(q);
        stack_states.push_back(std::move(by_q[q]));
        self(self);
        stack_states.pop_back();
        prefix.pop_back();
        prefix.pop_back();
      }
    }
  };
  rec(rec);

  std::sort(out.begin(), out.end(), [](const Trail& a, const Trail& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

std::string format_trail(const Trail& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(t[i]);
  }
  s += ')';
  return s;
}

Trail parse_trail(std::string_view s) {
  auto fail = [&] {
    throw Error(Error::Code::kInvalidInput,
                "bad trail literal: " + std::string(s));
  };
  if (s.size() < 2 || s.front() != '(' || s.back() != ')') fail();
  std::string_view body = s.substr(1, s.size() - 2);
  Trail t;
  if (body.empty()) return t;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = body.find(',', pos);
    std::string_view tok = body.substr(
        pos, comma == std::string_view::npos ? body.size() - pos
                                             : comma - pos);
    int val = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), val);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || val < 0) fail();
    t.push_back(val);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return t;
}

}  // namespace anonelect
