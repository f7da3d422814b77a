#include <algorithm>
#include <random>

#include "doctest.h"

#include "anonelect/corpus.hpp"
#include "anonelect/error.hpp"
#include "anonelect/graph.hpp"
#include "anonelect/view.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace anonelect;

namespace {

// Preorder trails of a naive view, parallel to naive_preorder.
void collect_trails(const oracles::NaiveView& n, Trail& cur,
                    std::vector<Trail>& out) {
  out.push_back(cur);
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    cur.push_back(static_cast<Port>(i));
    cur.push_back(n.children[i].first);
    collect_trails(*n.children[i].second, cur, out);
    cur.pop_back();
    cur.pop_back();
  }
}

int max_degree(const Configuration& g) {
  int d = 0;
  for (NodeId v = 0; v < g.node_count(); ++v) d = std::max(d, g.degree(v));
  return d;
}

}  // namespace

TEST_SUITE("view") {

TEST_CASE("depth one view of a two node graph") {
  ViewArena a;
  Configuration g = fixtures::k2();
  ViewRef v = truncated_view(a, g, 0, 1);
  CHECK(view_code(v) == std::vector<int>{0, 0, 1, 0, 0});
  CHECK(v->degree == 1);
  CHECK(v->size == 2);
}

TEST_CASE("views are interned: equal structure is pointer equality") {
  ViewArena a;
  Configuration g = fixtures::oriented_ring_full(5);
  ViewRef v0 = truncated_view(a, g, 0, 4);
  for (NodeId v = 1; v < 5; ++v)
    CHECK(truncated_view(a, g, v, 4) == v0);  // all views equal by rotation
  Configuration p = fixtures::p3();
  CHECK(truncated_view(a, p, 0, 2) != truncated_view(a, p, 2, 2));
  // rebuilding the same view lands on the same node
  CHECK(truncated_view(a, p, 1, 2) == truncated_view(a, p, 1, 2));
}

TEST_CASE("codes match the naive recursion on assorted instances") {
  ViewArena a;
  std::vector<Configuration> gs = {
      fixtures::k1(),          fixtures::k2(),
      fixtures::p3(),          fixtures::oriented_ring_full(4),
      fixtures::anti_oriented_c4(), fixtures::p4_symmetric({0, 3}),
      fixtures::k4_rotational({0, 2})};
  for (const Configuration& g : gs)
    for (NodeId v = 0; v < g.node_count(); ++v)
      for (int l = 0; l <= 4; ++l) {
        auto naive = oracles::naive_view(g, v, l, false);
        CHECK(view_code(truncated_view(a, g, v, l)) ==
              oracles::naive_code(*naive));
      }
}

TEST_CASE("code equality is view equality") {
  // codes ignore marks, so compare plain views structurally via codes
  ViewArena a;
  std::mt19937_64 rng(101);
  for (int it = 0; it < 60; ++it) {
    int nodes = 2 + static_cast<int>(rng() % 5);
    Configuration g = random_configuration(rng, nodes, 1);
    int l = 1 + static_cast<int>(rng() % 4);
    for (NodeId u = 0; u < nodes; ++u)
      for (NodeId v = 0; v < nodes; ++v) {
        ViewRef vu = truncated_view(a, g, u, l);
        ViewRef vv = truncated_view(a, g, v, l);
        bool codes_eq = view_code(vu) == view_code(vv);
        CHECK(codes_eq == (vu == vv));
        CHECK((code_compare_streaming(vu, vv) == 0) == codes_eq);
        if (l <= 3)
          CHECK(codes_eq == oracles::naive_views_equal(g, u, v, l, false));
      }
  }
}

TEST_CASE("streaming comparison orders codes lexicographically") {
  ViewArena a;
  std::mt19937_64 rng(102);
  for (int it = 0; it < 40; ++it) {
    Configuration g = random_configuration(rng, 2 + rng() % 4, 1);
    Configuration h = random_configuration(rng, 2 + rng() % 4, 1);
    ViewRef vg = truncated_view(a, g, 0, 3);
    ViewRef vh = truncated_view(a, h, 0, 3);
    std::vector<int> cg = view_code(vg), ch = view_code(vh);
    int want = cg < ch ? -1 : cg == ch ? 0 : 1;
    int got = code_compare_streaming(vg, vh);
    CHECK((got < 0 ? -1 : got == 0 ? 0 : 1) == want);
  }
}

TEST_CASE("decoding inverts encoding") {
  ViewArena a;
  std::mt19937_64 rng(103);
  for (int it = 0; it < 60; ++it) {
    Configuration g = random_configuration(rng, 1 + rng() % 5, 1);
    NodeId v = static_cast<NodeId>(rng() % g.node_count());
    int l = 1 + static_cast<int>(rng() % 3);
    ViewRef view = truncated_view(a, g, v, l);
    CHECK(decode_code(a, view_code(view)) == view);
  }
  // the empty code is the degree-zero node
  ViewRef zero = decode_code(a, {});
  CHECK(zero->degree == 0);
  // rejects: truncated code, stray element, bad return pair
  CHECK_THROWS_AS(decode_code(a, {0, 0, 1, 0}), Error);
  CHECK_THROWS_AS(decode_code(a, {0}), Error);
  CHECK_THROWS_AS(decode_code(a, {0, 0, 1, 1, 0}), Error);
}

TEST_CASE("truncation of a deep view is the direct shallow view") {
  ViewArena a;
  Configuration g = fixtures::anti_oriented_c4();
  ViewRef deep = truncated_view(a, g, 0, 9);
  for (int k = 0; k <= 9; ++k)
    CHECK(a.truncate(deep, k) == truncated_view(a, g, 0, k));
  CHECK(a.truncate(deep, 12) == deep);
}

TEST_CASE("view traversal trail equals the graph traversal trail") {
  ViewArena a;
  Configuration k2 = fixtures::k2();
  CHECK(view_dfs_trail(truncated_view(a, k2, 0, 1)) == Trail{0, 0, 0, 0});
  Configuration p3 = fixtures::p3();
  CHECK(view_dfs_trail(truncated_view(a, p3, 1, 1)) ==
        Trail{0, 0, 0, 0, 1, 0, 0, 1});
  std::mt19937_64 rng(104);
  for (int it = 0; it < 30; ++it) {
    Configuration g = random_configuration(rng, 2 + rng() % 4, 1);
    NodeId v = static_cast<NodeId>(rng() % g.node_count());
    int l = static_cast<int>(rng() % 4);
    CHECK(view_dfs_trail(truncated_view(a, g, v, l)) == dfs_trail(g, v, l));
  }
}

TEST_CASE("positions index in preorder") {
  ViewArena a;
  Configuration g = fixtures::p3();
  ViewRef vb = truncated_view(a, g, 1, 1);
  CHECK(vb->size == 3);
  CHECK(position_count_to_depth(vb, 0) == 1);
  CHECK(position_count_to_depth(vb, 1) == 3);
  CHECK(position_index(vb, {}) == 0);
  CHECK(position_index(vb, {0, 0}) == 1);
  CHECK(position_index(vb, {1, 0}) == 2);
  CHECK_FALSE(position_index(vb, {0, 1}).has_value());
  CHECK_FALSE(position_index(vb, {0, 0, 0, 0}).has_value());

  // the preorder rank of every root path matches the naive enumeration
  std::mt19937_64 rng(105);
  for (int it = 0; it < 20; ++it) {
    Configuration h = random_configuration(rng, 2 + rng() % 3, 1);
    if (max_degree(h) > 3) continue;
    NodeId v = static_cast<NodeId>(rng() % h.node_count());
    int l = static_cast<int>(rng() % 4);
    auto naive = oracles::naive_view(h, v, l, false);
    std::vector<Trail> trails;
    Trail cur;
    collect_trails(*naive, cur, trails);
    ViewRef view = truncated_view(a, h, v, l);
    REQUIRE(view->size == trails.size());
    for (std::size_t i = 0; i < trails.size(); ++i)
      CHECK(position_index(view, trails[i]) == i);
  }
}

TEST_CASE("binary mappings store bits over positions") {
  BinaryMapping m = BinaryMapping::zeros(130);
  CHECK(m.n_bits == 130);
  CHECK(m.count() == 0);
  m.set(0);
  m.set(64);
  m.set(129);
  CHECK(m.count() == 3);
  CHECK(m.get(64));
  CHECK_FALSE(m.get(63));
  BinaryMapping big = BinaryMapping::zeros(130);
  big.set(0);
  big.set(5);
  big.set(64);
  big.set(129);
  CHECK(m.subset_of(big));
  CHECK_FALSE(big.subset_of(m));
  CHECK(m == m);
  CHECK_FALSE(m == big);
  // lex order reads from bit 0: 1... > 0...
  BinaryMapping x = BinaryMapping::zeros(4), y = BinaryMapping::zeros(4);
  x.set(0);
  y.set(1);
  CHECK(mapping_lex_compare(x, y) == std::strong_ordering::greater);
  CHECK(mapping_lex_compare(y, x) == std::strong_ordering::less);
  CHECK(mapping_lex_compare(x, x) == std::strong_ordering::equal);
}

TEST_CASE("ground truth marks occupied positions") {
  ViewArena a;
  // fully occupied ring: every position marked
  Configuration ring = fixtures::oriented_ring_full(5);
  BinaryMapping all = ground_truth_mapping(ring, 0, 4);
  CHECK(all.count() == all.n_bits);
  // path with endpoints occupied, seen from the middle
  Configuration p3 = fixtures::p3();
  BinaryMapping mid = ground_truth_mapping(p3, 1, 1);
  REQUIRE(mid.n_bits == 3);
  CHECK_FALSE(mid.get(0));
  CHECK(mid.get(1));
  CHECK(mid.get(2));
  // against the naive preorder: bit i iff that position's node is occupied
  std::mt19937_64 rng(106);
  for (int it = 0; it < 20; ++it) {
    Configuration h = random_configuration(rng, 2 + rng() % 3, 1);
    if (max_degree(h) > 3) continue;
    NodeId v = static_cast<NodeId>(rng() % h.node_count());
    int l = static_cast<int>(rng() % 4);
    auto naive = oracles::naive_view(h, v, l, false);
    auto pre = oracles::naive_preorder(*naive);
    BinaryMapping truth = ground_truth_mapping(h, v, l);
    REQUIRE(truth.n_bits == pre.size());
    for (std::size_t i = 0; i < pre.size(); ++i)
      CHECK(truth.get(i) == h.is_occupied(pre[i]->gnode));
  }
}

TEST_CASE("depth masks cover exactly the shallow positions") {
  ViewArena a;
  Configuration g = fixtures::anti_oriented_c4();
  ViewRef v = truncated_view(a, g, 0, 5);
  for (int k = 0; k <= 5; ++k) {
    BinaryMapping m = depth_mask(v, k);
    CHECK(m.count() == position_count_to_depth(v, k));
  }
  CHECK(depth_mask(v, 5).count() == v->size);
}

TEST_CASE("stamping ground truth yields the enhanced view") {
  ViewArena a;
  std::mt19937_64 rng(107);
  for (int it = 0; it < 40; ++it) {
    Configuration g = random_configuration(rng, 2 + rng() % 4, 1);
    NodeId v = static_cast<NodeId>(rng() % g.node_count());
    int l = static_cast<int>(rng() % 4);
    ViewRef plain = truncated_view(a, g, v, l);
    ViewRef marked = enhanced_view(a, g, v, l);
    BinaryMapping truth = ground_truth_mapping(g, v, l);
    CHECK(apply_mapping(a, plain, truth) == marked);
    CHECK(mapping_of_marked_view(marked) == truth);
    CHECK(mapping_of_marked_view(plain).count() == 0);
  }
}

TEST_CASE("view equivalence stabilizes between depth m-1 and 2m") {
  // the backbone of the random-graph acceptance run, at unit scale
  ViewArena a;
  std::mt19937_64 rng(108);
  int checked = 0;
  for (int it = 0; it < 60; ++it) {
    int m = 2 + static_cast<int>(rng() % 5);
    Configuration g = random_configuration(rng, m, 1);
    for (bool enhanced : {false, true}) {
      auto view_at = [&](NodeId v, int l) {
        return enhanced ? enhanced_view(a, g, v, l)
                        : truncated_view(a, g, v, l);
      };
      for (NodeId u = 0; u < m; ++u)
        for (NodeId v = static_cast<NodeId>(u + 1); v < m; ++v) {
          bool shallow = view_at(u, m - 1) == view_at(v, m - 1);
          bool deep = view_at(u, 2 * m) == view_at(v, 2 * m);
          CHECK(shallow == deep);
          if (m <= 4 && max_degree(g) <= 3)
            CHECK(shallow ==
                  oracles::naive_views_equal(g, u, v, m - 1, enhanced));
          checked += 1;
        }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("complete identifiers separate agents exactly when alpha holds") {
  ViewArena a;
  Configuration k2 = fixtures::k2();
  CompleteIdentifier i0 = complete_identifier(a, k2, 0);
  CompleteIdentifier i1 = complete_identifier(a, k2, 1);
  CHECK(identifier_compare(i0, i1) == std::strong_ordering::equal);

  Configuration p3 = fixtures::p3();
  CompleteIdentifier a0 = complete_identifier(a, p3, 0);
  CompleteIdentifier a2 = complete_identifier(a, p3, 2);
  CHECK(identifier_compare(a0, a2) != std::strong_ordering::equal);

  // identifier equality coincides with enhanced-view equality at depth n-1
  std::mt19937_64 rng(109);
  for (int it = 0; it < 30; ++it) {
    Configuration g = random_configuration(rng, 2 + rng() % 4, 2);
    for (NodeId u : g.occupied())
      for (NodeId v : g.occupied()) {
        bool ids_eq = identifier_compare(complete_identifier(a, g, u),
                                         complete_identifier(a, g, v)) ==
                      std::strong_ordering::equal;
        bool views_eq = enhanced_view(a, g, u, g.node_count() - 1) ==
                        enhanced_view(a, g, v, g.node_count() - 1);
        CHECK(ids_eq == views_eq);
      }
  }
}

TEST_CASE("class walking matches graph walking") {
  ViewArena a;
  std::mt19937_64 rng(110);
  for (int it = 0; it < 25; ++it) {
    int m = 2 + static_cast<int>(rng() % 4);
    Configuration g = random_configuration(rng, m, 1);
    int n = g.bound();
    NodeId home = static_cast<NodeId>(rng() % m);
    ViewRef deep = truncated_view(a, g, home, 2 * n - 1);
    ViewWalker walker(a, deep, n);
    CHECK(walker.root_class() == truncated_view(a, g, home, n - 1));

    // random walk, including lengths far beyond the view depth
    NodeId at = home;
    ViewRef cls = walker.root_class();
    Trail walked;
    for (int s = 0; s < 40; ++s) {
      REQUIRE(walker.degree(cls) == g.degree(at));
      Port p = static_cast<Port>(rng() % g.degree(at));
      auto [q_graph, far] = [&] {
        auto [w, q] = g.traverse(at, p);
        return std::pair<Port, NodeId>{q, w};
      }();
      auto [q_cls, nxt] = walker.step(cls, p);
      CHECK(q_cls == q_graph);
      at = far;
      cls = nxt;
      CHECK(cls == truncated_view(a, g, at, n - 1));
      walked.push_back(p);
      walked.push_back(q_graph);
    }
    CHECK(view_trail_feasible(a, deep, walked, n));
    // perturb the last entry port: infeasible unless another edge matches
    Trail bad = walked;
    bad.back() += 1;
    CHECK(view_trail_feasible(a, deep, bad, n) ==
          feasible(route_from_trail(g, home, bad)));
  }
}

TEST_CASE("walk helpers agree across worlds") {
  ViewArena a;
  Configuration g = fixtures::p3();
  ConfigWorld w{&g};
  CHECK(walk_trail(w, NodeId{0}, Trail{0, 0, 1, 0}) == NodeId{2});
  CHECK_FALSE(walk_trail(w, NodeId{0}, Trail{0, 1}).has_value());
  CHECK_FALSE(walk_trail(w, NodeId{0}, Trail{0}).has_value());

  ViewRef deep = truncated_view(a, g, 0, 2 * 3 - 1);
  ViewWalker vw(a, deep, 3);
  ClassWorld cw{&vw};
  auto end = walk_trail(cw, vw.root_class(), Trail{0, 0, 1, 0});
  REQUIRE(end.has_value());
  CHECK(*end == truncated_view(a, g, 2, 2));
}

TEST_CASE("views of every depth rebuild from one deep view") {
  ViewArena a;
  std::mt19937_64 rng(111);
  for (int it = 0; it < 20; ++it) {
    int m = 2 + static_cast<int>(rng() % 4);
    Configuration g = random_configuration(rng, m, 1);
    int n = g.bound();
    NodeId v = static_cast<NodeId>(rng() % m);
    ViewRef base = truncated_view(a, g, v, 2 * n - 1);
    for (int l : {0, 1, n - 1, 2 * n - 1, 3 * (n - 1), 3 * (n - 1) + 5}) {
      ViewRef direct = truncated_view(a, g, v, l);
      CHECK(extend_view(a, base, l, n) == direct);
    }
  }
}

TEST_CASE("transitions anchor one view inside another") {
  ViewArena a;
  int n = 3;
  Configuration g = fixtures::p3();
  // identity: same node, empty anchor
  ViewRef from_b = truncated_view(a, g, 1, 2 * (n - 1));
  ViewRef into_b = truncated_view(a, g, 1, 3 * (n - 1));
  Transition id = compute_transition(a, from_b, into_b, {}, n);
  CHECK(id.anchor.empty());
  BinaryMapping marks_b = ground_truth_mapping(g, 1, 3 * (n - 1));
  BinaryMapping pulled = BinaryMapping::zeros(from_b->size);
  pull_marks(id, marks_b, pulled, 2 * (n - 1));
  CHECK(pulled == ground_truth_mapping(g, 1, 2 * (n - 1)));

  // across an edge: a's frame anchored inside b's view at trail (0,0)
  ViewRef from_a = truncated_view(a, g, 0, 2 * (n - 1));
  Transition tr = compute_transition(a, from_a, into_b, {0, 0}, n);
  BinaryMapping pulled_a = BinaryMapping::zeros(from_a->size);
  pull_marks(tr, marks_b, pulled_a, 2 * (n - 1));
  // images of depth <= 2(n-1) positions stay inside b's depth-3(n-1) view
  // only up to depth 3(n-1) - 1; restrict the comparison accordingly
  int safe = 3 * (n - 1) - 1;
  BinaryMapping want = ground_truth_mapping(g, 0, 2 * (n - 1));
  for (std::uint64_t i = 0; i < want.n_bits; ++i) {
    // positions beyond the safe depth may be unmapped; pulled is a subset
    if (pulled_a.get(i)) CHECK(want.get(i));
  }
  BinaryMapping safe_mask = depth_mask(from_a, safe);
  for (std::uint64_t i = 0; i < want.n_bits; ++i)
    if (safe_mask.get(i)) CHECK(pulled_a.get(i) == want.get(i));

  // a mismatched anchor violates the precondition
  CHECK_THROWS_AS(compute_transition(a, from_a, into_b, {1, 0}, n), Error);
}

TEST_CASE("the four node meeting scenario pulls marks across the diagonal") {
  // c and b sit at opposite corners; the trail between them walks two edges
  ViewArena a;
  int n = 4;
  Configuration g = fixtures::anti_oriented_c4();  // agents 0,1,2; b=0, c=2
  RouteResult rr = route_from_trail(g, 2, {0, 0, 1, 1});
  REQUIRE(feasible(rr));
  CHECK(std::get<Route>(rr).end() == 0);

  ViewRef into_b = truncated_view(a, g, 0, 3 * (n - 1));
  ViewRef from_c = truncated_view(a, g, 2, 2 * (n - 1));
  Trail anchor = reverse_trail({0, 0, 1, 1});  // from b, this reaches c
  REQUIRE(feasible(route_from_trail(g, 0, anchor)));
  Transition tr = compute_transition(a, from_c, into_b, anchor, n);

  BinaryMapping marks_b = ground_truth_mapping(g, 0, 3 * (n - 1));
  BinaryMapping pulled = BinaryMapping::zeros(from_c->size);
  pull_marks(tr, marks_b, pulled, 2 * (n - 1));
  BinaryMapping want = ground_truth_mapping(g, 2, 2 * (n - 1));
  CHECK(pulled == want);
}

}  // TEST_SUITE
