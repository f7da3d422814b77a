#include <algorithm>
#include <array>
#include <random>
#include <vector>

#include "anonelect/corpus.hpp"
#include "anonelect/graph.hpp"
#include "doctest.h"

using namespace anonelect;

namespace {

struct Shape {
  int nodes;
  std::vector<std::array<int, 4>> edges;  // u, pu, v, pv with u < v
  std::vector<NodeId> occupied;
};

Shape shape_of(const Configuration& g) {
  Shape s;
  s.nodes = g.node_count();
  for (NodeId u = 0; u < g.node_count(); ++u)
    for (Port p = 0; p < g.degree(u); ++p) {
      auto [v, q] = g.traverse(u, p);
      if (u < v) s.edges.push_back({u, p, v, q});
    }
  std::sort(s.edges.begin(), s.edges.end());
  s.occupied = g.occupied();
  return s;
}

bool isomorphic(const Shape& a, const Shape& b) {
  if (a.nodes != b.nodes || a.edges.size() != b.edges.size() ||
      a.occupied.size() != b.occupied.size())
    return false;
  std::vector<int> perm(static_cast<std::size_t>(a.nodes));
  for (int i = 0; i < a.nodes; ++i) perm[static_cast<std::size_t>(i)] = i;
  do {
    std::vector<std::array<int, 4>> mapped;
    for (const auto& e : a.edges) {
      int u = perm[static_cast<std::size_t>(e[0])];
      int v = perm[static_cast<std::size_t>(e[2])];
      if (u < v)
        mapped.push_back({u, e[1], v, e[3]});
      else
        mapped.push_back({v, e[3], u, e[1]});
    }
    std::sort(mapped.begin(), mapped.end());
    std::vector<NodeId> occ;
    for (NodeId o : a.occupied)
      occ.push_back(perm[static_cast<std::size_t>(o)]);
    std::sort(occ.begin(), occ.end());
    if (mapped == b.edges && occ == b.occupied) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

std::uint64_t count(const EnumerateOptions& opts) {
  std::uint64_t n = 0;
  enumerate_configurations(opts, [&](const Configuration&) { ++n; });
  return n;
}

}  // namespace

TEST_SUITE_BEGIN("corpus");

TEST_CASE("enumeration counts are stable") {
  CHECK(count({.max_nodes = 2, .min_nodes = 1, .min_agents = 2}) == 1);
  CHECK(count({.max_nodes = 3, .min_nodes = 1, .min_agents = 2}) == 11);
  CHECK(count({.max_nodes = 2, .min_nodes = 1, .min_agents = 1}) == 3);
  CHECK(count({.max_nodes = 3, .min_nodes = 1, .min_agents = 1}) == 20);
  // The two-argument form is the deduplicated default.
  std::uint64_t v = 0;
  enumerate_configurations(3, 2, [&](const Configuration&) { ++v; });
  CHECK(v == 11);
  // Without dedup the two-clique keeps both single-agent placements.
  CHECK(count({.max_nodes = 2,
               .min_nodes = 2,
               .min_agents = 1,
               .dedup = false}) == 3);
}

TEST_CASE("enumeration validates its bounds") {
  EnumerateOptions bad;
  bad.max_nodes = 9;
  CHECK_THROWS_AS(enumerate_configurations(bad, [](const Configuration&) {}),
                  Error);
  EnumerateOptions crossed;
  crossed.max_nodes = 2;
  crossed.min_nodes = 3;
  CHECK_THROWS_AS(
      enumerate_configurations(crossed, [](const Configuration&) {}), Error);
}

TEST_CASE("degree filter prunes dense graphs") {
  CHECK(count({.max_nodes = 3, .min_nodes = 1, .min_agents = 1,
               .max_degree = 0}) == 1);  // the singleton only
  // Degree one keeps the singleton and the two-clique placements.
  CHECK(count({.max_nodes = 3, .min_nodes = 1, .min_agents = 1,
               .max_degree = 1}) == 3);
  // A degree-two cap at three nodes only drops nothing: paths and cycles.
  CHECK(count({.max_nodes = 3, .min_nodes = 3, .min_agents = 1,
               .max_degree = 2}) ==
        count({.max_nodes = 3, .min_nodes = 3, .min_agents = 1}));
}

TEST_CASE("every emitted configuration is valid and within bounds") {
  enumerate_configurations(
      EnumerateOptions{.max_nodes = 3, .min_nodes = 1, .min_agents = 2},
      [&](const Configuration& g) {
        CHECK(g.node_count() <= 3);
        CHECK(g.bound() == g.node_count());
        CHECK(g.agent_count() >= 2);
      });
}

TEST_CASE("deduplicated corpus has no isomorphic pair") {
  std::vector<Shape> shapes;
  enumerate_configurations(
      EnumerateOptions{.max_nodes = 3, .min_nodes = 1, .min_agents = 1},
      [&](const Configuration& g) { shapes.push_back(shape_of(g)); });
  REQUIRE(shapes.size() == 20);
  for (std::size_t i = 0; i < shapes.size(); ++i)
    for (std::size_t j = i + 1; j < shapes.size(); ++j) {
      CAPTURE(i);
      CAPTURE(j);
      CHECK_FALSE(isomorphic(shapes[i], shapes[j]));
    }
}

TEST_CASE("undeduplicated corpus covers the deduplicated one") {
  // Every raw 2-node configuration is isomorphic to a kept representative.
  std::vector<Shape> kept;
  enumerate_configurations(
      EnumerateOptions{.max_nodes = 2, .min_nodes = 2, .min_agents = 1},
      [&](const Configuration& g) { kept.push_back(shape_of(g)); });
  std::uint64_t raw = 0;
  enumerate_configurations(
      EnumerateOptions{
          .max_nodes = 2, .min_nodes = 2, .min_agents = 1, .dedup = false},
      [&](const Configuration& g) {
        ++raw;
        Shape s = shape_of(g);
        bool covered = false;
        for (const Shape& k : kept) covered |= isomorphic(s, k);
        CHECK(covered);
      });
  CHECK(raw == 3);
  CHECK(kept.size() == 2);
}

TEST_CASE("random configurations are well formed") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    int nodes = 1 + static_cast<int>(rng() % 5);
    int min_agents = 1 + static_cast<int>(rng() % nodes);
    Configuration g = random_configuration(rng, nodes, min_agents);
    CHECK(g.node_count() == nodes);
    CHECK(g.bound() == nodes);
    CHECK(g.agent_count() >= min_agents);
  }
}

TEST_CASE("cross-validation agrees on the three-node corpus") {
  CrossOptions opts;
  opts.max_nodes = 3;
  opts.threads = 1;
  CrossStats stats = cross_validate(opts);
  CHECK(stats.configurations == 11);
  CHECK(stats.eligible == 8);
  CHECK(stats.consistent == 8);
  CHECK(stats.verdict_disagreements == 0);
  CHECK(stats.mark_violations == 0);
  CHECK(stats.semi_violations == 0);
  CHECK(stats.errors == 0);
  CHECK(stats.counterexamples.empty());
  CHECK(stats.ok());
}

TEST_CASE("cross-validation reports progress") {
  CrossOptions opts;
  opts.max_nodes = 2;
  opts.threads = 1;
  std::vector<std::uint64_t> seen;
  CrossStats stats =
      cross_validate(opts, [&](std::uint64_t done) { seen.push_back(done); });
  CHECK(stats.configurations == 1);
  CHECK(!seen.empty());
  CHECK(seen.back() == stats.configurations);
}

TEST_SUITE_END();
