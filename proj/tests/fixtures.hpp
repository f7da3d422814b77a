#pragma once

#include <vector>

#include "anonelect/graph.hpp"

// Shared instances used across the suites. All of them are small enough to
// reason about by hand; expected values in the tests were derived on paper
// from these exact port assignments.

namespace fixtures {

using anonelect::Configuration;

// Single node, one agent.
inline Configuration k1() { return Configuration(1, 1, {}, {0}); }

// Two nodes joined by one edge, both occupied.
inline Configuration k2() {
  return Configuration(2, 2, {{0, 0, 1, 0}}, {0, 1});
}

// Path a(0) - b(1) - c(2); {a,b} is port 0 at both ends, {b,c} is port 1 at
// b and port 0 at c. Agents at the two endpoints.
inline Configuration p3(std::vector<anonelect::NodeId> occ = {0, 2}) {
  return Configuration(3, 3, {{0, 0, 1, 0}, {1, 1, 2, 0}}, std::move(occ));
}

// Ring 0..k-1 with ports 0/1 in the clockwise direction at every node:
// port 0 leads clockwise, port 1 counterclockwise.
inline Configuration oriented_ring(int k, std::vector<anonelect::NodeId> occ) {
  std::vector<Configuration::Edge> edges;
  for (int v = 0; v < k; ++v) edges.push_back({v, 0, (v + 1) % k, 1});
  return Configuration(k, k, edges, std::move(occ));
}

inline Configuration oriented_ring_full(int k) {
  std::vector<anonelect::NodeId> occ;
  for (int v = 0; v < k; ++v) occ.push_back(v);
  return oriented_ring(k, std::move(occ));
}

// Ring of 5 oriented clockwise except at node 0, whose ports point the other
// way; agents at node 0 and its clockwise neighbor 1.
inline Configuration almost_oriented_ring5() {
  std::vector<Configuration::Edge> edges = {
      {0, 1, 1, 1},  // clockwise edge of the special node
      {1, 0, 2, 1},
      {2, 0, 3, 1},
      {3, 0, 4, 1},
      {4, 0, 0, 0},  // counterclockwise edge of the special node
  };
  return Configuration(5, 5, edges, {0, 1});
}

// 4-cycle whose edges carry the same port at both ends, alternating 0 and 1
// around the ring. All plain views coincide; node 3 is unoccupied.
inline Configuration anti_oriented_c4(std::vector<anonelect::NodeId> occ = {
                                          0, 1, 2}) {
  return Configuration(
      4, 4, {{0, 0, 1, 0}, {1, 1, 2, 1}, {2, 0, 3, 0}, {3, 1, 0, 1}},
      std::move(occ));
}

// Path w(0) - x(1) - y(2) - z(3) with mirror-symmetric ports: {w,x} = 0/0,
// {x,y} = 1/1, {y,z} = 0/0. Swapping the ends is an automorphism.
inline Configuration p4_symmetric(std::vector<anonelect::NodeId> occ) {
  return Configuration(4, 4, {{0, 0, 1, 0}, {1, 1, 2, 1}, {2, 0, 3, 0}},
                       std::move(occ));
}

// K4 where node i reaches i+k (mod 4) through port k-1; the edge {i, i+k}
// carries ports k-1 and 3-k. Rotation by one is an automorphism.
inline Configuration k4_rotational(std::vector<anonelect::NodeId> occ) {
  std::vector<Configuration::Edge> edges;
  for (int i = 0; i < 4; ++i)
    for (int k = 1; k <= 3; ++k) {
      int j = (i + k) % 4;
      if (i < j) edges.push_back({i, k - 1, j, 3 - k});
    }
  return Configuration(4, 4, edges, std::move(occ));
}

}  // namespace fixtures
