#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "anonelect/graph.hpp"

namespace anonelect {

struct EnumerateOptions {
  int max_nodes = 4;
  int min_nodes = 1;
  int min_agents = 1;
  int max_degree = -1;  // -1 leaves degrees unrestricted
  bool dedup = true;    // keep one representative per isomorphism class
};

// Exhaustive corpus: every connected port-labeled graph on 1..max_nodes
// nodes paired with every occupancy of at least min_agents nodes. With
// dedup on, one representative per port-preserving isomorphism class is
// kept and occupancies are deduplicated under the graph's automorphisms;
// with dedup off, every port assignment and every occupancy is emitted.
// The bound handed to each Configuration is its node count. Practical
// through max_nodes = 4; 5 works but enumerates millions of port
// assignments per dense graph; larger sizes are rejected.
void enumerate_configurations(
    const EnumerateOptions& opts,
    const std::function<void(const Configuration&)>& fn);

// Deduplicated enumeration with unrestricted degrees.
void enumerate_configurations(
    int max_nodes, int min_agents,
    const std::function<void(const Configuration&)>& fn);

// Random connected configuration on exactly `nodes` nodes: a uniformly
// attached spanning tree over a shuffled node order, extra edges by coin
// flip, per-node random port assignment, random occupancy padded up to
// min_agents agents.
Configuration random_configuration(std::mt19937_64& rng, int nodes,
                                   int min_agents);

struct CrossOptions {
  int max_nodes = 4;
  int min_agents = 2;
  int threads = 0;  // 0 picks hardware concurrency
  int max_counterexamples = 16;
  bool check_marks = true;  // every accumulated map stays inside ground truth
  bool check_semi = true;   // eligible: final map complete to depth 2(n-1)
};

struct CrossCase {
  std::uint64_t index = 0;  // position in enumeration order
  std::string config_json;
  bool eligible = false;    // checker verdict
  bool consistent = false;  // executor outcome
  std::string kind;         // "verdict" | "marks" | "semi" | "error"
  std::string detail;
};

struct CrossStats {
  std::uint64_t configurations = 0;
  std::uint64_t eligible = 0;
  std::uint64_t consistent = 0;
  std::uint64_t verdict_disagreements = 0;
  std::uint64_t mark_violations = 0;
  std::uint64_t semi_violations = 0;
  std::uint64_t errors = 0;
  std::vector<CrossCase> counterexamples;  // enumeration order, capped

  bool ok() const {
    return verdict_disagreements == 0 && mark_violations == 0 &&
           semi_violations == 0 && errors == 0;
  }
};

// Runs the eligibility checker and the closed-form executor on every corpus
// configuration and cross-checks the two routes, with a fresh protocol
// context per configuration. `progress`, when set, receives the number of
// configurations finished so far.
CrossStats cross_validate(const CrossOptions& opts,
                          const std::function<void(std::uint64_t)>& progress =
                              {});

}  // namespace anonelect
