#include "anonelect/corpus.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <mutex>
#include <numeric>
#include <thread>
#include <utility>

#include "anonelect/eligibility.hpp"
#include "anonelect/error.hpp"
#include "anonelect/json_io.hpp"
#include "anonelect/protocol.hpp"
#include "anonelect/view.hpp"

namespace anonelect {
namespace {

using Code = Error::Code;

// Flat comparable form of a port-labeled edge set: per edge (u, v, pu, pv)
// with u < v, rows sorted. Two candidates on the same node count are equal
// graphs iff their keys are equal.
using GraphKey = std::vector<int>;

GraphKey key_of(const std::vector<Configuration::Edge>& edges) {
  std::vector<std::array<int, 4>> rows;
  rows.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.u < e.v)
      rows.push_back({e.u, e.v, e.pu, e.pv});
    else
      rows.push_back({e.v, e.u, e.pv, e.pu});
  }
  std::sort(rows.begin(), rows.end());
  GraphKey key;
  key.reserve(rows.size() * 4);
  for (const auto& r : rows) key.insert(key.end(), r.begin(), r.end());
  return key;
}

// Relabels nodes; ports stay attached to their edge ends.
std::vector<Configuration::Edge> apply_perm(
    const std::vector<Configuration::Edge>& edges,
    const std::vector<int>& pi) {
  std::vector<Configuration::Edge> out;
  out.reserve(edges.size());
  for (const auto& e : edges) out.push_back({pi[e.u], e.pu, pi[e.v], e.pv});
  return out;
}

bool connected(int k, const std::vector<std::pair<int, int>>& pairs) {
  std::vector<int> parent(k);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int comps = k;
  for (auto [a, b] : pairs) {
    int ra = find(a), rb = find(b);
    if (ra != rb) {
      parent[ra] = rb;
      comps -= 1;
    }
  }
  return comps == 1;
}

std::vector<std::vector<int>> permutations_of(int d) {
  std::vector<std::vector<int>> out;
  std::vector<int> p(d);
  std::iota(p.begin(), p.end(), 0);
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// Emits the candidate's occupancy variants. With dedup on, only iff the
// candidate is the lexicographically least member of its isomorphism class,
// and only occupancy masks minimal under the automorphism group.
void emit_candidate(int k, const std::vector<Configuration::Edge>& edges,
                    const std::vector<std::vector<int>>& perms, int min_agents,
                    bool dedup,
                    const std::function<void(const Configuration&)>& fn) {
  std::vector<const std::vector<int>*> autos;
  if (dedup) {
    GraphKey self = key_of(edges);
    for (const auto& pi : perms) {
      GraphKey img = key_of(apply_perm(edges, pi));
      if (img < self) return;
      if (img == self) autos.push_back(&pi);
    }
  }
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    if (std::popcount(mask) < min_agents) continue;
    bool minimal = true;
    for (const auto* pi : autos) {
      unsigned img = 0;
      for (int v = 0; v < k; ++v)
        if (mask >> v & 1) img |= 1u << (*pi)[v];
      if (img < mask) {
        minimal = false;
        break;
      }
    }
    if (!minimal) continue;
    std::vector<NodeId> occ;
    for (int v = 0; v < k; ++v)
      if (mask >> v & 1) occ.push_back(v);
    fn(Configuration(k, k, edges, std::move(occ)));
  }
}

void enumerate_size(int k, const EnumerateOptions& opts,
                    const std::function<void(const Configuration&)>& fn) {
  const int min_agents = std::max(1, opts.min_agents);
  std::vector<std::vector<int>> perms = permutations_of(k);
  std::vector<std::vector<std::vector<int>>> slot_perms(k);
  for (int d = 0; d < k; ++d) slot_perms[d] = permutations_of(d);

  std::vector<std::pair<int, int>> all_pairs;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) all_pairs.emplace_back(i, j);
  const int m = static_cast<int>(all_pairs.size());

  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << m); ++mask) {
    std::vector<std::pair<int, int>> pairs;
    for (int e = 0; e < m; ++e)
      if (mask >> e & 1) pairs.push_back(all_pairs[e]);
    if (static_cast<int>(pairs.size()) < k - 1) continue;
    if (!connected(k, pairs)) continue;

    // Incident edge slots per node; pair order is lex, so slots come out
    // sorted by the far endpoint.
    std::vector<std::vector<int>> inc(k);
    for (int e = 0; e < static_cast<int>(pairs.size()); ++e) {
      inc[pairs[e].first].push_back(e);
      inc[pairs[e].second].push_back(e);
    }
    std::vector<int> deg(k);
    for (int v = 0; v < k; ++v) deg[v] = static_cast<int>(inc[v].size());
    if (opts.max_degree >= 0 &&
        *std::max_element(deg.begin(), deg.end()) > opts.max_degree)
      continue;

    // Odometer over one port permutation per node.
    std::vector<std::size_t> idx(k, 0);
    for (;;) {
      std::vector<Configuration::Edge> edges(pairs.size());
      for (int e = 0; e < static_cast<int>(pairs.size()); ++e)
        edges[e] = {pairs[e].first, -1, pairs[e].second, -1};
      for (int v = 0; v < k; ++v) {
        const std::vector<int>& pm = slot_perms[deg[v]][idx[v]];
        for (int s = 0; s < deg[v]; ++s) {
          int e = inc[v][s];
          if (pairs[e].first == v)
            edges[e].pu = pm[s];
          else
            edges[e].pv = pm[s];
        }
      }
      emit_candidate(k, edges, perms, min_agents, opts.dedup, fn);
      int v = 0;
      for (; v < k; ++v) {
        idx[v] += 1;
        if (idx[v] < slot_perms[deg[v]].size()) break;
        idx[v] = 0;
      }
      if (v == k) break;
    }
  }
}

}  // namespace

void enumerate_configurations(
    const EnumerateOptions& opts,
    const std::function<void(const Configuration&)>& fn) {
  if (!fn) throw Error(Code::kInvalidInput, "enumeration callback is empty");
  if (opts.max_nodes < 1)
    throw Error(Code::kInvalidInput, "need at least one node");
  if (opts.max_nodes > 5)
    throw Error(Code::kInvalidInput,
                "exhaustive enumeration beyond 5 nodes is not tractable");
  if (opts.min_nodes > opts.max_nodes)
    throw Error(Code::kInvalidInput, "min_nodes exceeds max_nodes");
  for (int k = std::max(1, opts.min_nodes); k <= opts.max_nodes; ++k)
    enumerate_size(k, opts, fn);
}

void enumerate_configurations(
    int max_nodes, int min_agents,
    const std::function<void(const Configuration&)>& fn) {
  EnumerateOptions opts;
  opts.max_nodes = max_nodes;
  opts.min_agents = min_agents;
  enumerate_configurations(opts, fn);
}

Configuration random_configuration(std::mt19937_64& rng, int nodes,
                                   int min_agents) {
  if (nodes < 1) throw Error(Code::kInvalidInput, "need at least one node");
  if (min_agents < 1) min_agents = 1;
  if (min_agents > nodes)
    throw Error(Code::kInvalidInput, "more agents requested than nodes");

  // Spanning tree: attach each node, in a shuffled order, to a uniformly
  // chosen earlier one. Every tree has positive probability.
  std::vector<int> order(nodes);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 1; i < nodes; ++i) {
    int j = std::uniform_int_distribution<int>(0, i - 1)(rng);
    pairs.emplace_back(std::min(order[i], order[j]),
                       std::max(order[i], order[j]));
  }
  for (int i = 0; i < nodes; ++i)
    for (int j = i + 1; j < nodes; ++j) {
      if (std::find(pairs.begin(), pairs.end(), std::make_pair(i, j)) !=
          pairs.end())
        continue;
      if (std::uniform_int_distribution<int>(0, 2)(rng) == 0)
        pairs.emplace_back(i, j);
    }

  std::vector<std::vector<int>> inc(nodes);
  for (int e = 0; e < static_cast<int>(pairs.size()); ++e) {
    inc[pairs[e].first].push_back(e);
    inc[pairs[e].second].push_back(e);
  }
  std::vector<Configuration::Edge> edges(pairs.size());
  for (int e = 0; e < static_cast<int>(pairs.size()); ++e)
    edges[e] = {pairs[e].first, -1, pairs[e].second, -1};
  for (int v = 0; v < nodes; ++v) {
    std::vector<int> port(inc[v].size());
    std::iota(port.begin(), port.end(), 0);
    std::shuffle(port.begin(), port.end(), rng);
    for (std::size_t s = 0; s < inc[v].size(); ++s) {
      int e = inc[v][s];
      if (pairs[e].first == v)
        edges[e].pu = port[s];
      else
        edges[e].pv = port[s];
    }
  }

  std::vector<char> occ_mask(nodes, 0);
  int agents = 0;
  for (int v = 0; v < nodes; ++v)
    if (rng() & 1) {
      occ_mask[v] = 1;
      agents += 1;
    }
  while (agents < min_agents) {
    int v = std::uniform_int_distribution<int>(0, nodes - 1)(rng);
    if (!occ_mask[v]) {
      occ_mask[v] = 1;
      agents += 1;
    }
  }
  std::vector<NodeId> occ;
  for (int v = 0; v < nodes; ++v)
    if (occ_mask[v]) occ.push_back(v);
  return Configuration(nodes, nodes, edges, std::move(occ));
}

CrossStats cross_validate(const CrossOptions& opts,
                          const std::function<void(std::uint64_t)>& progress) {
  if (opts.min_agents < 2)
    throw Error(Code::kInvalidInput,
                "cross-validation needs at least two agents per configuration");
  std::vector<Configuration> corpus;
  enumerate_configurations(opts.max_nodes, opts.min_agents,
                           [&](const Configuration& g) {
                             corpus.push_back(g);
                           });

  CrossStats stats;
  stats.configurations = corpus.size();
  int workers = opts.threads > 0
                    ? opts.threads
                    : static_cast<int>(
                          std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min<int>(workers, static_cast<int>(corpus.size()));
  if (workers < 1) workers = 1;

  std::atomic<std::size_t> next{0};
  std::atomic<std::uint64_t> done{0};
  std::mutex mu;

  auto work = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= corpus.size()) return;
      const Configuration& g = corpus[i];
      bool eligible = false;
      bool consistent = false;
      std::string kind;
      std::string detail;
      try {
        // Independent route one: the direct characterization checker.
        ViewArena checker_arena;
        EligibilityReport rep = check_ec(checker_arena, g);
        eligible = rep.eligible();
        // Independent route two: the protocol's guaranteed-marks executor.
        ProtocolContext pc(g.bound());
        SemanticOutcome out = run_semantic(pc, g);
        consistent = out.consistent;
        if (eligible != consistent) {
          kind = "verdict";
          detail = out.diagnosis;
        }
        const int n = g.bound();
        if (kind.empty() && opts.check_marks) {
          for (std::size_t a = 0; kind.empty() && a < out.agents.size(); ++a) {
            const Label& l = pc.labels().get(out.final_labels[a]);
            BinaryMapping truth =
                ground_truth_mapping(g, out.agents[a], 3 * (n - 1));
            for (const BinaryMapping& f : l.maps)
              if (!f.subset_of(truth)) {
                kind = "marks";
                detail = "accumulated mark outside ground truth";
                break;
              }
          }
        }
        if (kind.empty() && opts.check_semi && eligible) {
          for (std::size_t a = 0; kind.empty() && a < out.agents.size(); ++a) {
            const Label& l = pc.labels().get(out.final_labels[a]);
            BinaryMapping truth =
                ground_truth_mapping(g, out.agents[a], 3 * (n - 1));
            BinaryMapping mask = depth_mask(l.view, 2 * (n - 1));
            const BinaryMapping& f = l.maps.back();
            for (std::size_t w = 0; w < mask.words.size(); ++w)
              if ((f.words[w] & mask.words[w]) !=
                  (truth.words[w] & mask.words[w])) {
                kind = "semi";
                detail = "mark missing within depth 2(n-1)";
                break;
              }
          }
        }
      } catch (const std::exception& e) {
        kind = "error";
        detail = e.what();
      }
      {
        std::lock_guard<std::mutex> lock(mu);
        if (eligible) stats.eligible += 1;
        if (consistent) stats.consistent += 1;
        if (kind == "verdict") stats.verdict_disagreements += 1;
        if (kind == "marks") stats.mark_violations += 1;
        if (kind == "semi") stats.semi_violations += 1;
        if (kind == "error") stats.errors += 1;
        if (!kind.empty()) {
          stats.counterexamples.push_back({i, configuration_to_json(g).dump(),
                                           eligible, consistent, kind,
                                           detail});
        }
      }
      if (progress) progress(done.fetch_add(1) + 1);
    }
  };

  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  // Completion order depends on scheduling; report in enumeration order.
  std::sort(stats.counterexamples.begin(), stats.counterexamples.end(),
            [](const CrossCase& a, const CrossCase& b) {
              return a.index < b.index;
            });
  if (static_cast<int>(stats.counterexamples.size()) >
      opts.max_counterexamples)
    stats.counterexamples.resize(opts.max_counterexamples);
  return stats;
}

}  // namespace anonelect
