#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "anonelect/graph.hpp"
#include "anonelect/protocol.hpp"

namespace anonelect {

// Half-step execution model: an activated agent either leaves a node through
// a port (onto the edge's midpoint) or finishes the pending traversal into
// the far node. Meetings happen on co-location, at nodes and at midpoints,
// and are delivered as Meet tokens carrying the other agents' memories.

enum class SchedulerKind { kSynchronous, kRandom, kSerial };

struct SimOptions {
  SchedulerKind scheduler = SchedulerKind::kSynchronous;
  std::uint64_t seed = 0;                      // random scheduler
  std::uint64_t max_ticks = 1'000'000;
  std::uint64_t max_memory_tokens = 10'000'000;  // per agent
  std::ostream* trace = nullptr;               // JSON object per line
  bool capture_decisions = false;
  // While tick < script.size(), tick t activates exactly agent script[t];
  // the scheduler takes over afterwards.
  std::vector<int> script;
};

enum class SimStatus { kRunning, kElected, kTickBudget, kMemoryBudget };

struct DecisionRecord {
  std::uint64_t tick = 0;
  int agent = 0;
  MemRef memory = nullptr;  // memory at decision time
  int fixed_phases = 0;     // sequences available at decision time
  Action action;
};

struct SimResult {
  SimStatus status = SimStatus::kRunning;
  std::uint64_t ticks = 0;
  SharedContext ctx;                  // sequences fixed during the run
  std::vector<NodeId> agents;         // homes, sorted
  std::vector<LabelId> final_labels;  // per agent, kNoLabel while exploring
  std::vector<bool> elected;
  std::vector<Trail> elect_trails;    // meaningful where elected
  std::vector<NodeId> resolved;       // -1 where not elected
  bool consistent = false;            // all elected the same node
  std::vector<DecisionRecord> decisions;
};

class Simulation {
 public:
  Simulation(ProtocolContext& pc, const Configuration& g, SimOptions opts);

  // Runs until election, a budget stop, or `ticks` more ticks (0 = no cap
  // beyond the budget). Can be called repeatedly.
  SimStatus run(std::uint64_t ticks = 0);

  SimResult result();

  const SharedContext& ctx() const { return ctx_; }
  std::uint64_t tick() const { return tick_; }
  int agent_count() const { return static_cast<int>(agents_.size()); }
  const Decider& decider(int i) const { return *agents_[i].decider; }
  MemRef memory(int i) const { return agents_[i].memory; }
  NodeId home(int i) const { return agents_[i].home; }
  bool mid_edge(int i) const { return agents_[i].mid_edge; }
  NodeId at(int i) const { return agents_[i].at; }
  bool elected(int i) const { return agents_[i].elected; }

 private:
  struct AgentState {
    NodeId home = 0;
    NodeId at = 0;
    bool mid_edge = false;
    NodeId edge_far = -1;   // pending traversal target
    Port edge_entry = -1;   // entry port at edge_far
    NodeId edge_u = -1, edge_v = -1;  // canonical edge key while mid-edge
    bool entered_now = false;
    bool exited_now = false;
    std::vector<Token> pending;  // midpoint meets, appended at next entry
    std::unique_ptr<Decider> decider;
    MemRef memory = nullptr;
    bool elected = false;
    Action elect_action;
  };

  void wake_all();
  void try_fix_sequence();
  void step_agent(int i);
  void deliver_meets();
  void append_token(int i, Token t);
  void trace_line(const std::string& s);
  bool everyone_elected() const;
  int pick_serial();

  ProtocolContext& pc_;
  const Configuration& g_;
  SimOptions opts_;
  SharedContext ctx_;
  std::vector<AgentState> agents_;
  std::mt19937_64 rng_;
  std::uint64_t tick_ = 0;
  bool woke_ = false;
  SimStatus status_ = SimStatus::kRunning;
  int serial_active_ = 0;
  std::vector<DecisionRecord> decisions_;
};

SimResult simulate(ProtocolContext& pc, const Configuration& g,
                   const SimOptions& opts);

// Replays every captured decision through the pure decision function and
// counts mismatches against the actions the live run took.
struct ReplayReport {
  std::uint64_t checked = 0;
  std::uint64_t mismatches = 0;
};
ReplayReport replay_decisions(ProtocolContext& pc, const SimResult& r);

// Synchronous run asserting that agents with equal enhanced views hold
// pointer-identical memories at every round (two ticks) boundary.
struct TwinReport {
  bool invariant = true;
  std::uint64_t rounds = 0;
  std::uint64_t first_violation_round = 0;
  int groups = 0;         // nontrivial twin groups
  SimStatus status = SimStatus::kRunning;
};
TwinReport twin_experiment(ProtocolContext& pc, const Configuration& g,
                           std::uint64_t rounds, const SimOptions& base);

// Serial run asserting that every agent's traversed trail equals the journey
// of its label at its completed stage (checked at stage boundaries) and that
// trail lengths track the in-progress walk between them.
struct TrailConsistencyReport {
  bool consistent = true;
  std::uint64_t checks = 0;       // exact rope comparisons at boundaries
  std::uint64_t length_checks = 0;
  SimStatus status = SimStatus::kRunning;
  std::uint64_t ticks = 0;
};
TrailConsistencyReport trail_consistency_experiment(ProtocolContext& pc,
                                                    const Configuration& g,
                                                    const SimOptions& base);

// Two scripted walkers; every interleaving of their half-steps is run and
// the first co-location is recorded. h1 + h2 is the number of half-steps
// both have taken when they first meet.
struct TunnelReport {
  std::uint64_t interleavings = 0;
  std::uint64_t met = 0;
  bool all_met_at = true;  // first meeting at h1+h2 == expected (0: skip)
  std::uint64_t expected_half_steps = 0;
};
TunnelReport tunnel_experiment(const Configuration& g, NodeId a_start,
                               const Trail& a_trail, NodeId b_start,
                               const Trail& b_trail,
                               std::uint64_t expected_half_steps);

// Every one-agent-per-tick schedule prefix up to a run cap, each completed
// deterministically, deduplicating outcomes. Runs a fresh context per
// schedule: journey caches are only valid within one schedule evolution, so
// outcomes carry no context-relative label ids.
struct ExhaustiveOutcome {
  SimStatus status = SimStatus::kRunning;
  bool consistent = false;
  std::vector<NodeId> resolved;

  bool operator==(const ExhaustiveOutcome&) const = default;
};
struct ExhaustiveReport {
  std::uint64_t runs = 0;
  bool capped = false;
  std::vector<ExhaustiveOutcome> distinct;
};
ExhaustiveReport exhaustive_experiment(const Configuration& g,
                                       const SimOptions& base,
                                       std::uint64_t max_runs);

}  // namespace anonelect
