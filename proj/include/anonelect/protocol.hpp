#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "anonelect/error.hpp"
#include "anonelect/graph.hpp"
#include "anonelect/label.hpp"
#include "anonelect/memory.hpp"
#include "anonelect/rope.hpp"
#include "anonelect/view.hpp"

namespace anonelect {

// The protocol proceeds in three mark-gathering phases followed by election.
// Each phase runs a shared schedule of (label, label, trail) triples; agents
// holding a scheduled label walk the stage trail, expecting the other label's
// holder at the end, and meetings that check out against the schedule turn
// into occupancy marks. The schedule for a phase is fixed only once every
// agent has finished the previous phase, which is the one piece of shared
// coordination the execution model provides.

inline constexpr int kPhaseCount = 3;

struct SequenceEntry {
  LabelId a = kNoLabel;  // walks T
  LabelId b = kNoLabel;  // walks reverse(T)
  int trail = -1;        // index into TripleSequence::trails
};

// Entries are pair-major (ordered label pairs in universe order) with trails
// in canonical order inside each pair; a pair of equal labels keeps only
// palindromic trails. Entries are indexed arithmetically instead of being
// materialized: universes are tiny but trail sets are not.
struct TripleSequence {
  std::vector<LabelId> universe;  // distinct labels at phase start, sorted
  std::vector<Trail> trails;      // shortest first, then lexicographic
  std::vector<bool> palindromic;  // per trail
  std::vector<int> palindrome_indices;  // trail indices of the palindromes

  std::int64_t entry_count() const;
  SequenceEntry entry(std::int64_t s) const;  // s is 1-based
};

struct SharedContext {
  int n = 0;                             // bound on the node count
  std::vector<TripleSequence> sequences; // fixed so far (phases 1..k)
};

// Arenas plus protocol-level memo tables. One per execution (or per worker
// thread); everything in it is derived data, so two contexts fed the same
// inputs agree. Journey and stage memos are keyed by (label, stage) and so
// assume a single schedule evolution: reusing a context across executions is
// only sound when their phase schedules cannot diverge (replays of one run's
// prefixes are fine, independently scheduled runs are not).
class ProtocolContext {
 public:
  explicit ProtocolContext(int n);

  ViewArena& views() { return views_; }
  LabelArena& labels() { return labels_; }
  RopeArena& ropes() { return ropes_; }
  MemoryArena& memories() { return memories_; }
  int n() const { return n_; }

  ViewWalker& walker(ViewRef view);

  // Full journey trail of a holder of `label` after processing entries
  // 1..s of its phase (s = 0: phase start). Includes all previous phases.
  RopeRef journey(const SharedContext& ctx, LabelId label, int s);

  struct Stage {
    Trail stage_trail;   // T' = T when the label is entry.a, else reverse(T)
    LabelId partner;     // the other endpoint's label
    RopeRef walk;        // T' ++ rev journey(partner, s-1) ++ rev T'
  };
  // Engaged stage data, or nullopt when the label is not in entry s's triple
  // or the full stage walk is infeasible in its view.
  std::optional<Stage> stage(const SharedContext& ctx, LabelId label, int s);

  // Ports traversed so far per the memory's Exit/Enter tokens (a trailing
  // Exit without its Enter is left out).
  RopeRef token_trail(MemRef m);

  // True when the memory's full walk fits the view from its root: every
  // Exit/Enter follows an edge of the view with matching entry port, and
  // every observed degree (Wake and Enter tokens) matches the view's.
  bool walk_matches_view(MemRef m, ViewRef view);

 private:
  struct StageKey {
    LabelId label;
    int s;
    bool operator==(const StageKey&) const = default;
  };
  struct StageKeyHash {
    std::size_t operator()(const StageKey& k) const {
      return std::hash<long long>()((static_cast<long long>(k.label) << 20) ^ k.s);
    }
  };

  int n_;
  ViewArena views_;
  LabelArena labels_;
  RopeArena ropes_;
  MemoryArena memories_;
  std::unordered_map<ViewRef, std::unique_ptr<ViewWalker>> walkers_;
  std::unordered_map<ViewRef, std::unique_ptr<RopeWalker<ClassWorld>>> rope_walkers_;
  std::unordered_map<StageKey, RopeRef, StageKeyHash> journey_memo_;
  std::unordered_map<StageKey, std::optional<Stage>, StageKeyHash> stage_memo_;
  std::unordered_map<MemRef, RopeRef> trail_memo_;

  RopeWalker<ClassWorld>& rope_walker(ViewRef view);
  // Fills journey_memo_ for all labels of the phase's universe (plus `extra`)
  // at levels 0..up_to, lowest level first, so stage_at never recurses.
  void ensure_journeys(const SharedContext& ctx, int phase, int up_to,
                       LabelId extra);
  std::optional<Stage> stage_at(const SharedContext& ctx, LabelId label, int s);
  friend class Decider;
};

// Schedule for one phase. Universe must be the sorted distinct labels held
// at the phase barrier; trails are every nonempty even-length trail with
// terms < n-1 and length <= 6(n-1) feasible from at least one universe
// label's root; entries pair every ordered label pair with every trail,
// keeping those where the labels differ or the trail is a palindrome.
TripleSequence build_phase_sequence(ProtocolContext& pc,
                                    const std::vector<LabelId>& universe);

struct Action {
  enum class Kind { kStay, kExit, kElect };
  Kind kind = Kind::kStay;
  Port port = -1;        // kExit
  Trail elect_trail;     // kElect: leader's position from the agent's home

  bool operator==(const Action&) const = default;
};

// Deterministic election from a final (4-mapping) label: candidate positions
// are the marked positions within depth n-1; each yields the identifier
// (code of its depth-(n-1) subtree, marks restricted to that subtree); the
// lexicographically least identifier wins, first position in DFS preorder.
// Equal identifiers stand for the same node whenever election is possible
// at all, so ties are not a local signal of trouble; inconsistency shows up
// when the observer resolves the trails. Throws kProtocol when no position
// is marked.
Trail choose_leader(ProtocolContext& pc, const SharedContext& ctx,
                    LabelId label);

// Incremental agent brain. Fed every token appended to the agent's memory;
// next() reports what the agent does when activated. Deterministic given
// (token stream, ctx evolution), and equal to the pure decide() below at
// every point.
class Decider {
 public:
  Decider(ProtocolContext& pc, int depth_budget);

  void on_token(const Token& t, MemRef after, const SharedContext& ctx);
  Action next(const SharedContext& ctx);

  bool elected() const { return state_ == State::kElected; }
  bool phase_done() const;  // finished all entries of the current phase
  bool exploring() const { return state_ == State::kExploring; }
  LabelId label() const { return label_; }
  int phase() const { return phase_; }
  int entry_index() const { return stage_; }
  bool walking() const { return walking_; }
  std::uint64_t walk_elements_done() const { return walk_done_; }
  RopeRef trail() const { return trail_; }

 private:
  enum class State {
    kExploring,
    kAwaitSequence,  // barrier: waiting for ctx.sequences[phase_-1]
    kInPhase,        // processing entries; maybe mid-walk
    kElected,
  };

  struct ExploreFrame {
    int degree = 0;
    int next_port = 0;
    Port entry = -1;  // port by which the parent was left to get here
    std::vector<ViewChild> children;
  };

  struct MeetRecord {
    std::vector<MemRef> items;
    int phase = 0;
    int stage = 0;             // entries completed or in progress
    bool in_stage = false;     // mid-walk when the meet happened
    std::uint64_t walk_elems = 0;  // elements of the stage walk done
    bool closed = false;       // trail == journey(label, completed stage)
    int closed_stage = 0;
    LabelId label = kNoLabel;
    RopeRef trail = nullptr;   // my token trail at the meet
  };

  void ensure_ready(const SharedContext& ctx);
  void start_phase(const SharedContext& ctx);
  void advance_entries(const SharedContext& ctx);
  void finish_phase(const SharedContext& ctx);
  void apply_meet_marks(const SharedContext& ctx, const MeetRecord& r,
                        BinaryMapping& f);
  void elect(const SharedContext& ctx);

  ProtocolContext& pc_;
  int depth_budget_;  // 3(n-1)
  State state_ = State::kExploring;

  // Exploration
  std::vector<ExploreFrame> explore_;
  bool explore_descending_ = false;
  ViewRef view_ = nullptr;

  // Phase machinery
  LabelId label_ = kNoLabel;
  int phase_ = 0;   // 1-based once exploring is done
  int stage_ = 0;   // entries fully processed within the phase
  bool walking_ = false;
  std::optional<RopeIter> walk_iter_;
  std::uint64_t walk_len_ = 0, walk_done_ = 0;
  Trail cur_stage_trail_;
  Port next_exit_ = -1;
  Port expected_entry_ = -1;
  bool mid_edge_ = false;

  // Trail bookkeeping
  RopeRef trail_ = nullptr;
  std::optional<Port> half_;

  std::vector<MeetRecord> meets_;        // since the last label update
  std::vector<MeetRecord> barrier_meets_;  // after stage K, for next phase

  Action elect_action_;
};

// Pure decision function: replays the memory from scratch against ctx.
Action decide(MemRef m, const SharedContext& ctx, ProtocolContext& pc);

// Closed-form execution: computes, phase by phase, the marks every agent is
// guaranteed to gather no matter how the run is scheduled, then elects.
// Shares the schedule, mark and election rules with the live protocol but
// never touches memories or schedulers.
struct SemanticOutcome {
  std::vector<NodeId> agents;          // occupied nodes, sorted
  std::vector<LabelId> final_labels;   // per agent
  std::vector<Trail> leader_trails;    // per agent
  std::vector<NodeId> resolved;        // ground-truth node each agent elected
  bool consistent = false;             // all agents resolved the same node
  std::string diagnosis;               // why not, when inconsistent
};

SemanticOutcome run_semantic(ProtocolContext& pc, const Configuration& g);

}  // namespace anonelect
