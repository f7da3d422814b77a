#include "anonelect/protocol.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace anonelect {

using Code = Error::Code;

namespace {

// Memoized transitions: the same (source view, target view, anchor) triple
// recurs across phases and agent pairs.
class TransitionCache {
 public:
  explicit TransitionCache(ViewArena& views) : views_(views) {}

  const Transition& get(ViewRef from, ViewRef into, const Trail& anchor,
                        int n) {
    auto key = std::make_tuple(from, into, anchor);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Transition tr = compute_transition(views_, from, into, anchor, n);
    return cache_.emplace(std::move(key), std::move(tr)).first->second;
  }

 private:
  ViewArena& views_;
  std::map<std::tuple<ViewRef, ViewRef, Trail>, Transition> cache_;
};

}  // namespace

SemanticOutcome run_semantic(ProtocolContext& pc, const Configuration& g) {
  int n = pc.n();
  if (n != g.bound())
    throw Error(Code::kInvalidInput, "context bound differs from the graph's");
  if (g.agent_count() < 2)
    throw Error(Code::kProtocol, "a single agent has nobody to elect with");

  SemanticOutcome out;
  out.agents = g.occupied();
  std::sort(out.agents.begin(), out.agents.end());
  int agents = static_cast<int>(out.agents.size());

  int l = 3 * (n - 1);
  ViewArena& views = pc.views();
  LabelArena& labels = pc.labels();

  std::vector<ViewRef> view(agents);
  std::vector<LabelId> label(agents);
  std::vector<std::uint64_t> root_pos_of(static_cast<std::size_t>(g.node_count()));
  std::vector<int> agent_at(static_cast<std::size_t>(g.node_count()), -1);
  for (int i = 0; i < agents; ++i) {
    view[i] = truncated_view(views, g, out.agents[i], l);
    label[i] = initial_label(labels, view[i]);
    agent_at[static_cast<std::size_t>(out.agents[i])] = i;
  }

  TransitionCache transitions(views);
  int max_edges = 3 * (n - 1);
  Port max_port = static_cast<Port>(n - 2);

  for (int phase = 1; phase <= kPhaseCount; ++phase) {
    std::vector<LabelId> start = label;
    std::vector<BinaryMapping> acc;
    acc.reserve(static_cast<std::size_t>(agents));
    for (int i = 0; i < agents; ++i)
      acc.push_back(labels.get(start[static_cast<std::size_t>(i)]).maps.back());

    for (int i = 0; i < agents; ++i) {
      // One DFS from agent i covers every ordered pair (i, j): each nonempty
      // even prefix landing on an occupied node j != i is one scheduled
      // encounter. The stack tracks the graph node and the preorder position
      // of the prefix's end inside agent i's view.
      struct Frame {
        NodeId node;
        std::uint64_t pos;
        Port next = 0;
      };
      Trail prefix;
      std::vector<Frame> stack;
      std::vector<ViewRef> vstack;
      stack.push_back(Frame{out.agents[static_cast<std::size_t>(i)], 0, 0});
      vstack.push_back(view[static_cast<std::size_t>(i)]);
      while (!stack.empty()) {
        Frame& f = stack.back();
        int deg = g.degree(f.node);
        Port limit = std::min<Port>(max_port, static_cast<Port>(deg - 1));
        if (f.next > limit ||
            static_cast<int>(prefix.size()) / 2 >= max_edges) {
          stack.pop_back();
          vstack.pop_back();
          if (!prefix.empty()) {
            prefix.pop_back();
            prefix.pop_back();
          }
          continue;
        }
        Port p = f.next;
        f.next += 1;
        auto [far, entry] = g.traverse(f.node, p);
        ViewRef vcur = vstack.back();
        std::uint64_t child_pos = stack.back().pos + 1;
        for (Port q = 0; q < p; ++q)
          child_pos += vcur->children[static_cast<std::size_t>(q)].node->size;
        prefix.push_back(p);
        prefix.push_back(entry);
        stack.push_back(Frame{far, child_pos, 0});
        vstack.push_back(vcur->children[static_cast<std::size_t>(p)].node);

        int j = agent_at[static_cast<std::size_t>(far)];
        if (j >= 0 && j != i) {
          bool qualify =
              start[static_cast<std::size_t>(i)] !=
                  start[static_cast<std::size_t>(j)] ||
              is_palindrome(prefix);
          if (qualify) {
            acc[static_cast<std::size_t>(i)].set(child_pos);
            Trail back = reverse_trail(prefix);
            auto jpos = position_index(view[static_cast<std::size_t>(j)], back);
            acc[static_cast<std::size_t>(j)].set(*jpos);
            if (static_cast<int>(prefix.size()) <= 2 * (n - 1)) {
              const Label& li = labels.get(start[static_cast<std::size_t>(i)]);
              const Label& lj = labels.get(start[static_cast<std::size_t>(j)]);
              const Transition& ti = transitions.get(
                  view[static_cast<std::size_t>(i)],
                  view[static_cast<std::size_t>(j)], back, n);
              pull_marks(ti, lj.maps.back(), acc[static_cast<std::size_t>(i)],
                         2 * (n - 1));
              const Transition& tj = transitions.get(
                  view[static_cast<std::size_t>(j)],
                  view[static_cast<std::size_t>(i)], prefix, n);
              pull_marks(tj, li.maps.back(), acc[static_cast<std::size_t>(j)],
                         2 * (n - 1));
            }
          }
        }
      }
    }

    for (int i = 0; i < agents; ++i) {
      const Label& cur = labels.get(start[static_cast<std::size_t>(i)]);
      Label next;
      next.view = cur.view;
      next.maps = cur.maps;
      next.maps.push_back(std::move(acc[static_cast<std::size_t>(i)]));
      label[static_cast<std::size_t>(i)] = labels.intern(std::move(next));
    }
  }

  out.final_labels = label;
  out.leader_trails.resize(static_cast<std::size_t>(agents));
  out.resolved.resize(static_cast<std::size_t>(agents));
  SharedContext sc;
  sc.n = n;
  bool all_same = true;
  for (int i = 0; i < agents; ++i) {
    Trail t = choose_leader(pc, sc, label[static_cast<std::size_t>(i)]);
    ConfigWorld w{&g};
    auto end = walk_trail(w, out.agents[static_cast<std::size_t>(i)], t);
    if (!end)
      throw Error(Code::kProtocol, "elected position is not in the graph");
    out.leader_trails[static_cast<std::size_t>(i)] = std::move(t);
    out.resolved[static_cast<std::size_t>(i)] = *end;
    if (*end != out.resolved[0]) all_same = false;
  }
  out.consistent = all_same;
  if (!out.consistent) {
    bool dup = false;
    for (int i = 0; i < agents && !dup; ++i)
      for (int j = i + 1; j < agents && !dup; ++j) {
        CompleteIdentifier a = complete_identifier(
            views, g, out.agents[static_cast<std::size_t>(i)]);
        CompleteIdentifier b = complete_identifier(
            views, g, out.agents[static_cast<std::size_t>(j)]);
        if (identifier_compare(a, b) == 0) dup = true;
      }
    out.diagnosis =
        dup ? "duplicate complete identifiers" : "leader choices diverge";
  }
  return out;
}

}  // namespace anonelect
