#include "anonelect/protocol.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <utility>

namespace anonelect {

using Code = Error::Code;

namespace {

constexpr std::uint64_t kSequenceTrailCap = 10'000'000;

}  // namespace

// ---- TripleSequence ----

std::int64_t TripleSequence::entry_count() const {
  std::int64_t u = static_cast<std::int64_t>(universe.size());
  std::int64_t t = static_cast<std::int64_t>(trails.size());
  std::int64_t p = static_cast<std::int64_t>(palindrome_indices.size());
  return u * p + u * (u - 1) * t;
}

SequenceEntry TripleSequence::entry(std::int64_t s) const {
  if (s < 1 || s > entry_count())
    throw Error(Code::kInvalidInput, "sequence entry index out of range");
  std::int64_t e = s - 1;
  std::int64_t t = static_cast<std::int64_t>(trails.size());
  std::int64_t p = static_cast<std::int64_t>(palindrome_indices.size());
  for (std::size_t i = 0; i < universe.size(); ++i) {
    for (std::size_t j = 0; j < universe.size(); ++j) {
      std::int64_t c = (i == j) ? p : t;
      if (e < c) {
        SequenceEntry out;
        out.a = universe[i];
        out.b = universe[j];
        out.trail = (i == j) ? palindrome_indices[static_cast<std::size_t>(e)]
                             : static_cast<int>(e);
        return out;
      }
      e -= c;
    }
  }
  throw Error(Code::kInvalidInput, "sequence entry index out of range");
}

// ---- ProtocolContext ----

ProtocolContext::ProtocolContext(int n) : n_(n) {
  if (n < 1) throw Error(Code::kInvalidInput, "bound must be at least 1");
}

ViewWalker& ProtocolContext::walker(ViewRef view) {
  auto it = walkers_.find(view);
  if (it != walkers_.end()) return *it->second;
  auto w = std::make_unique<ViewWalker>(views_, view, n_);
  return *walkers_.emplace(view, std::move(w)).first->second;
}

RopeWalker<ClassWorld>& ProtocolContext::rope_walker(ViewRef view) {
  auto it = rope_walkers_.find(view);
  if (it != rope_walkers_.end()) return *it->second;
  auto w = std::make_unique<RopeWalker<ClassWorld>>(ClassWorld{&walker(view)});
  return *rope_walkers_.emplace(view, std::move(w)).first->second;
}

// Stage walks are evaluated level by level across the whole phase universe
// (ensure_journeys), so computing entry s only ever reads journeys at s-1
// that are already memoized and the journey/stage recursion depth stays
// bounded by the phase count rather than by s.

std::optional<ProtocolContext::Stage> ProtocolContext::stage_at(
    const SharedContext& ctx, LabelId label, int s) {
  StageKey key{label, s};
  auto it = stage_memo_.find(key);
  if (it != stage_memo_.end()) return it->second;

  const Label& l = labels_.get(label);
  int phase = static_cast<int>(l.maps.size());
  const TripleSequence& seq = ctx.sequences[static_cast<std::size_t>(phase - 1)];
  SequenceEntry e = seq.entry(s);

  std::optional<Stage> out;
  if (label == e.a || label == e.b) {
    const Trail& t = seq.trails[static_cast<std::size_t>(e.trail)];
    Trail tp = (label == e.a) ? t : reverse_trail(t);
    LabelId partner = (label == e.a) ? e.b : e.a;
    RopeRef pj = journey_memo_.at(StageKey{partner, s - 1});
    RopeRef walk = ropes_.concat(
        ropes_.concat(ropes_.leaf(tp), ropes_.rev(pj)),
        ropes_.leaf(reverse_trail(tp)));
    ViewWalker& w = walker(l.view);
    auto end = rope_walker(l.view).run(walk, false, w.root_class());
    // A stage engages only when its whole walk is feasible and closed; a
    // true partner at the trail's end guarantees both.
    if (end && *end == w.root_class()) out = Stage{std::move(tp), partner, walk};
  }
  stage_memo_[key] = out;
  return out;
}

void ProtocolContext::ensure_journeys(const SharedContext& ctx, int phase,
                                      int up_to, LabelId extra) {
  if (phase < 1) throw Error(Code::kInvalidInput, "phase index must be positive");
  std::vector<LabelId> labels;
  if (static_cast<int>(ctx.sequences.size()) >= phase) {
    labels = ctx.sequences[static_cast<std::size_t>(phase - 1)].universe;
  } else if (up_to > 0) {
    throw Error(Code::kPrecondition,
                "stage index beyond the fixed schedule");
  }
  if (extra != kNoLabel &&
      std::find(labels.begin(), labels.end(), extra) == labels.end()) {
    labels.push_back(extra);
  }

  for (LabelId id : labels) {
    StageKey key{id, 0};
    if (journey_memo_.count(key)) continue;
    const Label& l = labels_.get(id);
    int p = static_cast<int>(l.maps.size());
    if (p != phase)
      throw Error(Code::kInvalidInput, "label is not in the given phase");
    RopeRef base;
    if (p == 1) {
      base = ropes_.leaf(view_dfs_trail(l.view));
    } else {
      Label parent;
      parent.view = l.view;
      parent.maps.assign(l.maps.begin(), l.maps.end() - 1);
      LabelId pid = labels_.intern(std::move(parent));
      const TripleSequence& prev =
          ctx.sequences[static_cast<std::size_t>(p - 2)];
      std::int64_t k = prev.entry_count();
      if (k > std::numeric_limits<int>::max())
        throw Error(Code::kBudget, "phase schedule too large");
      base = journey(ctx, pid, static_cast<int>(k));
    }
    journey_memo_[key] = base;
  }

  // Find the lowest unfilled level so repeated calls stay incremental.
  int from = up_to;
  while (from >= 1) {
    bool all = true;
    for (LabelId id : labels)
      if (!journey_memo_.count(StageKey{id, from - 1})) { all = false; break; }
    if (all) break;
    --from;
  }
  for (int k = from; k <= up_to; ++k) {
    for (LabelId id : labels) {
      StageKey key{id, k};
      if (journey_memo_.count(key)) continue;
      auto st = stage_at(ctx, id, k);
      RopeRef prev = journey_memo_.at(StageKey{id, k - 1});
      journey_memo_[key] = st ? ropes_.concat(prev, st->walk) : prev;
    }
  }
}

RopeRef ProtocolContext::journey(const SharedContext& ctx, LabelId label,
                                 int s) {
  if (s < 0) throw Error(Code::kInvalidInput, "stage index must be nonnegative");
  StageKey key{label, s};
  auto it = journey_memo_.find(key);
  if (it != journey_memo_.end()) return it->second;
  int phase = static_cast<int>(labels_.get(label).maps.size());
  ensure_journeys(ctx, phase, s, label);
  return journey_memo_.at(key);
}

std::optional<ProtocolContext::Stage> ProtocolContext::stage(
    const SharedContext& ctx, LabelId label, int s) {
  if (s < 1) throw Error(Code::kInvalidInput, "stage index must be positive");
  StageKey key{label, s};
  auto it = stage_memo_.find(key);
  if (it != stage_memo_.end()) return it->second;
  int phase = static_cast<int>(labels_.get(label).maps.size());
  if (static_cast<int>(ctx.sequences.size()) < phase)
    throw Error(Code::kPrecondition, "stage index beyond the fixed schedule");
  ensure_journeys(ctx, phase, s - 1, label);
  return stage_at(ctx, label, s);
}

RopeRef ProtocolContext::token_trail(MemRef m) {
  if (m == nullptr) return ropes_.empty();
  std::vector<MemRef> chain;
  MemRef cur = m;
  while (cur != nullptr && !trail_memo_.count(cur)) {
    chain.push_back(cur);
    cur = cur->parent;
  }
  RopeRef rope = (cur != nullptr) ? trail_memo_.at(cur) : ropes_.empty();
  // Recover whether an Exit is pending at the resume point: the nearest
  // walk token below decides.
  std::optional<Port> half;
  for (MemRef x = cur; x != nullptr; x = x->parent) {
    if (x->token.kind == Token::Kind::kExit) { half = x->token.a; break; }
    if (x->token.kind == Token::Kind::kEnter ||
        x->token.kind == Token::Kind::kWake) break;
  }
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const Token& t = (*it)->token;
    switch (t.kind) {
      case Token::Kind::kWake:
      case Token::Kind::kMeet:
        break;
      case Token::Kind::kExit:
        if (half)
          throw Error(Code::kInvalidInput, "memory has two exits in a row");
        half = t.a;
        break;
      case Token::Kind::kEnter:
        if (!half)
          throw Error(Code::kInvalidInput, "memory has an entry with no exit");
        rope = ropes_.concat(rope, ropes_.leaf(Trail{*half, t.a}));
        half.reset();
        break;
    }
    trail_memo_[*it] = rope;
  }
  return rope;
}

bool ProtocolContext::walk_matches_view(MemRef m, ViewRef view) {
  auto tokens = memory_tokens(m);
  if (tokens.empty() || tokens.front()->kind != Token::Kind::kWake) return false;
  ViewWalker& w = walker(view);
  ViewRef cls = w.root_class();
  bool woke = false;
  std::optional<Port> pending;
  Port expect_entry = -1;
  ViewRef next_cls = nullptr;
  for (const Token* t : tokens) {
    switch (t->kind) {
      case Token::Kind::kWake:
        if (woke) return false;
        woke = true;
        if (t->a != cls->degree) return false;
        break;
      case Token::Kind::kExit: {
        if (pending) return false;
        if (t->a < 0 || t->a >= cls->degree) return false;
        auto [entry, nxt] = w.step(cls, t->a);
        pending = t->a;
        expect_entry = entry;
        next_cls = nxt;
        break;
      }
      case Token::Kind::kEnter:
        if (!pending) return false;
        if (t->a != expect_entry) return false;
        if (t->b != next_cls->degree) return false;
        cls = next_cls;
        pending.reset();
        break;
      case Token::Kind::kMeet:
        break;
    }
  }
  return true;
}

// ---- schedule construction ----

TripleSequence build_phase_sequence(ProtocolContext& pc,
                                    const std::vector<LabelId>& universe) {
  if (universe.empty())
    throw Error(Code::kInvalidInput, "phase universe is empty");
  LabelArena& labels = pc.labels();
  for (std::size_t i = 0; i + 1 < universe.size(); ++i)
    if (labels.compare(universe[i], universe[i + 1]) >= 0)
      throw Error(Code::kInvalidInput,
                  "phase universe is not sorted and distinct");
  std::size_t maps0 = labels.get(universe[0]).maps.size();
  for (LabelId id : universe)
    if (labels.get(id).maps.size() != maps0)
      throw Error(Code::kInvalidInput, "phase universe mixes phases");

  int n = pc.n();
  if (n < 2) throw Error(Code::kInvalidInput, "bound must be at least 2");
  int max_edges = 3 * (n - 1);
  Port max_port = static_cast<Port>(n - 2);

  std::vector<ViewRef> views;
  for (LabelId id : universe) {
    ViewRef v = labels.get(id).view;
    if (std::find(views.begin(), views.end(), v) == views.end())
      views.push_back(v);
  }
  std::vector<ViewWalker*> walkers;
  walkers.reserve(views.size());
  for (ViewRef v : views) walkers.push_back(&pc.walker(v));

  struct Alive {
    int walker;
    ViewRef cls;
  };
  std::vector<Trail> trails;
  Trail prefix;

  auto rec = [&](auto&& self, const std::vector<Alive>& alive, int edges) -> void {
    if (edges == max_edges) return;
    for (Port p = 0; p <= max_port; ++p) {
      std::map<Port, std::vector<Alive>> buckets;
      for (const Alive& a : alive) {
        if (p >= walkers[static_cast<std::size_t>(a.walker)]->degree(a.cls))
          continue;
        auto [q, nxt] = walkers[static_cast<std::size_t>(a.walker)]->step(a.cls, p);
        buckets[q].push_back(Alive{a.walker, nxt});
      }
      for (auto& [q, bucket] : buckets) {
        prefix.push_back(p);
        prefix.push_back(q);
        trails.push_back(prefix);
        if (trails.size() > kSequenceTrailCap)
          throw Error(Code::kBudget, "schedule trail set too large");
        self(self, bucket, edges + 1);
        prefix.pop_back();
        prefix.pop_back();
      }
    }
  };
  std::vector<Alive> start;
  for (std::size_t i = 0; i < walkers.size(); ++i)
    start.push_back(Alive{static_cast<int>(i), walkers[i]->root_class()});
  rec(rec, start, 0);

  std::sort(trails.begin(), trails.end(), [](const Trail& a, const Trail& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });

  TripleSequence seq;
  seq.universe = universe;
  seq.trails = std::move(trails);
  seq.palindromic.resize(seq.trails.size());
  for (std::size_t i = 0; i < seq.trails.size(); ++i) {
    bool p = is_palindrome(seq.trails[i]);
    seq.palindromic[i] = p;
    if (p) seq.palindrome_indices.push_back(static_cast<int>(i));
  }
  return seq;
}

}  // namespace anonelect
