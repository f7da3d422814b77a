#include "anonelect/protocol.hpp"

#include <algorithm>
#include <utility>

namespace anonelect {

using Code = Error::Code;

namespace {

// Live stage scanning touches every entry of the phase schedule, so a
// schedule this size means the run would never finish anyway.
constexpr std::int64_t kMaxLiveEntries = 2'000'000;

}  // namespace

// ---- election ----

namespace {

void collect_candidates(ViewRef node, std::uint64_t base, int depth,
                        int max_depth, const BinaryMapping& f, Trail& path,
                        std::vector<std::pair<ViewRef, Trail>>& out) {
  if (f.get(base)) out.emplace_back(node, path);
  if (depth == max_depth || node->children.empty()) return;
  std::uint64_t off = base + 1;
  for (std::size_t i = 0; i < node->children.size(); ++i) {
    const ViewChild& c = node->children[i];
    path.push_back(static_cast<Port>(i));
    path.push_back(c.entry);
    collect_candidates(c.node, off, depth + 1, max_depth, f, path, out);
    path.pop_back();
    path.pop_back();
    off += c.node->size;
  }
}

// Marks of `f` (over the full-depth subtree) carried over to the positions
// of its truncation. Truncated preorder is not a contiguous slice of the
// full preorder, hence the parallel walk.
void restrict_marks(ViewRef full, std::uint64_t fbase, ViewRef trunc,
                    std::uint64_t tbase, const BinaryMapping& f,
                    BinaryMapping& out) {
  if (f.get(fbase)) out.set(tbase);
  if (trunc->children.empty()) return;
  std::uint64_t foff = fbase + 1, toff = tbase + 1;
  for (std::size_t i = 0; i < trunc->children.size(); ++i) {
    restrict_marks(full->children[i].node, foff, trunc->children[i].node, toff,
                   f, out);
    foff += full->children[i].node->size;
    toff += trunc->children[i].node->size;
  }
}

}  // namespace

Trail choose_leader(ProtocolContext& pc, const SharedContext& ctx,
                    LabelId label) {
  (void)ctx;
  const Label& l = pc.labels().get(label);
  int n = pc.n();
  if (l.view->size >= (std::uint64_t(1) << 60))
    throw Error(Code::kBudget, "view too large for election");

  std::vector<std::pair<ViewRef, Trail>> cand;
  Trail path;
  collect_candidates(l.view, 0, 0, n - 1, l.maps.back(), path, cand);
  if (cand.empty())
    throw Error(Code::kProtocol, "no marked position within the leader depth");

  struct Scored {
    CompleteIdentifier id;
    const Trail* trail;
  };
  std::vector<Scored> scored;
  scored.reserve(cand.size());
  ViewArena& views = pc.views();
  for (auto& [node, trail] : cand) {
    ViewRef trunc = views.truncate(node, n - 1);
    CompleteIdentifier id;
    id.code = view_code(trunc);
    id.marks = BinaryMapping::zeros(trunc->size);
    // The candidate's marks live in the full view at the candidate's
    // preorder offset; restrict them onto the truncated subtree in place.
    auto base = position_index(l.view, trail);
    restrict_marks(node, *base, trunc, 0, l.maps.back(), id.marks);
    scored.push_back(Scored{std::move(id), &trail});
  }

  // Candidates are in preorder, so keeping strict minima makes `best` the
  // first position holding the least identifier.
  std::size_t best = 0;
  for (std::size_t i = 1; i < scored.size(); ++i)
    if (identifier_compare(scored[i].id, scored[best].id) < 0) best = i;
  return *scored[best].trail;
}

// ---- Decider ----

Decider::Decider(ProtocolContext& pc, int depth_budget)
    : pc_(pc), depth_budget_(depth_budget) {
  if (depth_budget < 0)
    throw Error(Code::kInvalidInput, "negative exploration depth");
  trail_ = pc_.ropes().empty();
}

bool Decider::phase_done() const { return state_ == State::kAwaitSequence; }

void Decider::ensure_ready(const SharedContext& ctx) {
  for (;;) {
    switch (state_) {
      case State::kExploring:
      case State::kElected:
        return;
      case State::kAwaitSequence:
        if (static_cast<int>(ctx.sequences.size()) < phase_) return;
        start_phase(ctx);
        break;
      case State::kInPhase:
        if (walking_) return;
        advance_entries(ctx);
        if (walking_) return;
        // Phase complete: fold the meets into the next mapping right away,
        // so the cut between this phase's meets and barrier-wait meets sits
        // at a point determined by the token stream alone.
        if (phase_ == kPhaseCount) {
          finish_phase(ctx);
          elect(ctx);
          return;
        }
        finish_phase(ctx);
        state_ = State::kAwaitSequence;
        break;
    }
  }
}

void Decider::start_phase(const SharedContext& ctx) {
  const TripleSequence& seq = ctx.sequences[static_cast<std::size_t>(phase_ - 1)];
  if (seq.entry_count() > kMaxLiveEntries)
    throw Error(Code::kBudget, "phase schedule too large to execute");
  if (std::find(seq.universe.begin(), seq.universe.end(), label_) ==
      seq.universe.end())
    throw Error(Code::kProtocol, "own label missing from the phase universe");
  stage_ = 0;
  walking_ = false;
  state_ = State::kInPhase;
  for (MeetRecord& r : barrier_meets_) meets_.push_back(std::move(r));
  barrier_meets_.clear();
}

void Decider::advance_entries(const SharedContext& ctx) {
  const TripleSequence& seq = ctx.sequences[static_cast<std::size_t>(phase_ - 1)];
  std::int64_t k = seq.entry_count();
  while (stage_ < k) {
    int s = static_cast<int>(stage_) + 1;
    auto st = pc_.stage(ctx, label_, s);
    if (!st) {
      stage_ = s;
      continue;
    }
    cur_stage_trail_ = st->stage_trail;
    walk_iter_.emplace(st->walk);
    walk_len_ = st->walk->length;
    walk_done_ = 0;
    if (!walk_iter_->next(next_exit_) || !walk_iter_->next(expected_entry_))
      throw Error(Code::kProtocol, "stage walk ended mid-edge");
    walking_ = true;
    return;
  }
}

void Decider::finish_phase(const SharedContext& ctx) {
  const Label& l = pc_.labels().get(label_);
  BinaryMapping f = l.maps.back();
  for (const MeetRecord& r : meets_) apply_meet_marks(ctx, r, f);
  meets_.clear();
  Label next;
  next.view = l.view;
  next.maps = l.maps;
  next.maps.push_back(std::move(f));
  label_ = pc_.labels().intern(std::move(next));
  phase_ += 1;
}

void Decider::elect(const SharedContext& ctx) {
  elect_action_.kind = Action::Kind::kElect;
  elect_action_.port = -1;
  elect_action_.elect_trail = choose_leader(pc_, ctx, label_);
  state_ = State::kElected;
}

void Decider::apply_meet_marks(const SharedContext& ctx, const MeetRecord& r,
                               BinaryMapping& f) {
  if (r.phase < 1) return;
  if (static_cast<int>(ctx.sequences.size()) < r.phase) return;
  const TripleSequence& seq =
      ctx.sequences[static_cast<std::size_t>(r.phase - 1)];
  int n = pc_.n();
  LabelArena& labels = pc_.labels();

  // Label held during the meet's phase: the record's label trimmed to that
  // phase's mapping count (barrier-wait records carry the updated label).
  const Label& rl = labels.get(r.label);
  if (static_cast<int>(rl.maps.size()) < r.phase) return;
  Label trimmed;
  trimmed.view = rl.view;
  trimmed.maps.assign(rl.maps.begin(), rl.maps.begin() + r.phase);
  LabelId mine = labels.intern(std::move(trimmed));
  ViewRef my_view = labels.get(mine).view;

  auto try_pull = [&](LabelId other, const Trail& anchor) {
    if (static_cast<int>(anchor.size()) > 2 * (n - 1)) return;
    const Label& ol = labels.get(other);
    try {
      Transition tr =
          compute_transition(pc_.views(), my_view, ol.view, anchor, n);
      pull_marks(tr, ol.maps.back(), f, 2 * (n - 1));
    } catch (const Error& e) {
      // A failed structural check means the met agent was not the scheduled
      // partner after all; the direct mark still stands.
      if (e.code != Code::kPrecondition) throw;
    }
  };

  if (r.in_stage) {
    // Mover side: parked partner found exactly at the end of the stage
    // trail. The stage is engaged, the walk position says we are at the
    // trail's end, and the met memory must replay the partner's journey.
    auto st = pc_.stage(ctx, mine, r.stage);
    if (!st) return;
    if (r.walk_elems != st->stage_trail.size()) return;
    RopeRef expect = pc_.journey(ctx, st->partner, r.stage - 1);
    const Label& pl = labels.get(st->partner);
    for (MemRef item : r.items) {
      // A snapshot ending in a bare exit was taken at a midpoint crossing;
      // only an agent observed at the node itself confirms anything.
      if (item && item->token.kind == Token::Kind::kExit) continue;
      RopeRef got = pc_.token_trail(item);
      if (got->length != expect->length) continue;
      if (!rope_equal(got, expect)) continue;
      if (!pc_.walk_matches_view(item, pl.view)) continue;
      auto pos = position_index(my_view, st->stage_trail);
      if (!pos) continue;
      f.set(*pos);
      try_pull(st->partner, reverse_trail(st->stage_trail));
    }
    return;
  }

  if (!r.closed) return;
  // Target side: we sit parked at home and a mover arrives having just
  // finished its stage trail. Its memory must replay some scheduled stage
  // whose target is the label we held: journey(mover, s-1) ++ T'.
  std::int64_t k = seq.entry_count();
  if (k > kMaxLiveEntries)
    throw Error(Code::kBudget, "phase schedule too large to execute");
  for (MemRef item : r.items) {
    if (item && item->token.kind == Token::Kind::kExit) continue;
    RopeRef got = pc_.token_trail(item);
    for (std::int64_t s = 1; s <= k; ++s) {
      SequenceEntry e = seq.entry(s);
      for (int side = 0; side < 2; ++side) {
        LabelId target = (side == 0) ? e.b : e.a;
        LabelId mover = (side == 0) ? e.a : e.b;
        if (target != mine) continue;
        if (side == 1 && e.a == e.b) continue;  // same stage both ways
        const Trail& t = seq.trails[static_cast<std::size_t>(e.trail)];
        Trail tp = (side == 0) ? t : reverse_trail(t);
        RopeRef expect = pc_.ropes().concat(
            pc_.journey(ctx, mover, static_cast<int>(s) - 1),
            pc_.ropes().leaf(tp));
        if (got->length != expect->length) continue;
        if (!rope_equal(got, expect)) continue;
        const Label& ml = labels.get(mover);
        if (!pc_.walk_matches_view(item, ml.view)) continue;
        auto pos = position_index(my_view, reverse_trail(tp));
        if (!pos) continue;
        f.set(*pos);
        try_pull(mover, tp);
      }
    }
  }
}

void Decider::on_token(const Token& t, MemRef after, const SharedContext& ctx) {
  if (t.kind != Token::Kind::kMeet) ensure_ready(ctx);

  switch (t.kind) {
    case Token::Kind::kWake: {
      if (state_ != State::kExploring || !explore_.empty() || view_ != nullptr)
        throw Error(Code::kProtocol, "wake token in a running memory");
      ExploreFrame root;
      root.degree = t.a;
      explore_.push_back(std::move(root));
      if (t.a == 0 || depth_budget_ == 0) {
        // Nothing to explore: the view is the bare root.
        std::vector<ViewChild> none;
        view_ = pc_.views().intern(0, t.a, std::move(none));
        if (depth_budget_ > 0 && t.a > 0)
          throw Error(Code::kProtocol, "unexplorable positive degree");
        explore_.clear();
        label_ = initial_label(pc_.labels(), view_);
        phase_ = 1;
        state_ = State::kAwaitSequence;
      }
      break;
    }

    case Token::Kind::kExit:
      if (half_)
        throw Error(Code::kProtocol, "two exits without an entry");
      if (state_ == State::kExploring && !explore_.empty()) {
        ExploreFrame& top = explore_.back();
        explore_descending_ = top.next_port < top.degree;
        Port want = explore_descending_ ? static_cast<Port>(top.next_port)
                                        : top.entry;
        if (t.a != want)
          throw Error(Code::kProtocol, "exit off the exploration order");
      } else if (state_ == State::kInPhase && walking_) {
        if (t.a != next_exit_)
          throw Error(Code::kProtocol, "exit off the stage walk");
        walk_done_ += 1;
      } else {
        throw Error(Code::kProtocol, "movement token while parked");
      }
      half_ = t.a;
      mid_edge_ = true;
      break;

    case Token::Kind::kEnter: {
      if (!half_)
        throw Error(Code::kProtocol, "entry without a matching exit");
      trail_ = pc_.ropes().concat(trail_, pc_.ropes().leaf(Trail{*half_, t.a}));
      half_.reset();
      mid_edge_ = false;

      if (state_ == State::kExploring) {
        if (explore_descending_) {
          int depth = static_cast<int>(explore_.size());
          ExploreFrame f;
          f.degree = t.b;
          f.entry = t.a;
          f.next_port = (depth == depth_budget_) ? t.b : 0;
          explore_.push_back(std::move(f));
        } else {
          ExploreFrame done = std::move(explore_.back());
          explore_.pop_back();
          ViewRef sub;
          if (static_cast<int>(done.children.size()) < done.degree) {
            std::vector<ViewChild> none;
            sub = pc_.views().intern(0, done.degree, std::move(none));
          } else {
            sub = pc_.views().intern(0, done.degree, std::move(done.children));
          }
          ExploreFrame& parent = explore_.back();
          if (t.a != parent.next_port)
            throw Error(Code::kProtocol, "exploration re-entered off the edge");
          if (t.b != parent.degree)
            throw Error(Code::kProtocol, "node degree changed underfoot");
          parent.children.push_back(ViewChild{done.entry, sub});
          parent.next_port += 1;
          if (explore_.size() == 1 && parent.next_port == parent.degree) {
            view_ = pc_.views().intern(0, parent.degree,
                                       std::move(parent.children));
            explore_.clear();
            label_ = initial_label(pc_.labels(), view_);
            phase_ = 1;
            state_ = State::kAwaitSequence;
          }
        }
      } else if (state_ == State::kInPhase && walking_) {
        if (t.a != expected_entry_)
          throw Error(Code::kProtocol, "stage walk left the schedule");
        walk_done_ += 1;
        if (walk_done_ == walk_len_) {
          walking_ = false;
          walk_iter_.reset();
          stage_ += 1;
        } else {
          if (!walk_iter_->next(next_exit_) || !walk_iter_->next(expected_entry_))
            throw Error(Code::kProtocol, "stage walk ended mid-edge");
        }
      } else {
        throw Error(Code::kProtocol, "movement token while parked");
      }
      break;
    }

    case Token::Kind::kMeet: {
      MeetRecord r;
      r.items = t.meet;
      r.phase = (state_ == State::kAwaitSequence) ? phase_ - 1 : phase_;
      r.in_stage = (state_ == State::kInPhase) && walking_;
      r.stage = r.in_stage ? stage_ + 1 : stage_;
      r.walk_elems = walk_done_;
      r.closed = !walking_ && !mid_edge_ &&
                 (state_ == State::kInPhase || state_ == State::kAwaitSequence);
      r.closed_stage = stage_;
      r.label = label_;
      r.trail = pc_.token_trail(after);
      if (state_ == State::kAwaitSequence)
        barrier_meets_.push_back(std::move(r));
      else
        meets_.push_back(std::move(r));
      break;
    }
  }

  if (t.kind != Token::Kind::kMeet) ensure_ready(ctx);
}

Action Decider::next(const SharedContext& ctx) {
  ensure_ready(ctx);
  Action a;
  switch (state_) {
    case State::kExploring: {
      if (explore_.empty() || mid_edge_) break;  // waiting for wake or entry
      const ExploreFrame& top = explore_.back();
      a.kind = Action::Kind::kExit;
      a.port = (top.next_port < top.degree) ? static_cast<Port>(top.next_port)
                                            : top.entry;
      break;
    }
    case State::kAwaitSequence:
      break;
    case State::kInPhase: {
      if (!walking_ || mid_edge_) break;
      a.kind = Action::Kind::kExit;
      a.port = next_exit_;
      break;
    }
    case State::kElected:
      a = elect_action_;
      break;
  }
  return a;
}

Action decide(MemRef m, const SharedContext& ctx, ProtocolContext& pc) {
  std::vector<MemRef> chain;
  for (MemRef cur = m; cur != nullptr; cur = cur->parent) chain.push_back(cur);
  std::reverse(chain.begin(), chain.end());
  Decider d(pc, 3 * (pc.n() - 1));
  for (MemRef node : chain) d.on_token(node->token, node, ctx);
  return d.next(ctx);
}

}  // namespace anonelect
