#include "anonelect/sim.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <ostream>
#include <utility>

#include "json.hpp"

#include "anonelect/error.hpp"

namespace anonelect {

using Code = Error::Code;
using nlohmann::json;

namespace {

// Every trace line carries the schema version.
std::string traced(json j) {
  j["v"] = 1;
  return j.dump();
}

}  // namespace

Simulation::Simulation(ProtocolContext& pc, const Configuration& g,
                       SimOptions opts)
    : pc_(pc), g_(g), opts_(std::move(opts)), rng_(opts_.seed) {
  if (pc_.n() != g_.bound())
    throw Error(Code::kInvalidInput, "context bound differs from the graph's");
  if (g_.agent_count() < 2)
    throw Error(Code::kProtocol, "a single agent has nobody to elect with");
  ctx_.n = pc_.n();
  for (NodeId v : g_.occupied()) {
    AgentState a;
    a.home = v;
    a.at = v;
    a.decider = std::make_unique<Decider>(pc_, 3 * (pc_.n() - 1));
    agents_.push_back(std::move(a));
  }
  for (int i : opts_.script)
    if (i < 0 || i >= static_cast<int>(agents_.size()))
      throw Error(Code::kInvalidInput, "script names an agent that does not exist");
}

void Simulation::trace_line(const std::string& s) {
  if (opts_.trace) *opts_.trace << s << '\n';
}

void Simulation::append_token(int i, Token t) {
  AgentState& a = agents_[i];
  a.memory = pc_.memories().append(a.memory, std::move(t));
  a.decider->on_token(a.memory->token, a.memory, ctx_);
  if (memory_length(a.memory) > opts_.max_memory_tokens)
    status_ = SimStatus::kMemoryBudget;
}

void Simulation::wake_all() {
  for (int i = 0; i < static_cast<int>(agents_.size()); ++i) {
    int d = g_.degree(agents_[i].home);
    append_token(i, Token::wake(d));
    if (opts_.trace)
      trace_line(traced(json{{"t", tick_}, {"ev", "wake"}, {"agent", i},
                      {"node", agents_[i].home}, {"degree", d}}));
  }
}

void Simulation::try_fix_sequence() {
  if (static_cast<int>(ctx_.sequences.size()) >= kPhaseCount) return;
  int next_phase = static_cast<int>(ctx_.sequences.size()) + 1;
  bool any = false;
  for (const AgentState& a : agents_) {
    if (a.elected) continue;
    if (!a.decider->phase_done() || a.decider->phase() != next_phase) return;
    any = true;
  }
  if (!any) return;
  std::vector<LabelId> universe;
  for (const AgentState& a : agents_)
    if (!a.elected) universe.push_back(a.decider->label());
  std::sort(universe.begin(), universe.end(), [this](LabelId x, LabelId y) {
    return pc_.labels().compare(x, y) < 0;
  });
  universe.erase(std::unique(universe.begin(), universe.end()),
                 universe.end());
  ctx_.sequences.push_back(build_phase_sequence(pc_, universe));
  if (opts_.trace) {
    const TripleSequence& seq = ctx_.sequences.back();
    trace_line(traced(json{{"t", tick_}, {"ev", "phase"}, {"phase", next_phase},
                    {"labels", seq.universe.size()},
                    {"trails", seq.trails.size()},
                    {"entries", seq.entry_count()}}));
  }
}

void Simulation::step_agent(int i) {
  AgentState& a = agents_[i];
  if (a.mid_edge) {
    NodeId far = a.edge_far;
    Port entry = a.edge_entry;
    a.mid_edge = false;
    a.edge_far = -1;
    a.edge_entry = -1;
    a.edge_u = a.edge_v = -1;
    a.at = far;
    a.entered_now = true;
    append_token(i, Token::enter(entry, g_.degree(far)));
    // Meets collected at midpoints ride along and land right after the
    // entry; their snapshots are from the co-location itself.
    std::vector<Token> pending = std::move(a.pending);
    a.pending.clear();
    for (Token& t : pending) append_token(i, std::move(t));
    if (opts_.trace)
      trace_line(traced(json{{"t", tick_}, {"ev", "enter"}, {"agent", i},
                      {"node", far}, {"port", entry}}));
    return;
  }
  Action act = a.decider->next(ctx_);
  if (opts_.capture_decisions)
    decisions_.push_back({tick_, i, a.memory,
                          static_cast<int>(ctx_.sequences.size()), act});
  switch (act.kind) {
    case Action::Kind::kStay:
      break;
    case Action::Kind::kExit: {
      auto [far, entry] = g_.traverse(a.at, act.port);
      append_token(i, Token::exit(act.port));
      a.mid_edge = true;
      a.edge_far = far;
      a.edge_entry = entry;
      a.edge_u = std::min(a.at, far);
      a.edge_v = std::max(a.at, far);
      a.exited_now = true;
      if (opts_.trace)
        trace_line(traced(json{{"t", tick_}, {"ev", "exit"}, {"agent", i},
                        {"node", a.at}, {"port", act.port}}));
      break;
    }
    case Action::Kind::kElect:
      a.elected = true;
      a.elect_action = act;
      if (opts_.trace)
        trace_line(traced(json{{"t", tick_}, {"ev", "elect"}, {"agent", i}}));
      break;
  }
}

void Simulation::deliver_meets() {
  int m = static_cast<int>(agents_.size());
  std::vector<MemRef> snap(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) snap[static_cast<std::size_t>(i)] = agents_[i].memory;

  // Node meetings form when somebody arrives at company. Everybody parked
  // together already met when the last of them arrived, so no fresh arrival
  // means no token; a midpoint occupant does not count as company.
  std::map<NodeId, std::vector<int>> at_node;
  for (int i = 0; i < m; ++i)
    if (!agents_[i].mid_edge) at_node[agents_[i].at].push_back(i);
  for (const auto& [node, group] : at_node) {
    if (group.size() < 2) continue;
    bool fresh = false;
    for (int i : group) fresh = fresh || agents_[i].entered_now;
    if (!fresh) continue;
    for (int i : group) {
      if (agents_[i].elected) continue;
      std::vector<MemRef> items;
      for (int j : group)
        if (j != i) items.push_back(snap[static_cast<std::size_t>(j)]);
      append_token(i, Token::meet_of(pc_.memories().canonical_meet(std::move(items))));
    }
    if (opts_.trace)
      trace_line(traced(json{{"t", tick_}, {"ev", "meet"}, {"where", "node"},
                      {"node", node}, {"agents", group}}));
  }

  // Midpoint meetings form when somebody exits onto an occupied edge. The
  // snapshots are taken now, but a mover only appends the token at its next
  // node entry, so the items of a midpoint meet end in a bare exit.
  std::map<std::pair<NodeId, NodeId>, std::vector<int>> on_edge;
  for (int i = 0; i < m; ++i)
    if (agents_[i].mid_edge)
      on_edge[{agents_[i].edge_u, agents_[i].edge_v}].push_back(i);
  for (const auto& [key, group] : on_edge) {
    if (group.size() < 2) continue;
    bool fresh = false;
    for (int i : group) fresh = fresh || agents_[i].exited_now;
    if (!fresh) continue;
    for (int i : group) {
      std::vector<MemRef> items;
      for (int j : group)
        if (j != i) items.push_back(snap[static_cast<std::size_t>(j)]);
      agents_[i].pending.push_back(
          Token::meet_of(pc_.memories().canonical_meet(std::move(items))));
    }
    if (opts_.trace)
      trace_line(traced(json{{"t", tick_}, {"ev", "meet"}, {"where", "edge"},
                      {"u", key.first}, {"v", key.second},
                      {"agents", group}}));
  }
}

bool Simulation::everyone_elected() const {
  for (const AgentState& a : agents_)
    if (!a.elected) return false;
  return true;
}

int Simulation::pick_serial() {
  int m = static_cast<int>(agents_.size());
  for (int k = 0; k < m; ++k) {
    int i = (serial_active_ + k) % m;
    if (!agents_[i].elected) {
      serial_active_ = i;
      return i;
    }
  }
  return -1;
}

SimStatus Simulation::run(std::uint64_t ticks) {
  if (!woke_) {
    woke_ = true;
    wake_all();
  }
  std::uint64_t done = 0;
  while (status_ == SimStatus::kRunning) {
    if (everyone_elected()) {
      status_ = SimStatus::kElected;
      break;
    }
    if (tick_ >= opts_.max_ticks) {
      status_ = SimStatus::kTickBudget;
      break;
    }
    if (ticks != 0 && done == ticks) break;
    try_fix_sequence();

    std::vector<int> active;
    bool scripted = tick_ < opts_.script.size();
    if (scripted) {
      int i = opts_.script[tick_];
      if (agents_[i].elected)
        throw Error(Code::kInvalidInput, "script activates an elected agent");
      active.push_back(i);
    } else {
      switch (opts_.scheduler) {
        case SchedulerKind::kSynchronous:
          for (int i = 0; i < static_cast<int>(agents_.size()); ++i)
            if (!agents_[i].elected) active.push_back(i);
          break;
        case SchedulerKind::kRandom:
          for (int i = 0; i < static_cast<int>(agents_.size()); ++i) {
            bool pick = (rng_() & 1) != 0;
            if (pick && !agents_[i].elected) active.push_back(i);
          }
          break;
        case SchedulerKind::kSerial: {
          int i = pick_serial();
          if (i >= 0) active.push_back(i);
          break;
        }
      }
    }

    for (AgentState& a : agents_) {
      a.entered_now = false;
      a.exited_now = false;
    }

    struct Before {
      bool mid;
      bool exploring;
      int entry;
      int phase;
    };
    std::vector<Before> before;
    before.reserve(active.size());
    for (int i : active)
      before.push_back({agents_[i].mid_edge, agents_[i].decider->exploring(),
                        agents_[i].decider->entry_index(),
                        agents_[i].decider->phase()});

    // Pending traversals complete before fresh exits, so an agent chasing
    // another into a node observes it there.
    for (std::size_t k = 0; k < active.size(); ++k)
      if (before[k].mid) step_agent(active[k]);
    for (std::size_t k = 0; k < active.size(); ++k)
      if (!before[k].mid) step_agent(active[k]);

    deliver_meets();

    if (!scripted && opts_.scheduler == SchedulerKind::kSerial &&
        !active.empty()) {
      int i = active[0];
      const AgentState& a = agents_[i];
      const Decider& d = *a.decider;
      bool moved = a.entered_now || a.exited_now;
      bool boundary = d.exploring() != before[0].exploring ||
                      d.entry_index() != before[0].entry ||
                      d.phase() != before[0].phase;
      if (!moved || boundary || a.elected)
        serial_active_ = (serial_active_ + 1) % static_cast<int>(agents_.size());
    }

    tick_ += 1;
    done += 1;
  }
  return status_;
}

SimResult Simulation::result() {
  SimResult r;
  r.status = status_;
  r.ticks = tick_;
  r.ctx = ctx_;
  r.decisions = decisions_;
  ConfigWorld w{&g_};
  bool all_elected = true;
  for (const AgentState& a : agents_) {
    r.agents.push_back(a.home);
    r.final_labels.push_back(a.decider->label());
    r.elected.push_back(a.elected);
    r.elect_trails.push_back(a.elected ? a.elect_action.elect_trail : Trail{});
    if (a.elected) {
      auto res = walk_trail(w, a.home, a.elect_action.elect_trail);
      if (!res)
        throw Error(Code::kProtocol, "elected position is not in the graph");
      r.resolved.push_back(*res);
    } else {
      r.resolved.push_back(-1);
      all_elected = false;
    }
  }
  bool consistent = all_elected && !agents_.empty();
  for (std::size_t i = 0; consistent && i < r.resolved.size(); ++i)
    if (r.resolved[i] != r.resolved[0]) consistent = false;
  r.consistent = consistent;
  return r;
}

SimResult simulate(ProtocolContext& pc, const Configuration& g,
                   const SimOptions& opts) {
  Simulation sim(pc, g, opts);
  sim.run(0);
  return sim.result();
}

ReplayReport replay_decisions(ProtocolContext& pc, const SimResult& r) {
  ReplayReport rep;
  for (const DecisionRecord& d : r.decisions) {
    SharedContext c;
    c.n = r.ctx.n;
    c.sequences.assign(r.ctx.sequences.begin(),
                       r.ctx.sequences.begin() + d.fixed_phases);
    Action a = decide(d.memory, c, pc);
    rep.checked += 1;
    if (!(a == d.action)) rep.mismatches += 1;
  }
  return rep;
}

TwinReport twin_experiment(ProtocolContext& pc, const Configuration& g,
                           std::uint64_t rounds, const SimOptions& base) {
  SimOptions opts = base;
  opts.scheduler = SchedulerKind::kSynchronous;
  opts.script.clear();
  Simulation sim(pc, g, opts);

  int m = g.node_count();
  std::map<ViewRef, std::vector<int>> by_view;
  for (int i = 0; i < sim.agent_count(); ++i)
    by_view[enhanced_view(pc.views(), g, sim.home(i), m - 1)].push_back(i);
  std::vector<std::vector<int>> groups;
  for (auto& [view, members] : by_view)
    if (members.size() >= 2) groups.push_back(members);

  TwinReport rep;
  rep.groups = static_cast<int>(groups.size());
  if (groups.empty())
    throw Error(Code::kPrecondition, "no two agents share an enhanced view");
  for (std::uint64_t round = 1; round <= rounds; ++round) {
    SimStatus st = sim.run(2);
    rep.rounds = round;
    rep.status = st;
    for (const auto& grp : groups)
      for (std::size_t k = 1; k < grp.size(); ++k)
        if (sim.memory(grp[k]) != sim.memory(grp[0])) {
          rep.invariant = false;
          if (rep.first_violation_round == 0) rep.first_violation_round = round;
        }
    if (!rep.invariant || st != SimStatus::kRunning) break;
  }
  return rep;
}

TrailConsistencyReport trail_consistency_experiment(ProtocolContext& pc,
                                                    const Configuration& g,
                                                    const SimOptions& base) {
  SimOptions opts = base;
  opts.scheduler = SchedulerKind::kSerial;
  opts.script.clear();
  Simulation sim(pc, g, opts);
  TrailConsistencyReport rep;

  // Exact rope comparisons only when an agent crosses a boundary (stage done,
  // barrier reached, elected); in between, lengths must track the walk.
  std::vector<std::pair<int, int>> last_exact(
      static_cast<std::size_t>(sim.agent_count()), {-1, -1});
  for (;;) {
    SimStatus st = sim.run(1);
    rep.status = st;
    rep.ticks = sim.tick();
    for (int i = 0; i < sim.agent_count(); ++i) {
      const Decider& d = sim.decider(i);
      if (d.label() == kNoLabel) continue;
      if (sim.mid_edge(i)) continue;
      int stage = (d.phase_done() || d.elected()) ? 0 : d.entry_index();
      RopeRef want = pc.journey(sim.ctx(), d.label(), stage);
      if (d.walking() && d.walk_elements_done() > 0) {
        rep.length_checks += 1;
        if (d.trail()->length != want->length + d.walk_elements_done())
          rep.consistent = false;
      } else {
        std::pair<int, int> key{d.phase(), d.entry_index()};
        if (last_exact[static_cast<std::size_t>(i)] == key) continue;
        last_exact[static_cast<std::size_t>(i)] = key;
        rep.checks += 1;
        if (!rope_equal(d.trail(), want)) rep.consistent = false;
      }
    }
    if (!rep.consistent || st != SimStatus::kRunning) break;
  }
  return rep;
}

TunnelReport tunnel_experiment(const Configuration& g, NodeId a_start,
                               const Trail& a_trail, NodeId b_start,
                               const Trail& b_trail,
                               std::uint64_t expected_half_steps) {
  // Position after h half-steps: nodes at even h, edge midpoints at odd h.
  auto positions = [&g](NodeId start, const Trail& t) {
    if (t.size() % 2 != 0)
      throw Error(Code::kInvalidInput, "walk trails pair exits with entries");
    std::vector<std::array<NodeId, 3>> pos;
    NodeId cur = start;
    pos.push_back({0, cur, -1});
    for (std::size_t i = 0; i < t.size(); i += 2) {
      Port p = t[i];
      if (p < 0 || p >= g.degree(cur))
        throw Error(Code::kInvalidInput, "walk trail is not feasible");
      auto [far, q] = g.traverse(cur, p);
      if (q != t[i + 1])
        throw Error(Code::kInvalidInput, "walk trail is not feasible");
      pos.push_back({1, std::min(cur, far), std::max(cur, far)});
      cur = far;
      pos.push_back({0, cur, -1});
    }
    return pos;
  };
  auto pa = positions(a_start, a_trail);
  auto pb = positions(b_start, b_trail);
  std::size_t ha = pa.size() - 1, hb = pb.size() - 1;

  TunnelReport rep;
  rep.expected_half_steps = expected_half_steps;
  std::function<void(std::size_t, std::size_t, std::int64_t)> go =
      [&](std::size_t h1, std::size_t h2, std::int64_t met) {
        if (met < 0 && pa[h1] == pb[h2])
          met = static_cast<std::int64_t>(h1 + h2);
        if (h1 == ha && h2 == hb) {
          rep.interleavings += 1;
          if (met >= 0) {
            rep.met += 1;
            if (expected_half_steps != 0 &&
                static_cast<std::uint64_t>(met) != expected_half_steps)
              rep.all_met_at = false;
          }
          return;
        }
        if (h1 < ha) go(h1 + 1, h2, met);
        if (h2 < hb) go(h1, h2 + 1, met);
      };
  go(0, 0, -1);
  return rep;
}

ExhaustiveReport exhaustive_experiment(const Configuration& g,
                                       const SimOptions& base,
                                       std::uint64_t max_runs) {
  if (max_runs == 0)
    throw Error(Code::kInvalidInput, "at least one run is needed");
  ExhaustiveReport rep;
  int m = g.agent_count();
  std::size_t depth = 0;
  std::uint64_t total = 1;
  // A single agent admits exactly one schedule; branching makes sense only
  // from two agents up (and the loop below would not terminate at m == 1).
  while (m >= 2 && total * static_cast<std::uint64_t>(m) <= max_runs) {
    total *= static_cast<std::uint64_t>(m);
    depth += 1;
  }

  std::vector<int> script;
  std::function<void()> go = [&]() {
    if (rep.runs >= max_runs) {
      rep.capped = true;
      return;
    }
    ProtocolContext pc(g.bound());
    SimOptions opts = base;
    opts.scheduler = SchedulerKind::kSerial;
    opts.script = script;
    Simulation sim(pc, g, opts);
    // run(0) would run to completion; an empty prefix is still "running".
    SimStatus st = script.empty() ? SimStatus::kRunning
                                  : sim.run(script.size());
    if (st == SimStatus::kRunning && script.size() < depth) {
      for (int i = 0; i < m; ++i) {
        if (sim.elected(i)) continue;
        script.push_back(i);
        go();
        script.pop_back();
      }
      return;
    }
    if (st == SimStatus::kRunning) st = sim.run(0);
    SimResult r = sim.result();
    rep.runs += 1;
    ExhaustiveOutcome o{r.status, r.consistent, r.resolved};
    if (std::find(rep.distinct.begin(), rep.distinct.end(), o) ==
        rep.distinct.end())
      rep.distinct.push_back(o);
  };
  go();
  return rep;
}

}  // namespace anonelect
