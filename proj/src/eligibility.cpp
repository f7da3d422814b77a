#include "anonelect/eligibility.hpp"

namespace anonelect {

std::optional<std::pair<NodeId, NodeId>> find_enhanced_twins(
    ViewArena& a, const Configuration& g) {
  int depth = g.node_count() - 1;
  const auto& occ = g.occupied();
  std::vector<ViewRef> views(occ.size());
  for (std::size_t i = 0; i < occ.size(); ++i)
    views[i] = enhanced_view(a, g, occ[i], depth);
  for (std::size_t i = 0; i < occ.size(); ++i)
    for (std::size_t j = i + 1; j < occ.size(); ++j)
      if (views[i] == views[j]) return std::make_pair(occ[i], occ[j]);
  return std::nullopt;
}

std::optional<std::pair<NodeId, NodeId>> find_view_asymmetry(
    ViewArena& a, const Configuration& g) {
  int depth = g.node_count() - 1;
  const auto& occ = g.occupied();
  std::vector<ViewRef> views(occ.size());
  for (std::size_t i = 0; i < occ.size(); ++i)
    views[i] = truncated_view(a, g, occ[i], depth);
  for (std::size_t i = 1; i < occ.size(); ++i)
    if (views[i] != views[0]) return std::make_pair(occ[0], occ[i]);
  return std::nullopt;
}

namespace {

// Walk state of one candidate start while elements stream in. A route trail
// alternates exit and entry ports, so odd positions must confirm the entry
// port of the edge taken at the preceding even position.
struct HalfWalk {
  NodeId at;
  Port pending_entry = -1;  // set between an exit and its entry element
  bool alive = true;
};

bool advance(const Configuration& g, HalfWalk& w, int index, Port element) {
  if (!w.alive) return false;
  if (index % 2 == 0) {
    if (element >= g.degree(w.at)) {
      w.alive = false;
      return false;
    }
    auto [far, entry] = g.traverse(w.at, element);
    w.at = far;
    w.pending_entry = entry;
  } else {
    if (element != w.pending_entry) {
      w.alive = false;
      return false;
    }
    w.pending_entry = -1;
  }
  return true;
}

// Endpoint of the full palindrome from `start`, or nullopt when infeasible.
std::optional<NodeId> palindrome_end(const Configuration& g, NodeId start,
                                     const std::vector<Port>& half) {
  HalfWalk w{start};
  int idx = 0;
  for (Port p : half)
    if (!advance(g, w, idx++, p)) return std::nullopt;
  for (std::size_t i = half.size(); i-- > 0;)
    if (!advance(g, w, idx++, half[i])) return std::nullopt;
  return w.at;
}

bool non_uniform(const Configuration& g, const std::vector<Port>& half) {
  bool meets_other = false;   // some agent's route ends on a different agent
  bool misses = false;        // some feasible route ends unoccupied or at home
  for (NodeId v : g.occupied()) {
    auto end = palindrome_end(g, v, half);
    if (!end) continue;
    if (g.is_occupied(*end) && *end != v)
      meets_other = true;
    else
      misses = true;
    if (meets_other && misses) return true;
  }
  return false;
}

struct GammaSearch {
  const Configuration& g;
  int max_port;
  std::vector<Port> half;
  std::vector<HalfWalk> walks;  // one per occupied start, pruned when dead

  // Depth-first over half-trail elements in lex order, one length at a time
  // so the first hit is canonically minimal (length, then lex; the full
  // trail's lex order agrees with its first half's).
  std::optional<Trail> run(int target_half) {
    walks.clear();
    for (NodeId v : g.occupied()) walks.push_back(HalfWalk{v});
    half.clear();
    return rec(target_half);
  }

  std::optional<Trail> rec(int target_half) {
    if (static_cast<int>(half.size()) == target_half) {
      if (!non_uniform(g, half)) return std::nullopt;
      Trail t(half.begin(), half.end());
      t.insert(t.end(), half.rbegin(), half.rend());
      return t;
    }
    int idx = static_cast<int>(half.size());
    for (Port p = 0; p <= max_port; ++p) {
      std::vector<HalfWalk> saved = walks;
      bool any = false;
      for (HalfWalk& w : walks) any |= advance(g, w, idx, p);
      if (any) {
        half.push_back(p);
        if (auto t = rec(target_half)) return t;
        half.pop_back();
      }
      walks = saved;
    }
    return std::nullopt;
  }
};

}  // namespace

std::optional<Trail> find_non_uniform_palindrome(const Configuration& g,
                                                 int max_half_elements) {
  if (max_half_elements < 1) return std::nullopt;
  GammaSearch search{g, g.bound() - 2, {}, {}};
  if (search.max_port < 0) return std::nullopt;
  for (int h = 1; h <= max_half_elements; ++h)
    if (auto t = search.run(h)) return t;
  return std::nullopt;
}

EligibilityReport check_ec(ViewArena& a, const Configuration& g,
                           const EcOptions& opt) {
  EligibilityReport r;
  r.alpha_twins = find_enhanced_twins(a, g);
  r.alpha = !r.alpha_twins.has_value();

  bool singleton = g.agent_count() == 1;
  bool need_more = r.alpha || opt.evaluate_all;

  if (need_more) {
    r.beta_pair = find_view_asymmetry(a, g);
    r.beta = r.beta_pair.has_value();
  }
  bool decided = !r.alpha || (r.beta && *r.beta);
  if (!decided || opt.evaluate_all) {
    int horizon = opt.max_half_elements >= 0 ? opt.max_half_elements
                                             : 3 * (g.bound() - 1);
    r.gamma_trail = find_non_uniform_palindrome(g, horizon);
    r.gamma = r.gamma_trail.has_value();
  }

  if (singleton) {
    r.verdict = EcVerdict::kTriviallyEligibleSingleton;
  } else {
    bool elig = r.alpha && ((r.beta && *r.beta) || (r.gamma && *r.gamma));
    r.verdict = elig ? EcVerdict::kEligible : EcVerdict::kNotEligible;
  }
  return r;
}

}  // namespace anonelect
