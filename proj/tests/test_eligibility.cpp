#include <optional>
#include <variant>
#include <vector>

#include "anonelect/corpus.hpp"
#include "anonelect/eligibility.hpp"
#include "anonelect/graph.hpp"
#include "anonelect/view.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace anonelect;

namespace {

// Independent witness validation straight from route semantics: the trail is
// an even palindrome whose ports stay below bound-1, some agent's route along
// it ends on a different agent, and some agent's route is feasible but ends
// unoccupied or back at its own start.
bool witness_holds(const Configuration& g, const Trail& t) {
  if (t.empty() || t.size() % 2 != 0) return false;
  if (!is_palindrome(t)) return false;
  for (Port p : t)
    if (p < 0 || p >= g.bound() - 1) return false;
  bool meets = false;
  bool misses = false;
  for (NodeId v : g.occupied()) {
    RouteResult r = route_from_trail(g, v, t);
    if (!feasible(r)) continue;
    NodeId end = std::get<Route>(r).end();
    if (g.is_occupied(end) && end != v)
      meets = true;
    else
      misses = true;
  }
  return meets && misses;
}

// Exhaustive first witness by half-trail odometer in (length, lex) order.
std::optional<Trail> naive_gamma(const Configuration& g, int max_half) {
  int max_port = g.bound() - 2;
  if (max_port < 0) return std::nullopt;
  for (int h = 1; h <= max_half; ++h) {
    std::vector<Port> half(h, 0);
    while (true) {
      Trail t(half.begin(), half.end());
      t.insert(t.end(), half.rbegin(), half.rend());
      if (witness_holds(g, t)) return t;
      int i = h - 1;
      while (i >= 0 && half[i] == max_port) half[i--] = 0;
      if (i < 0) break;
      ++half[i];
    }
  }
  return std::nullopt;
}

}  // namespace

TEST_SUITE_BEGIN("eligibility");

TEST_CASE("two mutually facing agents cannot elect") {
  ViewArena arena;
  Configuration g = fixtures::k2();
  EligibilityReport r = check_ec(arena, g, {.evaluate_all = true});
  CHECK(r.verdict == EcVerdict::kNotEligible);
  CHECK_FALSE(r.eligible());
  CHECK_FALSE(r.alpha);
  REQUIRE(r.alpha_twins.has_value());
  CHECK(*r.alpha_twins == std::pair<NodeId, NodeId>{0, 1});
  REQUIRE(r.beta.has_value());
  CHECK_FALSE(*r.beta);
  REQUIRE(r.gamma.has_value());
  CHECK_FALSE(*r.gamma);
  CHECK_FALSE(r.beta_pair.has_value());
  CHECK_FALSE(r.gamma_trail.has_value());
}

TEST_CASE("path ends with different views elect through beta") {
  ViewArena arena;
  Configuration g = fixtures::p3();
  EligibilityReport r = check_ec(arena, g, {.evaluate_all = true});
  CHECK(r.verdict == EcVerdict::kEligible);
  CHECK(r.alpha);
  CHECK_FALSE(r.alpha_twins.has_value());
  REQUIRE(r.beta.has_value());
  CHECK(*r.beta);
  REQUIRE(r.beta_pair.has_value());
  CHECK(*r.beta_pair == std::pair<NodeId, NodeId>{0, 2});
  REQUIRE(r.gamma.has_value());
  CHECK_FALSE(*r.gamma);
}

TEST_CASE("fully occupied oriented rings are blind") {
  for (int k = 3; k <= 6; ++k) {
    CAPTURE(k);
    ViewArena arena;
    Configuration g = fixtures::oriented_ring_full(k);
    EligibilityReport r = check_ec(arena, g, {.evaluate_all = true});
    CHECK(r.verdict == EcVerdict::kNotEligible);
    CHECK_FALSE(r.alpha);
    CHECK(r.alpha_twins.has_value());
    CHECK_FALSE(*r.beta);
    CHECK_FALSE(*r.gamma);
  }
}

TEST_CASE("one reversed ring edge restores eligibility") {
  ViewArena arena;
  Configuration g = fixtures::almost_oriented_ring5();
  EligibilityReport r = check_ec(arena, g);
  CHECK(r.verdict == EcVerdict::kEligible);
  CHECK(r.alpha);
  REQUIRE(r.beta.has_value());
  CHECK(*r.beta);
  CHECK(r.beta_pair.has_value());
}

TEST_CASE("a lone agent is trivially eligible") {
  ViewArena arena;
  EligibilityReport k1 = check_ec(arena, fixtures::k1());
  CHECK(k1.verdict == EcVerdict::kTriviallyEligibleSingleton);
  CHECK(k1.eligible());
  CHECK(k1.alpha);

  Configuration lone(2, 2, {{0, 0, 1, 0}}, {0});
  EligibilityReport r = check_ec(arena, lone);
  CHECK(r.verdict == EcVerdict::kTriviallyEligibleSingleton);
  CHECK(r.eligible());
}

TEST_CASE("palindrome clause separates look-alike agents") {
  // Alternating-port four-cycle, three agents: every plain view is equal, so
  // beta fails, yet the trail (0,0) reaches another agent from two of the
  // starts and an empty node from the third.
  ViewArena arena;
  Configuration g = fixtures::anti_oriented_c4();
  EligibilityReport r = check_ec(arena, g, {.evaluate_all = true});
  CHECK(r.verdict == EcVerdict::kEligible);
  CHECK(r.alpha);
  REQUIRE(r.beta.has_value());
  CHECK_FALSE(*r.beta);
  REQUIRE(r.gamma.has_value());
  CHECK(*r.gamma);
  REQUIRE(r.gamma_trail.has_value());
  CHECK(*r.gamma_trail == Trail{0, 0});
  CHECK(witness_holds(g, *r.gamma_trail));

  // The same ring fully occupied folds onto itself and loses alpha.
  Configuration full = fixtures::anti_oriented_c4({0, 1, 2, 3});
  EligibilityReport rf = check_ec(arena, full);
  CHECK(rf.verdict == EcVerdict::kNotEligible);
  CHECK_FALSE(rf.alpha);
}

TEST_CASE("mirror-symmetric path yields the first palindrome witness") {
  Configuration g = fixtures::p4_symmetric({0, 1, 2});
  std::optional<Trail> w = find_non_uniform_palindrome(g, 3 * (g.bound() - 1));
  REQUIRE(w.has_value());
  CHECK(*w == Trail{0, 0});
  CHECK(witness_holds(g, *w));
  CHECK(find_non_uniform_palindrome(g, 1) == Trail{0, 0});
  CHECK_FALSE(find_non_uniform_palindrome(g, 0).has_value());

  ViewArena arena;
  EligibilityReport r = check_ec(arena, g, {.evaluate_all = true});
  CHECK(r.verdict == EcVerdict::kEligible);
  CHECK(r.alpha);
  CHECK(*r.beta);  // a degree-1 end faces a degree-2 middle
  CHECK(*r.gamma);
  CHECK(r.gamma_trail == Trail{0, 0});
}

TEST_CASE("clause helpers agree with the report fields") {
  ViewArena arena;
  std::vector<Configuration> gs = {
      fixtures::k2(),           fixtures::p3(),
      fixtures::p3({0, 1}),     fixtures::anti_oriented_c4(),
      fixtures::oriented_ring_full(4), fixtures::p4_symmetric({0, 1, 2}),
      fixtures::almost_oriented_ring5()};
  for (const Configuration& g : gs) {
    EligibilityReport r = check_ec(arena, g, {.evaluate_all = true});
    CHECK(find_enhanced_twins(arena, g) == r.alpha_twins);
    CHECK(find_view_asymmetry(arena, g) == r.beta_pair);
    CHECK(r.alpha == !r.alpha_twins.has_value());
    CHECK(*r.beta == r.beta_pair.has_value());
    CHECK(*r.gamma == r.gamma_trail.has_value());
  }
}

namespace {

void check_identity(const Configuration& g) {
  ViewArena arena;
  EligibilityReport r = check_ec(arena, g, {.evaluate_all = true});

  bool singleton = g.agent_count() == 1;
  bool clause = r.alpha && (*r.beta || *r.gamma);
  if (singleton) {
    CHECK(r.verdict == EcVerdict::kTriviallyEligibleSingleton);
  } else {
    CHECK(r.verdict ==
          (clause ? EcVerdict::kEligible : EcVerdict::kNotEligible));
  }

  int depth = g.node_count() - 1;
  if (r.alpha_twins) {
    auto [u, v] = *r.alpha_twins;
    CHECK(u != v);
    CHECK(enhanced_view(arena, g, u, depth) ==
          enhanced_view(arena, g, v, depth));
  } else {
    for (std::size_t i = 0; i < g.occupied().size(); ++i)
      for (std::size_t j = i + 1; j < g.occupied().size(); ++j)
        CHECK(enhanced_view(arena, g, g.occupied()[i], depth) !=
              enhanced_view(arena, g, g.occupied()[j], depth));
  }
  if (r.beta_pair) {
    auto [u, v] = *r.beta_pair;
    CHECK(truncated_view(arena, g, u, depth) !=
          truncated_view(arena, g, v, depth));
  } else {
    for (NodeId v : g.occupied())
      CHECK(truncated_view(arena, g, v, depth) ==
            truncated_view(arena, g, g.occupied()[0], depth));
  }

  int horizon = 3 * (g.bound() - 1);
  std::optional<Trail> naive = naive_gamma(g, horizon);
  CHECK(r.gamma_trail == naive);
  if (r.gamma_trail) CHECK(witness_holds(g, *r.gamma_trail));
}

}  // namespace

TEST_CASE("verdict identity and witnesses across the small corpus") {
  int checked = 0;
  int eligible = 0;
  enumerate_configurations(
      EnumerateOptions{.max_nodes = 3, .min_nodes = 1, .min_agents = 1},
      [&](const Configuration& g) {
        ++checked;
        check_identity(g);
        if (g.agent_count() > 1) {
          ViewArena arena;
          if (check_ec(arena, g).eligible()) ++eligible;
        }
      });
  CHECK(checked == 20);  // one, two and three node configurations combined
  CHECK(eligible == 8);  // multi-agent eligible count up to three nodes
}

TEST_CASE("verdict identity sampled at four nodes") {
  int seen = 0;
  int sampled = 0;
  enumerate_configurations(
      EnumerateOptions{.max_nodes = 4, .min_nodes = 4, .min_agents = 1},
      [&](const Configuration& g) {
        if (seen++ % 37 == 0) {
          ++sampled;
          check_identity(g);
        }
      });
  CHECK(sampled > 20);
}

TEST_SUITE_END();
