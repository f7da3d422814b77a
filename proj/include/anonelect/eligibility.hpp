#pragma once

#include <optional>
#include <utility>

#include "anonelect/graph.hpp"
#include "anonelect/view.hpp"

namespace anonelect {

// A configuration admits leader election iff the occupied nodes all look
// different once occupancy marks are taken into account (alpha), and on top
// of that either some two agents already see different unmarked views (beta)
// or some palindromic trail treats the agents non-uniformly (gamma). The
// checker below evaluates that characterization directly from the ground
// truth; it shares no reasoning with the protocol, which is the point of
// cross-validating the two.

enum class EcVerdict { kEligible, kNotEligible, kTriviallyEligibleSingleton };

struct EligibilityReport {
  EcVerdict verdict = EcVerdict::kNotEligible;
  bool alpha = false;                  // enhanced views pairwise distinct
  std::optional<bool> beta;            // some two plain views differ
  std::optional<bool> gamma;           // nullopt = not evaluated
  std::optional<std::pair<NodeId, NodeId>> alpha_twins;  // equal enhanced views
  std::optional<std::pair<NodeId, NodeId>> beta_pair;    // differing plain views
  std::optional<Trail> gamma_trail;    // canonically first witness

  bool eligible() const { return verdict != EcVerdict::kNotEligible; }
};

struct EcOptions {
  // Evaluate every clause even after the verdict is already determined.
  bool evaluate_all = false;
  // Gamma searches palindromes of total length up to twice this element
  // count; -1 means the standard horizon 3(n-1).
  int max_half_elements = -1;
};

// Equal pair of depth-(|nodes|-1) enhanced views, if any.
std::optional<std::pair<NodeId, NodeId>> find_enhanced_twins(
    ViewArena& a, const Configuration& g);

// Pair of agents whose plain depth-(|nodes|-1) views differ, if any.
std::optional<std::pair<NodeId, NodeId>> find_view_asymmetry(
    ViewArena& a, const Configuration& g);

// First (length, then lex) palindromic trail with terms < n-1 and length in
// [2, 2*max_half_elements] such that some agent's route along it ends on a
// different agent while some agent's route is feasible but ends unoccupied
// or back at its own start.
std::optional<Trail> find_non_uniform_palindrome(const Configuration& g,
                                                 int max_half_elements);

EligibilityReport check_ec(ViewArena& a, const Configuration& g,
                           const EcOptions& opt = {});

}  // namespace anonelect
