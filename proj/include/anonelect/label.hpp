#pragma once

#include <mutex>
#include <unordered_map>
#include <vector>

#include "anonelect/error.hpp"
#include "anonelect/view.hpp"

namespace anonelect {

// An agent's label is its depth-3(n-1) view plus the chain of occupancy
// mappings it has accumulated, one per phase started. The chain is monotone:
// each mapping contains its predecessor. Labels are interned so that
// equality, the phase universe, and per-label memoization are id-based.

struct Label {
  ViewRef view = nullptr;                 // plain truncated view, depth 3(n-1)
  std::vector<BinaryMapping> maps;        // f_1..f_j, j = phase index, j <= 4
};

using LabelId = int;
inline constexpr LabelId kNoLabel = -1;

class LabelArena {
 public:
  // Validates: view set, 1 <= |maps| <= 4, every mapping sized to the view,
  // chain monotone (f_i subset of f_{i+1}), root bit set.
  LabelId intern(Label l);

  const Label& get(LabelId id) const;

  // Lexicographic on the view code, then map count, then mappings bitwise.
  int compare(LabelId a, LabelId b) const;

  std::size_t size() const { return store_.size(); }

 private:
  mutable std::mutex mu_;
  std::vector<Label> store_;
  struct Key {
    ViewRef view;
    std::size_t maps_hash;
  };
  std::unordered_map<std::uint64_t, std::vector<LabelId>> buckets_;
};

// Label of a freshly explored agent: view plus the single mapping that marks
// only the root.
LabelId initial_label(LabelArena& labels, ViewRef view);

}  // namespace anonelect
