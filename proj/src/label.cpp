#include "anonelect/label.hpp"

namespace anonelect {

namespace {

std::uint64_t label_hash(const Label& l) {
  std::uint64_t h = std::hash<const void*>()(l.view);
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  mix(l.maps.size());
  for (const BinaryMapping& m : l.maps) {
    mix(m.n_bits);
    for (std::uint64_t w : m.words) mix(w);
  }
  return h;
}

}  // namespace

LabelId LabelArena::intern(Label l) {
  if (l.view == nullptr)
    throw Error(Error::Code::kPrecondition, "label without a view");
  if (l.maps.empty() || l.maps.size() > 4)
    throw Error(Error::Code::kPrecondition,
                "label must carry between 1 and 4 mappings");
  for (const BinaryMapping& m : l.maps)
    if (m.n_bits != l.view->size)
      throw Error(Error::Code::kPrecondition,
                  "label mapping size does not match the view");
  for (std::size_t i = 1; i < l.maps.size(); ++i)
    if (!l.maps[i - 1].subset_of(l.maps[i]))
      throw Error(Error::Code::kPrecondition,
                  "label mapping chain must be monotone");
  if (!l.maps.front().get(0))
    throw Error(Error::Code::kPrecondition, "label must mark its own root");

  std::uint64_t h = label_hash(l);
  std::lock_guard<std::mutex> lock(mu_);
  auto it = buckets_.find(h);
  if (it != buckets_.end()) {
    for (LabelId id : it->second) {
      const Label& cand = store_[id];
      if (cand.view == l.view && cand.maps == l.maps) return id;
    }
  }
  LabelId id = static_cast<LabelId>(store_.size());
  store_.push_back(std::move(l));
  buckets_[h].push_back(id);
  return id;
}

const Label& LabelArena::get(LabelId id) const {
  std::lock_guard<std::mutex> lock(mu_);
  if (id < 0 || static_cast<std::size_t>(id) >= store_.size())
    throw Error(Error::Code::kPrecondition, "unknown label id");
  return store_[id];
}

int LabelArena::compare(LabelId a, LabelId b) const {
  if (a == b) return 0;
  const Label& la = get(a);
  const Label& lb = get(b);
  if (la.view != lb.view) {
    int c = code_compare_streaming(la.view, lb.view);
    if (c != 0) return c;
  }
  if (la.maps.size() != lb.maps.size())
    return la.maps.size() < lb.maps.size() ? -1 : 1;
  for (std::size_t i = 0; i < la.maps.size(); ++i) {
    auto c = mapping_lex_compare(la.maps[i], lb.maps[i]);
    if (c != 0) return c < 0 ? -1 : 1;
  }
  return 0;
}

LabelId initial_label(LabelArena& labels, ViewRef view) {
  BinaryMapping f1 = BinaryMapping::zeros(view->size);
  f1.set(0);
  return labels.intern(Label{view, {f1}});
}

}  // namespace anonelect
