#include "anonelect/rope.hpp"

namespace anonelect {

namespace {

constexpr std::uint64_t kSat = std::uint64_t(1) << 60;

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return (a >= kSat || b >= kSat || a + b >= kSat) ? kSat : a + b;
}

}  // namespace

std::size_t RopeArena::TrailHash::operator()(const Trail& t) const {
  std::size_t h = t.size();
  for (Port p : t) h ^= std::size_t(p) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

RopeRef RopeArena::store(RopeNode n) {
  store_.push_back(std::move(n));
  return &store_.back();
}

RopeRef RopeArena::empty() {
  std::lock_guard<std::mutex> lock(mu_);
  if (!empty_) empty_ = store(RopeNode{});
  return empty_;
}

RopeRef RopeArena::leaf(Trail t) {
  if (t.size() % 2 != 0)
    throw Error(Error::Code::kPrecondition, "odd-length trail piece");
  if (t.empty()) return empty();
  std::lock_guard<std::mutex> lock(mu_);
  auto it = leaves_.find(t);
  if (it != leaves_.end()) return it->second;
  RopeNode n;
  n.kind = RopeNode::Kind::kLeaf;
  n.length = t.size();
  n.leaf = t;
  RopeRef ref = store(std::move(n));
  leaves_.emplace(std::move(t), ref);
  return ref;
}

RopeRef RopeArena::concat(RopeRef a, RopeRef b) {
  if (a == nullptr || a->length == 0) return b == nullptr ? empty() : b;
  if (b == nullptr || b->length == 0) return a;
  std::lock_guard<std::mutex> lock(mu_);
  auto key = std::make_tuple(0, a, b);
  auto it = composites_.find(key);
  if (it != composites_.end()) return it->second;
  RopeNode n;
  n.kind = RopeNode::Kind::kConcat;
  n.left = a;
  n.right = b;
  n.length = sat_add(a->length, b->length);
  RopeRef ref = store(std::move(n));
  composites_.emplace(key, ref);
  return ref;
}

RopeRef RopeArena::rev(RopeRef a) {
  if (a == nullptr || a->length == 0) return empty();
  if (a->kind == RopeNode::Kind::kRev) return a->left;
  std::lock_guard<std::mutex> lock(mu_);
  auto key = std::make_tuple(1, a, static_cast<RopeRef>(nullptr));
  auto it = composites_.find(key);
  if (it != composites_.end()) return it->second;
  RopeNode n;
  n.kind = RopeNode::Kind::kRev;
  n.left = a;
  n.length = a->length;
  RopeRef ref = store(std::move(n));
  composites_.emplace(key, ref);
  return ref;
}

void RopeIter::push(RopeRef n, bool rev) {
  // Concat children are nonempty by construction.
  while (n->kind != RopeNode::Kind::kLeaf) {
    if (n->kind == RopeNode::Kind::kRev) {
      rev = !rev;
      n = n->left;
      continue;
    }
    pending_.push_back({rev ? n->left : n->right, rev});
    n = rev ? n->right : n->left;
  }
  leaf_ = n;
  leaf_rev_ = rev;
  leaf_pos_ = 0;
}

bool RopeIter::next(Port& out) {
  while (leaf_ == nullptr || leaf_pos_ >= leaf_->leaf.size()) {
    if (pending_.empty()) return false;
    Pending p = pending_.back();
    pending_.pop_back();
    push(p.node, p.rev);
  }
  std::size_t i =
      leaf_rev_ ? leaf_->leaf.size() - 1 - leaf_pos_ : leaf_pos_;
  out = leaf_->leaf[i];
  ++leaf_pos_;
  return true;
}

bool rope_equal(RopeRef a, RopeRef b) {
  std::uint64_t la = a ? a->length : 0;
  std::uint64_t lb = b ? b->length : 0;
  if (la != lb) return false;
  if (a == b) return true;
  if (la >= (std::uint64_t(1) << 60))
    throw Error(Error::Code::kBudget, "rope length saturated; cannot compare");
  RopeIter ia(a), ib(b);
  Port pa = 0, pb = 0;
  while (ia.next(pa)) {
    if (!ib.next(pb) || pa != pb) return false;
  }
  return !ib.next(pb);
}

Trail rope_materialize(RopeRef r, std::uint64_t cap) {
  std::uint64_t len = r ? r->length : 0;
  if (len > cap)
    throw Error(Error::Code::kBudget, "trail too long to materialize");
  Trail out;
  out.reserve(len);
  RopeIter it(r);
  Port p = 0;
  while (it.next(p)) out.push_back(p);
  return out;
}

bool rope_starts_with(RopeRef r, const Trail& t) {
  std::uint64_t len = r ? r->length : 0;
  if (t.size() > len)
    throw Error(Error::Code::kPrecondition, "prefix longer than rope");
  RopeIter it(r);
  Port p = 0;
  for (Port want : t) {
    if (!it.next(p) || p != want) return false;
  }
  return true;
}

}  // namespace anonelect
