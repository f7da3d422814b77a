#include "anonelect/memory.hpp"

#include <algorithm>

namespace anonelect {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

std::size_t MemoryArena::Hash::operator()(const MemoryNode* n) const {
  std::size_t h = std::hash<const void*>()(n->parent);
  h = mix(h, static_cast<std::size_t>(n->token.kind));
  h = mix(h, std::size_t(n->token.a));
  h = mix(h, std::size_t(n->token.b));
  for (MemRef m : n->token.meet) h = mix(h, std::hash<const void*>()(m));
  return h;
}

bool MemoryArena::Eq::operator()(const MemoryNode* a,
                                 const MemoryNode* b) const {
  return a->parent == b->parent && a->token == b->token;
}

MemRef MemoryArena::append(MemRef parent, Token t) {
  if (t.kind == Token::Kind::kMeet) {
    for (std::size_t i = 1; i < t.meet.size(); ++i)
      if (compare(t.meet[i - 1], t.meet[i]) >= 0)
        throw Error(Error::Code::kPrecondition,
                    "meet payload must be sorted and deduplicated");
  }
  std::lock_guard<std::mutex> lock(mu_);
  MemoryNode tmp;
  tmp.parent = parent;
  tmp.token = std::move(t);
  auto it = table_.find(&tmp);
  if (it != table_.end()) return *it;
  tmp.length = (parent ? parent->length : 0) + 1;
  tmp.id = store_.size();
  store_.push_back(std::move(tmp));
  MemRef ref = &store_.back();
  table_.insert(ref);
  return ref;
}

int MemoryArena::compare_tokens(const Token& x, const Token& y) {
  auto rank = [](Token::Kind k) { return static_cast<int>(k); };
  if (rank(x.kind) != rank(y.kind)) return rank(x.kind) < rank(y.kind) ? -1 : 1;
  if (x.a != y.a) return x.a < y.a ? -1 : 1;
  if (x.b != y.b) return x.b < y.b ? -1 : 1;
  if (x.meet.size() != y.meet.size())
    return x.meet.size() < y.meet.size() ? -1 : 1;
  for (std::size_t i = 0; i < x.meet.size(); ++i)
    if (int c = compare(x.meet[i], y.meet[i]); c != 0) return c;
  return 0;
}

int MemoryArena::compare(MemRef a, MemRef b) {
  if (a == b) return 0;
  std::uint64_t la = memory_length(a), lb = memory_length(b);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = compare_memo_.find({a, b});
    if (it != compare_memo_.end()) return it->second;
  }
  // Trim the longer chain to the common length, then walk back in lockstep;
  // interning makes pointer equality mean prefix equality, so the last
  // differing pair seen is the first difference from the front.
  MemRef ca = a, cb = b;
  for (std::uint64_t i = la; i > lb; --i) ca = ca->parent;
  for (std::uint64_t i = lb; i > la; --i) cb = cb->parent;
  const Token* ta = nullptr;
  const Token* tb = nullptr;
  while (ca != cb) {
    ta = &ca->token;
    tb = &cb->token;
    ca = ca->parent;
    cb = cb->parent;
  }
  int out;
  if (ta == nullptr) {
    out = la < lb ? -1 : 1;  // one is a proper prefix of the other
  } else {
    out = compare_tokens(*ta, *tb);
  }
  std::lock_guard<std::mutex> lock(mu_);
  compare_memo_[{a, b}] = out;
  compare_memo_[{b, a}] = -out;
  return out;
}

std::vector<MemRef> MemoryArena::canonical_meet(std::vector<MemRef> items) {
  std::sort(items.begin(), items.end(),
            [this](MemRef x, MemRef y) { return compare(x, y) < 0; });
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return items;
}

std::vector<const Token*> memory_tokens(MemRef m) {
  std::vector<const Token*> out;
  for (MemRef cur = m; cur; cur = cur->parent) out.push_back(&cur->token);
  std::reverse(out.begin(), out.end());
  return out;
}

namespace {

void serialize_rec(MemRef m, std::vector<std::int64_t>& out,
                   std::uint64_t cap) {
  std::vector<const Token*> toks = memory_tokens(m);
  for (const Token* t : toks) {
    if (out.size() + 3 > cap)
      throw Error(Error::Code::kBudget, "memory serialization exceeds cap");
    switch (t->kind) {
      case Token::Kind::kWake:
        out.insert(out.end(), {0, t->a});
        break;
      case Token::Kind::kEnter:
        out.insert(out.end(), {1, t->a, t->b});
        break;
      case Token::Kind::kExit:
        out.insert(out.end(), {2, t->a});
        break;
      case Token::Kind::kMeet:
        out.insert(out.end(),
                   {3, static_cast<std::int64_t>(t->meet.size())});
        for (MemRef item : t->meet) serialize_rec(item, out, cap);
        break;
    }
  }
}

}  // namespace

std::vector<std::int64_t> memory_serialize(MemRef m, std::uint64_t cap) {
  std::vector<std::int64_t> out;
  serialize_rec(m, out, cap);
  return out;
}

}  // namespace anonelect
