#include "anonelect/view.hpp"

#include <algorithm>
#include <bit>
#include <functional>

namespace anonelect {

namespace {

// Sizes and code lengths saturate well below overflow; positions are only
// indexed when exact.
constexpr std::uint64_t kSat = std::uint64_t(1) << 60;

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return (a >= kSat || b >= kSat || a + b >= kSat) ? kSat : a + b;
}

std::size_t mix(std::size_t h, std::size_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

std::size_t ViewArena::Hash::operator()(const ViewNode* n) const {
  std::size_t h = mix(n->mark, std::size_t(n->degree));
  for (const ViewChild& c : n->children) {
    h = mix(h, std::size_t(c.entry));
    h = mix(h, std::hash<const void*>()(c.node));
  }
  return h;
}

bool ViewArena::Eq::operator()(const ViewNode* a, const ViewNode* b) const {
  return a->mark == b->mark && a->degree == b->degree &&
         a->children == b->children;
}

ViewRef ViewArena::intern(std::uint8_t mark, int degree,
                          std::vector<ViewChild> children) {
  if (degree < 0)
    throw Error(Error::Code::kPrecondition, "negative degree");
  if (!children.empty() && static_cast<int>(children.size()) != degree)
    throw Error(Error::Code::kPrecondition,
                "internal view node must have one child per port");
  ViewNode tmp;
  tmp.mark = mark;
  tmp.degree = degree;
  tmp.children = std::move(children);
  if (!tmp.children.empty()) {
    int child_depth = tmp.children[0].node->depth;
    for (const ViewChild& c : tmp.children) {
      if (c.node->depth != child_depth)
        throw Error(Error::Code::kPrecondition,
                    "view leaves must sit at a single depth");
      if (c.entry < 0 || c.entry >= c.node->degree)
        throw Error(Error::Code::kPrecondition,
                    "entry port not present at child");
    }
    tmp.depth = child_depth + 1;
    tmp.size = 1;
    tmp.code_len = 0;
    for (const ViewChild& c : tmp.children) {
      tmp.size = sat_add(tmp.size, c.node->size);
      std::uint64_t body = c.node->depth == 0 ? 1 : c.node->code_len;
      tmp.code_len = sat_add(tmp.code_len, sat_add(4, body));
    }
  }

  std::lock_guard<std::mutex> lock(mu_);
  auto it = table_.find(&tmp);
  if (it != table_.end()) return *it;
  store_.push_back(std::move(tmp));
  ViewRef ref = &store_.back();
  table_.insert(ref);
  return ref;
}

ViewRef ViewArena::truncate(ViewRef v, int k) {
  if (k < 0) throw Error(Error::Code::kPrecondition, "negative depth");
  if (k >= v->depth) return v;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = trunc_memo_.find(v);
    if (it != trunc_memo_.end()) {
      auto jt = it->second.find(k);
      if (jt != it->second.end()) return jt->second;
    }
  }
  ViewRef out;
  if (k == 0) {
    out = intern(v->mark, v->degree, {});
  } else {
    std::vector<ViewChild> kids;
    kids.reserve(v->children.size());
    for (const ViewChild& c : v->children)
      kids.push_back({c.entry, truncate(c.node, k - 1)});
    out = intern(v->mark, v->degree, std::move(kids));
  }
  std::lock_guard<std::mutex> lock(mu_);
  trunc_memo_[v][k] = out;
  return out;
}

namespace {

ViewRef build_levels(ViewArena& a, const Configuration& g, NodeId v, int l,
                     bool marked) {
  if (l < 0) throw Error(Error::Code::kPrecondition, "negative depth");
  int m = g.node_count();
  auto mark_of = [&](NodeId u) -> std::uint8_t {
    return marked && g.is_occupied(u) ? 1 : 0;
  };
  std::vector<ViewRef> prev(m);
  for (NodeId u = 0; u < m; ++u)
    prev[u] = a.intern(mark_of(u), g.degree(u), {});
  for (int d = 1; d <= l; ++d) {
    std::vector<ViewRef> cur(m);
    for (NodeId u = 0; u < m; ++u) {
      std::vector<ViewChild> kids(g.degree(u));
      for (Port p = 0; p < g.degree(u); ++p) {
        auto [w, q] = g.traverse(u, p);
        kids[p] = {q, prev[w]};
      }
      cur[u] = a.intern(mark_of(u), g.degree(u), std::move(kids));
    }
    prev = std::move(cur);
  }
  return prev[v];
}

}  // namespace

ViewRef truncated_view(ViewArena& a, const Configuration& g, NodeId v, int l) {
  return build_levels(a, g, v, l, false);
}

ViewRef enhanced_view(ViewArena& a, const Configuration& g, NodeId v, int l) {
  return build_levels(a, g, v, l, true);
}

namespace {

void dfs_trail_rec(ViewRef v, Trail& out) {
  for (const ViewChild& c : v->children) {
    Port p = static_cast<Port>(&c - v->children.data());
    out.push_back(p);
    out.push_back(c.entry);
    dfs_trail_rec(c.node, out);
    out.push_back(c.entry);
    out.push_back(p);
  }
}

void code_rec(ViewRef v, std::vector<int>& out) {
  for (std::size_t i = 0; i < v->children.size(); ++i) {
    const ViewChild& c = v->children[i];
    out.push_back(static_cast<int>(i));
    out.push_back(c.entry);
    if (c.node->depth == 0)
      out.push_back(c.node->degree);
    else
      code_rec(c.node, out);
    out.push_back(c.entry);
    out.push_back(static_cast<int>(i));
  }
}

// Element-by-element generator for the code of a view.
class CodeStream {
 public:
  explicit CodeStream(ViewRef root) {
    if (root->depth > 0 && root->degree > 0) stack_.push_back({root, 0, kDownP});
  }

  // Returns false when exhausted.
  bool next(int& out) {
    while (!stack_.empty()) {
      Frame& f = stack_.back();
      const ViewChild& c = f.node->children[f.child];
      switch (f.stage) {
        case kDownP:
          out = f.child;
          f.stage = kDownQ;
          return true;
        case kDownQ:
          out = c.entry;
          f.stage = kBody;
          return true;
        case kBody:
          if (c.node->depth == 0) {
            out = c.node->degree;
            f.stage = kUpQ;
            return true;
          }
          f.stage = kUpQ;
          stack_.push_back({c.node, 0, kDownP});
          continue;
        case kUpQ:
          out = c.entry;
          f.stage = kUpP;
          return true;
        case kUpP: {
          out = f.child;
          ++f.child;
          f.stage = kDownP;
          if (f.child == static_cast<int>(f.node->children.size()))
            stack_.pop_back();
          return true;
        }
      }
    }
    return false;
  }

 private:
  enum Stage { kDownP, kDownQ, kBody, kUpQ, kUpP };
  struct Frame {
    ViewRef node;
    int child;
    Stage stage;
  };
  std::vector<Frame> stack_;
};

}  // namespace

Trail view_dfs_trail(ViewRef v) {
  Trail out;
  dfs_trail_rec(v, out);
  return out;
}

std::vector<int> view_code(ViewRef v) {
  if (v->code_len >= kSat)
    throw Error(Error::Code::kBudget, "view code too large to materialize");
  std::vector<int> out;
  out.reserve(v->code_len);
  code_rec(v, out);
  return out;
}

int code_compare_streaming(ViewRef a, ViewRef b) {
  CodeStream sa(a), sb(b);
  int ea = 0, eb = 0;
  while (true) {
    bool ha = sa.next(ea);
    bool hb = sb.next(eb);
    if (!ha && !hb) return 0;
    if (!ha) return -1;  // shorter with equal prefix orders first
    if (!hb) return 1;
    if (ea != eb) return ea < eb ? -1 : 1;
  }
}

namespace {

struct CodeParser {
  const std::vector<int>& c;
  ViewArena& arena;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& why) {
    throw Error(Error::Code::kInvalidInput,
                "not a view code (element " + std::to_string(pos) + "): " + why);
  }
  int peek() {
    if (pos >= c.size()) fail("unexpected end");
    return c[pos];
  }
  int take() {
    int v = peek();
    ++pos;
    return v;
  }

  // One child edge: down pair, body, return pair.
  ViewChild parse_edge(int expected_p) {
    if (take() != expected_p) fail("children must use consecutive ports");
    int q = take();
    if (q < 0) fail("negative port");
    ViewRef child;
    int e = peek();
    if (e < 0) fail("negative element");
    if (e >= 1) {
      int deg = take();  // frontier: degree is emitted in place of a body
      if (q >= deg) fail("entry port not present at frontier node");
      child = arena.intern(0, deg, {});
    } else {
      child = parse_internal(q);
      if (q >= child->degree) fail("entry port not present at child");
    }
    if (take() != q) fail("return pair must repeat the entry port");
    if (take() != expected_p) fail("return pair must repeat the exit port");
    return {q, child};
  }

  // Children of an internal node entered via q_entry; stops before the
  // enclosing return pair. An up move can only start with q_entry, and
  // q_entry is always smaller than the next unseen child port, so the
  // dispatch below is unambiguous.
  ViewRef parse_internal(int q_entry) {
    std::vector<ViewChild> kids;
    int next_p = 0;
    while (true) {
      int e = peek();
      if (e == next_p) {
        kids.push_back(parse_edge(next_p));
        ++next_p;
      } else if (e == q_entry && q_entry < next_p) {
        break;
      } else {
        fail("expected next child port or return pair");
      }
    }
    return arena.intern(0, next_p, std::move(kids));
  }
};

}  // namespace

ViewRef decode_code(ViewArena& a, const std::vector<int>& code) {
  if (code.empty()) return a.intern(0, 0, {});
  CodeParser p{code, a};
  std::vector<ViewChild> kids;
  int next_p = 0;
  while (p.pos < code.size()) {
    if (p.peek() != next_p) p.fail("root children must use consecutive ports");
    kids.push_back(p.parse_edge(next_p));
    ++next_p;
  }
  return a.intern(0, next_p, std::move(kids));
}

ViewRef node_at_trail_end(ViewRef v, const Trail& t) {
  if (t.size() % 2 != 0) return nullptr;
  ViewRef cur = v;
  for (std::size_t i = 0; i < t.size(); i += 2) {
    if (cur->children.empty()) return nullptr;
    Port p = t[i];
    if (p < 0 || p >= cur->degree) return nullptr;
    const ViewChild& c = cur->children[p];
    if (c.entry != t[i + 1]) return nullptr;
    cur = c.node;
  }
  return cur;
}

std::uint64_t position_count_to_depth(ViewRef v, int k) {
  if (k < 0) return 0;
  if (k >= v->depth) return v->size;
  std::uint64_t total = 1;
  if (k > 0)
    for (const ViewChild& c : v->children)
      total = sat_add(total, position_count_to_depth(c.node, k - 1));
  return total;
}

std::optional<std::uint64_t> position_index(ViewRef v, const Trail& t) {
  if (t.size() % 2 != 0) return std::nullopt;
  std::uint64_t idx = 0;
  ViewRef cur = v;
  for (std::size_t i = 0; i < t.size(); i += 2) {
    if (cur->children.empty()) return std::nullopt;
    Port p = t[i];
    if (p < 0 || p >= cur->degree) return std::nullopt;
    if (cur->children[p].entry != t[i + 1]) return std::nullopt;
    idx += 1;
    for (Port q = 0; q < p; ++q) {
      std::uint64_t s = cur->children[q].node->size;
      if (s >= kSat)
        throw Error(Error::Code::kBudget, "view too large for indexing");
      idx += s;
    }
    cur = cur->children[p].node;
  }
  return idx;
}

BinaryMapping BinaryMapping::zeros(std::uint64_t bits) {
  BinaryMapping m;
  m.n_bits = bits;
  m.words.assign((bits + 63) / 64, 0);
  return m;
}

bool BinaryMapping::subset_of(const BinaryMapping& o) const {
  if (n_bits != o.n_bits) return false;
  for (std::size_t i = 0; i < words.size(); ++i)
    if (words[i] & ~o.words[i]) return false;
  return true;
}

std::uint64_t BinaryMapping::count() const {
  std::uint64_t c = 0;
  for (std::uint64_t w : words) c += std::popcount(w);
  return c;
}

std::strong_ordering mapping_lex_compare(const BinaryMapping& a,
                                         const BinaryMapping& b) {
  std::uint64_t common = std::min(a.n_bits, b.n_bits);
  std::size_t full = common / 64;
  for (std::size_t i = 0; i < full; ++i) {
    if (a.words[i] != b.words[i]) {
      int j = std::countr_zero(a.words[i] ^ b.words[i]);
      return ((a.words[i] >> j) & 1) ? std::strong_ordering::greater
                                     : std::strong_ordering::less;
    }
  }
  for (std::uint64_t i = full * 64; i < common; ++i) {
    bool ba = a.get(i), bb = b.get(i);
    if (ba != bb) return ba ? std::strong_ordering::greater
                            : std::strong_ordering::less;
  }
  return a.n_bits <=> b.n_bits;
}

namespace {

void ground_truth_rec(const Configuration& g, NodeId u, int depth,
                      BinaryMapping& m, std::uint64_t& cursor) {
  if (g.is_occupied(u)) m.set(cursor);
  ++cursor;
  if (depth == 0) return;
  for (Port p = 0; p < g.degree(u); ++p)
    ground_truth_rec(g, g.traverse(u, p).first, depth - 1, m, cursor);
}

std::uint64_t tree_positions(const Configuration& g, NodeId u, int depth) {
  std::uint64_t total = 1;
  if (depth > 0)
    for (Port p = 0; p < g.degree(u); ++p)
      total =
          sat_add(total, tree_positions(g, g.traverse(u, p).first, depth - 1));
  return total;
}

}  // namespace

BinaryMapping ground_truth_mapping(const Configuration& g, NodeId v, int l) {
  std::uint64_t n = tree_positions(g, v, l);
  if (n >= kSat)
    throw Error(Error::Code::kBudget, "view too large for a materialized mapping");
  BinaryMapping m = BinaryMapping::zeros(n);
  std::uint64_t cursor = 0;
  ground_truth_rec(g, v, l, m, cursor);
  return m;
}

namespace {

void depth_mask_rec(ViewRef v, int k, std::uint64_t base, BinaryMapping& m) {
  m.set(base);
  if (k == 0) return;
  std::uint64_t off = base + 1;
  for (const ViewChild& c : v->children) {
    depth_mask_rec(c.node, k - 1, off, m);
    off += c.node->size;
  }
}

}  // namespace

BinaryMapping depth_mask(ViewRef v, int k) {
  if (v->size >= kSat)
    throw Error(Error::Code::kBudget, "view too large for a materialized mapping");
  BinaryMapping m = BinaryMapping::zeros(v->size);
  if (k >= 0) depth_mask_rec(v, k, 0, m);
  return m;
}

namespace {

ViewRef apply_rec(ViewArena& a, ViewRef v, const BinaryMapping& m,
                  std::uint64_t base) {
  std::uint8_t mark = m.get(base) ? 1 : 0;
  if (v->children.empty()) return a.intern(mark, v->degree, {});
  std::vector<ViewChild> kids;
  kids.reserve(v->children.size());
  std::uint64_t off = base + 1;
  for (const ViewChild& c : v->children) {
    kids.push_back({c.entry, apply_rec(a, c.node, m, off)});
    off += c.node->size;
  }
  return a.intern(mark, v->degree, std::move(kids));
}

void collect_marks_rec(ViewRef v, std::uint64_t base, BinaryMapping& m) {
  if (v->mark) m.set(base);
  std::uint64_t off = base + 1;
  for (const ViewChild& c : v->children) {
    collect_marks_rec(c.node, off, m);
    off += c.node->size;
  }
}

}  // namespace

ViewRef apply_mapping(ViewArena& a, ViewRef v, const BinaryMapping& m) {
  if (m.n_bits != v->size)
    throw Error(Error::Code::kPrecondition,
                "mapping size does not match view position count");
  return apply_rec(a, v, m, 0);
}

BinaryMapping mapping_of_marked_view(ViewRef v) {
  if (v->size >= kSat)
    throw Error(Error::Code::kBudget, "view too large for a materialized mapping");
  BinaryMapping m = BinaryMapping::zeros(v->size);
  collect_marks_rec(v, 0, m);
  return m;
}

std::strong_ordering identifier_compare(const CompleteIdentifier& a,
                                        const CompleteIdentifier& b) {
  if (auto c = std::lexicographical_compare_three_way(
          a.code.begin(), a.code.end(), b.code.begin(), b.code.end());
      c != 0)
    return c;
  return mapping_lex_compare(a.marks, b.marks);
}

CompleteIdentifier complete_identifier(ViewArena& a, const Configuration& g,
                                       NodeId v) {
  int depth = g.node_count() - 1;
  ViewRef view = truncated_view(a, g, v, depth);
  return {view_code(view), ground_truth_mapping(g, v, depth)};
}

namespace {

// Map from every depth-(n-1) subtree occurring at tree depth <= depth(home)-n
// to its depth-n extension. Well-defined for genuine views of graphs with at
// most n nodes; conflicts mean the input is not such a view.
std::unordered_map<ViewRef, ViewRef> build_successor_map(ViewArena& a,
                                                         ViewRef home, int n) {
  std::unordered_map<ViewRef, ViewRef> succ;
  std::unordered_set<ViewRef> seen;
  std::vector<ViewRef> stack{home};
  while (!stack.empty()) {
    ViewRef v = stack.back();
    stack.pop_back();
    if (!seen.insert(v).second) continue;
    if (v->depth >= n) {
      ViewRef key = a.truncate(v, n - 1);
      ViewRef val = a.truncate(v, n);
      auto [it, fresh] = succ.insert({key, val});
      if (!fresh && it->second != val)
        throw Error(Error::Code::kPrecondition,
                    "view is not consistent with any graph of the given bound");
      for (const ViewChild& c : v->children) stack.push_back(c.node);
    }
  }
  return succ;
}

}  // namespace

ViewWalker::ViewWalker(ViewArena& a, ViewRef home, int n)
    : arena_(&a), n_(n) {
  if (n < 1) throw Error(Error::Code::kPrecondition, "bound must be >= 1");
  if (home->depth < 2 * n - 1)
    throw Error(Error::Code::kPrecondition,
                "walking needs view depth >= 2n-1");
  succ_ = build_successor_map(a, home, n);
  root_class_ = a.truncate(home, n - 1);
}

std::pair<Port, ViewRef> ViewWalker::step(ViewRef cls, Port p) const {
  auto it = succ_.find(cls);
  if (it == succ_.end())
    throw Error(Error::Code::kPrecondition, "unknown view class");
  const ViewNode* ext = it->second;
  if (p < 0 || p >= ext->degree)
    throw Error(Error::Code::kPrecondition, "port out of range");
  const ViewChild& c = ext->children[p];
  return {c.entry, c.node};
}

bool view_trail_feasible(ViewArena& a, ViewRef v, const Trail& t, int n) {
  if (t.size() % 2 != 0)
    throw Error(Error::Code::kPrecondition, "odd-length trail");
  ViewWalker w(a, v, n);
  ClassWorld world{&w};
  return walk_trail(world, w.root_class(), t).has_value();
}

namespace {

ViewRef grow_once(ViewArena& a, ViewRef v,
                  const std::unordered_map<ViewRef, ViewRef>& succ, int n,
                  std::unordered_map<ViewRef, ViewRef>& memo) {
  if (v->depth == n - 1) {
    auto it = succ.find(v);
    if (it == succ.end())
      throw Error(Error::Code::kPrecondition,
                  "view too shallow to determine an extension");
    return it->second;
  }
  auto m = memo.find(v);
  if (m != memo.end()) return m->second;
  std::vector<ViewChild> kids;
  kids.reserve(v->children.size());
  for (const ViewChild& c : v->children)
    kids.push_back({c.entry, grow_once(a, c.node, succ, n, memo)});
  ViewRef out = a.intern(v->mark, v->degree, std::move(kids));
  memo[v] = out;
  return out;
}

}  // namespace

ViewRef extend_view(ViewArena& a, ViewRef v, int l, int n) {
  if (l < 0) throw Error(Error::Code::kPrecondition, "negative depth");
  if (l <= v->depth) return a.truncate(v, l);
  if (n < 1 || v->depth < 2 * n - 1)
    throw Error(Error::Code::kPrecondition,
                "extension needs view depth >= 2n-1");
  auto succ = build_successor_map(a, v, n);
  ViewRef cur = v;
  for (int d = v->depth; d < l; ++d) {
    std::unordered_map<ViewRef, ViewRef> memo;
    cur = grow_once(a, cur, succ, n, memo);
  }
  return cur;
}

Transition compute_transition(ViewArena& a, ViewRef from_view,
                              ViewRef into_view, const Trail& anchor, int n) {
  if (static_cast<int>(anchor.size()) > 2 * (n - 1))
    throw Error(Error::Code::kPrecondition, "anchor deeper than n-1 edges");
  ViewRef at = node_at_trail_end(into_view, anchor);
  if (!at)
    throw Error(Error::Code::kPrecondition,
                "anchor trail not realizable in the target view");
  int common = std::min(at->depth, from_view->depth);
  if (a.truncate(at, common) != a.truncate(from_view, common))
    throw Error(Error::Code::kPrecondition,
                "anchor subtree does not match the source view");
  return {from_view, into_view, anchor};
}

namespace {

void pull_rec(ViewRef from, ViewRef into, std::uint64_t from_idx,
              std::uint64_t into_idx, int depth_left,
              const BinaryMapping& into_marks, BinaryMapping& from_marks) {
  if (into_marks.get(into_idx)) from_marks.set(from_idx);
  if (depth_left == 0 || from->children.empty()) return;
  std::uint64_t foff = from_idx + 1;
  std::uint64_t ioff = into_idx + 1;
  for (std::size_t p = 0; p < from->children.size(); ++p) {
    pull_rec(from->children[p].node, into->children[p].node, foff, ioff,
             depth_left - 1, into_marks, from_marks);
    foff += from->children[p].node->size;
    ioff += into->children[p].node->size;
  }
}

}  // namespace

void pull_marks(const Transition& tr, const BinaryMapping& into_marks,
                BinaryMapping& from_marks, int depth_limit) {
  if (into_marks.n_bits != tr.into_view->size ||
      from_marks.n_bits != tr.from_view->size)
    throw Error(Error::Code::kPrecondition, "mapping sizes do not match views");
  ViewRef at = node_at_trail_end(tr.into_view, tr.anchor);
  if (!at)
    throw Error(Error::Code::kPrecondition, "transition anchor vanished");
  int limit = std::min(depth_limit, std::min(at->depth, tr.from_view->depth));
  auto base = position_index(tr.into_view, tr.anchor);
  pull_rec(tr.from_view, at, 0, *base, limit, into_marks, from_marks);
}

}  // namespace anonelect
