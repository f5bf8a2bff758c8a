#include "ecx/dp.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cassert>
#include <memory>
#include <unordered_map>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ecx {
namespace {

constexpr std::size_t kParallelThreshold = 1024;
constexpr std::size_t kCancelStride = 1 << 16;

std::uint64_t expand_bit(std::uint64_t m, std::uint32_t p) {
  std::uint64_t low = p == 0 ? 0 : (m & ((1ull << p) - 1));
  std::uint64_t high = p >= 63 ? 0 : ((m >> p) << (p + 1));
  return low | high;
}

std::uint64_t collapse_bit(std::uint64_t m, std::uint32_t p) {
  std::uint64_t low = p == 0 ? 0 : (m & ((1ull << p) - 1));
  std::uint64_t high = p >= 63 ? 0 : ((m >> (p + 1)) << p);
  return low | high;
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

std::uint32_t position_of(const std::vector<std::uint32_t>& bag, std::uint32_t v) {
  auto it = std::lower_bound(bag.begin(), bag.end(), v);
  if (it == bag.end() || *it != v) return UINT32_MAX;
  return static_cast<std::uint32_t>(it - bag.begin());
}

}  // namespace

std::pair<Circuit, std::uint32_t> add_output_gate(const Circuit& c) {
  CircuitBuilder b;
  for (std::uint32_t v = 0; v < c.num_vertices(); ++v) {
    b.add_vertex(c.kind(v), c.kind(v) == VertexKind::Input ? c.cost(v) : 0.0);
  }
  for (std::uint32_t v = 0; v < c.num_vertices(); ++v) {
    for (std::uint32_t t : c.out(v)) b.add_edge(v, t);
  }
  std::uint32_t u_out = b.add_vertex(VertexKind::And);
  for (std::uint32_t o : c.outputs()) b.add_edge(o, u_out);
  b.mark_output(u_out);
  return {b.build(), u_out};
}

/// Append-with-merge table construction: a candidate carrying an already-seen
/// key keeps the cheaper cost, first-discovered on ties. Never moved (the
/// set's functors point back at it), so chunks build their own and are folded
/// in chunk order, which reproduces the serial append order exactly.
class DpBuilder {
 public:
  using Entry = DpEngine::Entry;
  using Table = DpEngine::Table;

  DpBuilder(std::uint32_t width, std::uint32_t reach_words, bool flags_in_key)
      : flags_in_key_(flags_in_key), set_(16, Hash{this}, Eq{this}) {
    t_.width = width;
    t_.reach_words = reach_words;
  }
  DpBuilder(const DpBuilder&) = delete;
  DpBuilder& operator=(const DpBuilder&) = delete;

  void add(const Entry& e, const std::uint64_t* row) {
    t_.entries.push_back(e);
    if (t_.reach_words != 0) t_.reach.insert(t_.reach.end(), row, row + t_.reach_words);
    std::uint32_t idx = static_cast<std::uint32_t>(t_.entries.size() - 1);
    auto [it, fresh] = set_.insert(idx);
    if (!fresh) {
      std::uint32_t win = *it;
      if (e.cost < t_.entries[win].cost) t_.entries[win] = e;
      t_.entries.pop_back();
      if (t_.reach_words != 0) t_.reach.resize(t_.reach.size() - t_.reach_words);
    }
  }

  void fold(const Table& other) {
    for (std::uint32_t i = 0; i < other.entries.size(); ++i) {
      add(other.entries[i], other.reach_words != 0 ? other.row(i) : nullptr);
    }
  }

  Table take() { return std::move(t_); }

 private:
  struct Hash {
    const DpBuilder* b;
    std::size_t operator()(std::uint32_t i) const {
      const Entry& e = b->t_.entries[i];
      std::uint64_t h = mix(0x517cc1b727220a95ull, e.values);
      if (b->flags_in_key_) h = mix(h, e.justified);
      const std::uint64_t* r = b->t_.row(i);
      for (std::uint32_t k = 0; k < b->t_.reach_words; ++k) h = mix(h, r[k]);
      return static_cast<std::size_t>(h);
    }
  };
  struct Eq {
    const DpBuilder* b;
    bool operator()(std::uint32_t x, std::uint32_t y) const {
      const Entry& a = b->t_.entries[x];
      const Entry& c = b->t_.entries[y];
      if (a.values != c.values) return false;
      if (b->flags_in_key_ && a.justified != c.justified) return false;
      const std::uint64_t* rx = b->t_.row(x);
      const std::uint64_t* ry = b->t_.row(y);
      for (std::uint32_t k = 0; k < b->t_.reach_words; ++k) {
        if (rx[k] != ry[k]) return false;
      }
      return true;
    }
  };

  Table t_;
  bool flags_in_key_;
  std::unordered_set<std::uint32_t, Hash, Eq> set_;
};

namespace {

/// Runs `body(lo, hi, builder)` over [0, n) either serially or split into
/// contiguous chunks whose local tables are folded back in chunk order; the
/// fold reproduces the serial append order, so results are thread-count
/// independent. `stop` aborts cooperatively.
template <typename Body>
DpBuilder::Table chunked_build(std::size_t n, std::uint32_t width, std::uint32_t reach_words,
                               bool flags_in_key, int num_threads, std::atomic<bool>& stop,
                               Body&& body) {
  int threads = 1;
#ifdef _OPENMP
  if (num_threads != 1 && n >= kParallelThreshold) {
    threads = num_threads == 0 ? omp_get_max_threads() : num_threads;
    threads = std::max(1, std::min<int>(threads, static_cast<int>(n / 256) + 1));
  }
#else
  (void)num_threads;
#endif
  if (threads <= 1) {
    DpBuilder b(width, reach_words, flags_in_key);
    body(std::size_t{0}, n, b);
    return b.take();
  }
#ifdef _OPENMP
  std::vector<DpBuilder::Table> parts(threads);
#pragma omp parallel num_threads(threads)
  {
    int t = omp_get_thread_num();
    std::size_t lo = n * t / threads;
    std::size_t hi = n * (t + 1) / threads;
    DpBuilder local(width, reach_words, flags_in_key);
    body(lo, hi, local);
    parts[t] = local.take();
  }
  if (stop.load()) return DpBuilder::Table{};
  DpBuilder merged(width, reach_words, flags_in_key);
  for (const auto& part : parts) merged.fold(part);
  return merged.take();
#else
  DpBuilder b(width, reach_words, flags_in_key);
  body(std::size_t{0}, n, b);
  return b.take();
#endif
}

}  // namespace

DpEngine::DpEngine(const Circuit& c, const NiceTree& nt, std::uint32_t out_vertex, DpOptions opts)
    : c_(c), nt_(nt), out_vertex_(out_vertex), opts_(std::move(opts)) {
  for (const NiceBag& b : nt_.bags) {
    if (b.vertices.size() > 64) throw std::invalid_argument("bag too wide for 64-bit summaries");
  }
  if (nt_.bags.at(nt_.root).vertices != std::vector<std::uint32_t>{out_vertex_}) {
    throw std::invalid_argument("root bag must hold exactly the output vertex");
  }
}

DpEngine::Table DpEngine::process_leaf(std::uint32_t) const {
  Table t;
  t.width = 0;
  t.reach_words = 0;
  t.entries.push_back(Entry{});
  return t;
}

DpEngine::Table DpEngine::process_insert(std::uint32_t b, const Table& child) const {
  const NiceBag& nb = nt_.bags[b];
  const std::vector<std::uint32_t>& bag = nb.vertices;
  std::uint32_t w = static_cast<std::uint32_t>(bag.size());
  std::uint32_t u = nb.special;
  std::uint32_t p = position_of(bag, u);
  VertexKind ku = c_.kind(u);
  double cu = c_.cost(u);
  bool acyc = opts_.enforce_acyclic;
  std::uint32_t rw = acyc ? w : 0;

  // Bag positions feeding u and fed by u. Tested from the bag side: the bag
  // holds at most 64 vertices while u's adjacency can hold thousands, and u
  // is inserted once per branch it spans.
  std::uint64_t in_mask = 0, out_mask = 0;
  const std::vector<std::uint32_t>& u_in = c_.in(u);
  const std::vector<std::uint32_t>& u_out = c_.out(u);
  for (std::uint32_t i = 0; i < w; ++i) {
    if (std::binary_search(u_in.begin(), u_in.end(), bag[i])) in_mask |= 1ull << i;
    if (std::binary_search(u_out.begin(), u_out.end(), bag[i])) out_mask |= 1ull << i;
  }
  std::vector<VertexKind> kpos(w);
  for (std::uint32_t i = 0; i < w; ++i) kpos[i] = c_.kind(bag[i]);

  std::atomic<bool> stop{false};
  const auto& cancelled = opts_.cancelled;
  auto body = [&](std::size_t lo, std::size_t hi, DpBuilder& out) {
    std::vector<std::uint64_t> row(rw, 0), nrow(rw, 0);
    std::size_t tick = 0;
    for (std::size_t ci = lo; ci < hi; ++ci) {
      if (++tick % kCancelStride == 0 && cancelled) {
        if (stop.load() || cancelled()) {
          stop.store(true);
          return;
        }
      }
      const Entry& e = child.entries[ci];
      std::uint64_t ev = expand_bit(e.values, p);
      std::uint64_t ej = expand_bit(e.justified, p);
      if (acyc) {
        const std::uint64_t* crow = child.row(static_cast<std::uint32_t>(ci));
        for (std::uint32_t i = 0; i < w; ++i) {
          if (i == p) {
            row[i] = 0;
          } else {
            std::uint32_t q = i < p ? i : i - 1;
            row[i] = expand_bit(crow[q], p);
          }
        }
      }
      for (int val = 0; val <= 1; ++val) {
        std::uint64_t values = ev | (static_cast<std::uint64_t>(val) << p);
        std::uint64_t justified = ej;
        double cost = e.cost;
        if (val && ku == VertexKind::Input) cost += cu;
        bool need = (ku == VertexKind::Or && val) || (ku == VertexKind::And && !val);
        bool ju = !need;
        bool ok = true;
        // u against its in-neighbors present in the bag.
        for (std::uint64_t m = in_mask; m != 0 && ok; m &= m - 1) {
          std::uint32_t i = static_cast<std::uint32_t>(std::countr_zero(m));
          bool sval = (values >> i) & 1;
          if (ku == VertexKind::Or) {
            if (!val && sval) ok = false;
            if (val && sval) ju = true;
          } else if (ku == VertexKind::And) {
            if (val && !sval) ok = false;
            if (!val && !sval) ju = true;
          }
        }
        // u against the bag vertices it feeds.
        for (std::uint64_t m = out_mask; m != 0 && ok; m &= m - 1) {
          std::uint32_t j = static_cast<std::uint32_t>(std::countr_zero(m));
          bool tval = (values >> j) & 1;
          if (kpos[j] == VertexKind::Or) {
            if (!tval && val) ok = false;
            if (tval && val) justified |= 1ull << j;
          } else if (kpos[j] == VertexKind::And) {
            if (tval && !val) ok = false;
            if (!tval && !val) justified |= 1ull << j;
          }
        }
        if (!ok) continue;
        if (ju) justified |= 1ull << p;
        Entry ne;
        ne.cost = cost;
        ne.values = values;
        ne.justified = justified;
        ne.pred_l = static_cast<std::int32_t>(ci);
        if (!acyc) {
          out.add(ne, nullptr);
          continue;
        }
        if (!val) {
          out.add(ne, row.data());
          continue;
        }
        std::uint64_t direct_in = in_mask & values;
        std::uint64_t direct_out = out_mask & values;
        std::uint64_t uin = direct_in;
        for (std::uint64_t m = values & ~(1ull << p); m != 0; m &= m - 1) {
          std::uint32_t i = static_cast<std::uint32_t>(std::countr_zero(m));
          if (row[i] & direct_in) uin |= 1ull << i;
        }
        std::uint64_t uout = direct_out;
        for (std::uint64_t m = direct_out; m != 0; m &= m - 1) {
          std::uint32_t j = static_cast<std::uint32_t>(std::countr_zero(m));
          uout |= row[j];
        }
        if (uin & uout) continue;  // a true path would close a cycle through u
        std::copy(row.begin(), row.end(), nrow.begin());
        nrow[p] = uout;
        for (std::uint64_t m = uin; m != 0; m &= m - 1) {
          std::uint32_t i = static_cast<std::uint32_t>(std::countr_zero(m));
          nrow[i] |= uout | (1ull << p);
        }
        out.add(ne, nrow.data());
      }
    }
  };
  Table t = chunked_build(child.entries.size(), w, rw, opts_.known_flags_in_key,
                          opts_.num_threads, stop, body);
  if (stop.load()) throw DpCancelled("cancelled");
  return t;
}

DpEngine::Table DpEngine::process_forget(std::uint32_t b, const Table& child) const {
  const NiceBag& nb = nt_.bags[b];
  std::uint32_t w = static_cast<std::uint32_t>(nb.vertices.size());
  std::uint32_t p = position_of(nt_.bags[nb.children[0]].vertices, nb.special);
  bool acyc = opts_.enforce_acyclic;
  std::uint32_t rw = acyc ? w : 0;

  std::atomic<bool> stop{false};
  const auto& cancelled = opts_.cancelled;
  auto body = [&](std::size_t lo, std::size_t hi, DpBuilder& out) {
    std::vector<std::uint64_t> nrow(rw, 0);
    std::size_t tick = 0;
    for (std::size_t ci = lo; ci < hi; ++ci) {
      if (++tick % kCancelStride == 0 && cancelled) {
        if (stop.load() || cancelled()) {
          stop.store(true);
          return;
        }
      }
      const Entry& e = child.entries[ci];
      if (((e.justified >> p) & 1) == 0) continue;  // obligation can no longer be met
      Entry ne;
      ne.cost = e.cost;
      ne.values = collapse_bit(e.values, p);
      ne.justified = collapse_bit(e.justified, p);
      ne.pred_l = static_cast<std::int32_t>(ci);
      if (acyc) {
        const std::uint64_t* crow = child.row(static_cast<std::uint32_t>(ci));
        for (std::uint32_t i = 0; i < w; ++i) {
          std::uint32_t q = i < p ? i : i + 1;
          nrow[i] = collapse_bit(crow[q] & ~(1ull << p), p);
        }
        out.add(ne, nrow.data());
      } else {
        out.add(ne, nullptr);
      }
    }
  };
  Table t = chunked_build(child.entries.size(), w, rw, opts_.known_flags_in_key,
                          opts_.num_threads, stop, body);
  if (stop.load()) throw DpCancelled("cancelled");
  return t;
}

DpEngine::Table DpEngine::process_join(std::uint32_t b, const Table& left,
                                       const Table& right) const {
  const NiceBag& nb = nt_.bags[b];
  const std::vector<std::uint32_t>& bag = nb.vertices;
  std::uint32_t w = static_cast<std::uint32_t>(bag.size());
  bool acyc = opts_.enforce_acyclic;
  std::uint32_t rw = acyc ? w : 0;
  std::vector<double> icost(w, 0.0);
  for (std::uint32_t i = 0; i < w; ++i) {
    if (c_.kind(bag[i]) == VertexKind::Input) icost[i] = c_.cost(bag[i]);
  }
  // Right entries grouped by values, preserving insertion order.
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_values;
  for (std::uint32_t i = 0; i < right.entries.size(); ++i) {
    by_values[right.entries[i].values].push_back(i);
  }

  std::atomic<bool> stop{false};
  const auto& cancelled = opts_.cancelled;
  auto body = [&](std::size_t lo, std::size_t hi, DpBuilder& out) {
    std::vector<std::uint64_t> nrow(rw, 0);
    std::size_t tick = 0;
    for (std::size_t il = lo; il < hi; ++il) {
      const Entry& el = left.entries[il];
      auto found = by_values.find(el.values);
      if (found == by_values.end()) continue;
      double shared = 0.0;
      for (std::uint64_t m = el.values; m != 0; m &= m - 1) {
        shared += icost[std::countr_zero(m)];
      }
      for (std::uint32_t ir : found->second) {
        if (++tick % kCancelStride == 0 && cancelled) {
          if (stop.load() || cancelled()) {
            stop.store(true);
            return;
          }
        }
        const Entry& er = right.entries[ir];
        Entry ne;
        ne.cost = el.cost + er.cost - shared;
        ne.values = el.values;
        ne.justified = el.justified | er.justified;
        ne.pred_l = static_cast<std::int32_t>(il);
        ne.pred_r = static_cast<std::int32_t>(ir);
        if (!acyc) {
          out.add(ne, nullptr);
          continue;
        }
        const std::uint64_t* rl = left.row(static_cast<std::uint32_t>(il));
        const std::uint64_t* rr = right.row(ir);
        for (std::uint32_t i = 0; i < w; ++i) nrow[i] = rl[i] | rr[i];
        // Close the union transitively, then reject any diagonal hit.
        for (std::uint32_t k = 0; k < w; ++k) {
          if (((ne.values >> k) & 1) == 0) continue;
          std::uint64_t kbit = 1ull << k;
          for (std::uint32_t i = 0; i < w; ++i) {
            if (nrow[i] & kbit) nrow[i] |= nrow[k];
          }
        }
        bool cyclic = false;
        for (std::uint32_t i = 0; i < w && !cyclic; ++i) {
          if ((nrow[i] >> i) & 1) cyclic = true;
        }
        if (cyclic) continue;
        out.add(ne, nrow.data());
      }
    }
  };
  Table t = chunked_build(left.entries.size(), w, rw, opts_.known_flags_in_key, opts_.num_threads,
                          stop, body);
  if (stop.load()) throw DpCancelled("cancelled");
  return t;
}

std::optional<DpResult> DpEngine::run() {
  if (ran_) throw std::logic_error("DpEngine::run called twice");
  ran_ = true;
  std::size_t nb = nt_.bags.size();
  compact_.assign(nb, {});
  if (opts_.keep_tables) full_.resize(nb);

  // Reversed preorder puts children before parents.
  std::vector<std::uint32_t> order;
  order.reserve(nb);
  std::vector<std::uint32_t> stack{nt_.root};
  while (!stack.empty()) {
    std::uint32_t x = stack.back();
    stack.pop_back();
    order.push_back(x);
    for (std::uint32_t ch : nt_.bags[x].children) stack.push_back(ch);
  }
  std::reverse(order.begin(), order.end());

  std::vector<Table> live(nb);
  for (std::uint32_t x : order) {
    if (opts_.cancelled && opts_.cancelled()) throw DpCancelled("cancelled");
    const NiceBag& nbx = nt_.bags[x];
    Table t;
    switch (nbx.kind) {
      case BagKind::Leaf: t = process_leaf(x); break;
      case BagKind::Insert: t = process_insert(x, live[nbx.children[0]]); break;
      case BagKind::Forget: t = process_forget(x, live[nbx.children[0]]); break;
      case BagKind::Join: t = process_join(x, live[nbx.children[0]], live[nbx.children[1]]); break;
    }
    if (t.entries.size() > static_cast<std::size_t>(INT32_MAX)) {
      throw std::runtime_error("table exceeds index range");
    }
    stats_.bags += 1;
    stats_.peak_table = std::max(stats_.peak_table, t.entries.size());
    stats_.total_entries += t.entries.size();
    compact_[x].reserve(t.entries.size());
    for (const Entry& e : t.entries) {
      compact_[x].push_back(CompactEntry{e.cost, e.values, e.pred_l, e.pred_r});
    }
    for (std::uint32_t ch : nbx.children) {
      if (opts_.keep_tables) full_[ch] = std::move(live[ch]);
      live[ch] = Table{};
    }
    live[x] = std::move(t);
  }
  if (opts_.keep_tables) full_[nt_.root] = std::move(live[nt_.root]);

  // Root bag is exactly {out_vertex}: pick the cheapest entry asserting it.
  const std::vector<CompactEntry>& root = compact_[nt_.root];
  std::int64_t best = -1;
  for (std::size_t i = 0; i < root.size(); ++i) {
    if ((root[i].values & 1) == 0) continue;
    if (best < 0 || root[i].cost < root[best].cost) best = static_cast<std::int64_t>(i);
  }
  if (best < 0) return std::nullopt;

  std::vector<std::int8_t> assign = partial_assignment(nt_.root, static_cast<std::uint32_t>(best));
  Evaluation eval;
  eval.value.assign(c_.num_vertices(), 0);
  for (std::uint32_t v = 0; v < c_.num_vertices(); ++v) {
    if (assign[v] < 0) throw std::logic_error("vertex never inserted on the walk");
    eval.value[v] = assign[v] == 1;
  }
  DpResult res;
  res.evaluation = std::move(eval);
  res.cost = root[best].cost;
  res.acyclic = is_acyclic_evaluation(c_, res.evaluation);
  res.stats = stats_;
  return res;
}

DpEngine::EntryView DpEngine::entry(std::uint32_t b, std::uint32_t i) const {
  EntryView v;
  const CompactEntry& ce = compact_.at(b).at(i);
  v.cost = ce.cost;
  v.values = ce.values;
  if (opts_.keep_tables && b < full_.size()) {
    const Table& t = full_[b];
    v.justified = t.entries.at(i).justified;
    if (t.reach_words != 0) {
      v.reach.assign(t.row(i), t.row(i) + t.reach_words);
    }
  }
  return v;
}

std::vector<std::int8_t> DpEngine::partial_assignment(std::uint32_t b, std::uint32_t i) const {
  std::vector<std::int8_t> assign(c_.num_vertices(), -1);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{b, i}};
  while (!stack.empty()) {
    auto [x, ei] = stack.back();
    stack.pop_back();
    const NiceBag& nbx = nt_.bags[x];
    const CompactEntry& e = compact_.at(x).at(ei);
    switch (nbx.kind) {
      case BagKind::Leaf: break;
      case BagKind::Insert: {
        std::uint32_t p = position_of(nbx.vertices, nbx.special);
        std::int8_t val = static_cast<std::int8_t>((e.values >> p) & 1);
        if (assign[nbx.special] >= 0 && assign[nbx.special] != val) {
          throw std::logic_error("join branches disagree on an inserted value");
        }
        assign[nbx.special] = val;
        stack.emplace_back(nbx.children[0], static_cast<std::uint32_t>(e.pred_l));
        break;
      }
      case BagKind::Forget:
        stack.emplace_back(nbx.children[0], static_cast<std::uint32_t>(e.pred_l));
        break;
      case BagKind::Join:
        stack.emplace_back(nbx.children[0], static_cast<std::uint32_t>(e.pred_l));
        stack.emplace_back(nbx.children[1], static_cast<std::uint32_t>(e.pred_r));
        break;
    }
  }
  return assign;
}

std::optional<DpResult> run_dp(const Circuit& c, const NiceTree& nt, std::uint32_t out_vertex,
                               const DpOptions& opts) {
  return DpEngine(c, nt, out_vertex, opts).run();
}

}  // namespace ecx
