#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "deepwl/error.hpp"
#include "deepwl/structure.hpp"

namespace dwl {

using ColorId = std::uint32_t;

struct IntersectionEntry {
  ColorId second;
  ColorId third;
  std::uint32_t count;
  friend bool operator==(const IntersectionEntry&, const IntersectionEntry&) = default;
};

// Sparse q(R1,R2,R3): per R1 the nonzero (R2,R3,count) entries sorted by (R2,R3).
class IntersectionNumbers {
 public:
  IntersectionNumbers() = default;
  explicit IntersectionNumbers(std::vector<std::vector<IntersectionEntry>> rows) {
    offsets_.reserve(rows.size() + 1);
    offsets_.push_back(0);
    for (auto& row : rows) {
      std::sort(row.begin(), row.end(),
                [](const auto& a, const auto& b) { return std::tie(a.second, a.third) < std::tie(b.second, b.third); });
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i].count == 0) throw PreconditionError("intersection rows hold nonzero entries only");
        if (i > 0 && row[i].second == row[i - 1].second && row[i].third == row[i - 1].third)
          throw PreconditionError("duplicate intersection entry");
        if (row[i].second >= rows.size() || row[i].third >= rows.size())
          throw PreconditionError("intersection entry names an unknown color");
      }
      entries_.insert(entries_.end(), row.begin(), row.end());
      offsets_.push_back(entries_.size());
    }
  }

  std::size_t num_colors() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t nonzero_count() const noexcept { return entries_.size(); }

  std::span<const IntersectionEntry> row(ColorId r1) const {
    return {entries_.data() + offsets_[r1], entries_.data() + offsets_[r1 + 1]};
  }

  std::uint32_t operator()(ColorId r1, ColorId r2, ColorId r3) const {
    auto r = row(r1);
    auto it = std::lower_bound(r.begin(), r.end(), std::pair{r2, r3}, [](const IntersectionEntry& e, const auto& key) {
      return std::pair{e.second, e.third} < key;
    });
    return (it != r.end() && it->second == r2 && it->third == r3) ? it->count : 0;
  }

  friend bool operator==(const IntersectionNumbers&, const IntersectionNumbers&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<IntersectionEntry> entries_;
};

// Per-color facts recoverable from q alone.
struct ColorMetadata {
  std::vector<bool> diagonal;
  std::vector<ColorId> converse;
  std::vector<ColorId> dom;  // diagonal color of the first coordinates
  std::vector<ColorId> cod;  // diagonal color of the second coordinates
  std::vector<std::uint64_t> valency;  // out-degree of a dom vertex inside the color
  std::vector<std::uint64_t> fiber_size;  // |D| for diagonal D, 0 otherwise
  std::vector<std::uint64_t> size;  // number of pairs in the color
  std::uint64_t vertices = 0;
};

inline ColorMetadata derive_metadata(const IntersectionNumbers& q) {
  const std::size_t k = q.num_colors();
  ColorMetadata m;
  m.diagonal.assign(k, true);
  for (ColorId r1 = 0; r1 < k; ++r1)
    for (const auto& e : q.row(r1))
      if (e.second != r1) m.diagonal[e.third] = false;
  constexpr ColorId kNone = ~ColorId{0};
  m.dom.assign(k, kNone);
  m.cod.assign(k, kNone);
  for (ColorId r = 0; r < k; ++r)
    for (const auto& e : q.row(r)) {
      if (m.diagonal[e.second] && e.third == r) m.dom[r] = e.second;
      if (e.second == r && m.diagonal[e.third]) m.cod[r] = e.third;
    }
  m.converse.assign(k, kNone);
  m.valency.assign(k, 0);
  for (ColorId r = 0; r < k; ++r) {
    if (m.dom[r] == kNone || m.cod[r] == kNone) throw PreconditionError("intersection numbers are not coherent");
    for (const auto& e : q.row(m.dom[r]))
      if (e.second == r) {
        m.converse[r] = e.third;
        m.valency[r] = e.count;
      }
    if (m.converse[r] == kNone) throw PreconditionError("intersection numbers are not coherent");
  }
  m.fiber_size.assign(k, 0);
  for (ColorId r = 0; r < k; ++r)
    if (m.dom[r] == m.cod[r]) m.fiber_size[m.dom[r]] += m.valency[r];
  m.size.assign(k, 0);
  for (ColorId r = 0; r < k; ++r) {
    m.size[r] = m.fiber_size[m.dom[r]] * m.valency[r];
    if (m.diagonal[r]) m.vertices += m.fiber_size[r];
  }
  return m;
}

// Partition of V^2 into colors with intersection numbers.
struct CoherentConfiguration {
  std::size_t n = 0;
  std::size_t num_colors = 0;
  std::vector<ColorId> color_of;  // row-major n x n
  std::vector<ColorId> converse_of;
  std::vector<bool> is_diagonal;
  IntersectionNumbers q;

  ColorId color(Vertex u, Vertex v) const { return color_of[static_cast<std::size_t>(u) * n + v]; }

  // Every pair of color c, sorted.
  Relation pairs_of(ColorId c) const {
    Relation out;
    for (Vertex u = 0; u < n; ++u)
      for (Vertex v = 0; v < n; ++v)
        if (color(u, v) == c) out.emplace_back(u, v);
    return out;
  }
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t h, std::uint64_t x) {
  x *= 0x9E3779B97F4A7C15ULL;
  x ^= x >> 29;
  h ^= x + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  return h;
}

// Interns fixed-width word strings and ranks them lexicographically.
class SignatureTable {
 public:
  explicit SignatureTable(std::size_t width) : width_(width) {}

  std::uint32_t intern(std::span<const std::uint64_t> sig) {
    std::uint64_t h = 0;
    for (auto w : sig) h = mix64(h, w);
    auto [it, inserted] = head_.try_emplace(h, kEnd);
    for (std::uint32_t id = it->second; id != kEnd; id = next_[id])
      if (std::equal(sig.begin(), sig.end(), words_.begin() + static_cast<std::ptrdiff_t>(id * width_))) return id;
    auto id = static_cast<std::uint32_t>(next_.size());
    words_.insert(words_.end(), sig.begin(), sig.end());
    next_.push_back(it->second);
    it->second = id;
    return id;
  }

  std::size_t size() const { return next_.size(); }

  // rank[id] = position of the signature in lexicographic order.
  std::vector<std::uint32_t> ranks() const {
    std::vector<std::uint32_t> order(size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      auto pa = words_.begin() + static_cast<std::ptrdiff_t>(a * width_);
      auto pb = words_.begin() + static_cast<std::ptrdiff_t>(b * width_);
      return std::lexicographical_compare(pa, pa + static_cast<std::ptrdiff_t>(width_), pb,
                                          pb + static_cast<std::ptrdiff_t>(width_));
    });
    std::vector<std::uint32_t> rank(size());
    for (std::uint32_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
    return rank;
  }

 private:
  static constexpr std::uint32_t kEnd = ~std::uint32_t{0};
  std::size_t width_;
  std::vector<std::uint64_t> words_;
  std::vector<std::uint32_t> next_;
  std::unordered_map<std::uint64_t, std::uint32_t> head_;
};

inline std::vector<ColorId> initial_pair_colors(const Structure& a, std::size_t& num_colors) {
  const std::size_t n = a.size();
  const std::size_t width = 1 + 2 * a.relations().size();
  std::vector<std::uint8_t> member(n * n * a.relations().size(), 0);
  std::size_t s = 0;
  for (const auto& [sym, rel] : a.relations()) {
    for (auto [u, v] : rel) member[(static_cast<std::size_t>(u) * n + v) * a.relations().size() + s] = 1;
    ++s;
  }
  const std::size_t nrel = a.relations().size();
  SignatureTable table(width);
  std::vector<std::uint32_t> ids(n * n);
  std::vector<std::uint64_t> sig(width);
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = 0; v < n; ++v) {
      sig[0] = (u == v) ? 1 : 0;
      for (std::size_t r = 0; r < nrel; ++r) {
        sig[1 + 2 * r] = member[(static_cast<std::size_t>(u) * n + v) * nrel + r];
        sig[2 + 2 * r] = member[(static_cast<std::size_t>(v) * n + u) * nrel + r];
      }
      ids[static_cast<std::size_t>(u) * n + v] = table.intern(sig);
    }
  auto rank = table.ranks();
  for (auto& id : ids) id = rank[id];
  num_colors = table.size();
  return ids;
}

}  // namespace detail

// One signature round: (old color, sorted multiset of (c(u,w), c(w,v))). Returns the new coloring
// and stores the new color count.
inline std::vector<ColorId> refine_round(std::size_t n, const std::vector<ColorId>& colors, std::size_t& num_colors) {
  detail::SignatureTable table(n + 1);
  std::vector<std::uint64_t> sig(n + 1);
  std::vector<ColorId> next(n * n);
  for (std::size_t u = 0; u < n; ++u) {
    const ColorId* row_u = colors.data() + u * n;
    for (std::size_t v = 0; v < n; ++v) {
      sig[0] = row_u[v];
      for (std::size_t w = 0; w < n; ++w)
        sig[1 + w] = (static_cast<std::uint64_t>(row_u[w]) << 32) | colors[w * n + v];
      std::sort(sig.begin() + 1, sig.end());
      next[u * n + v] = table.intern(sig);
    }
  }
  auto rank = table.ranks();
  for (auto& c : next) c = rank[c];
  num_colors = table.size();
  return next;
}

// Intersection numbers read off one representative pair per color.
inline IntersectionNumbers compute_intersection_numbers(std::size_t n, const std::vector<ColorId>& colors,
                                                        std::size_t num_colors) {
  constexpr std::size_t kUnset = ~std::size_t{0};
  std::vector<std::size_t> rep(num_colors, kUnset);
  for (std::size_t i = 0; i < colors.size(); ++i)
    if (rep[colors[i]] == kUnset) rep[colors[i]] = i;
  std::vector<std::vector<IntersectionEntry>> rows(num_colors);
  std::vector<std::uint64_t> buf(n);
  for (ColorId c = 0; c < num_colors; ++c) {
    if (rep[c] == kUnset) throw PreconditionError("color " + std::to_string(c) + " is empty");
    std::size_t u = rep[c] / n, v = rep[c] % n;
    for (std::size_t w = 0; w < n; ++w)
      buf[w] = (static_cast<std::uint64_t>(colors[u * n + w]) << 32) | colors[w * n + v];
    std::sort(buf.begin(), buf.end());
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j < n && buf[j] == buf[i]) ++j;
      rows[c].push_back({static_cast<ColorId>(buf[i] >> 32), static_cast<ColorId>(buf[i] & 0xFFFFFFFFU),
                         static_cast<std::uint32_t>(j - i)});
      i = j;
    }
  }
  return IntersectionNumbers(std::move(rows));
}

inline CoherentConfiguration configuration_from_colors(std::size_t n, std::vector<ColorId> colors,
                                                       std::size_t num_colors) {
  CoherentConfiguration c;
  c.n = n;
  c.num_colors = num_colors;
  c.q = compute_intersection_numbers(n, colors, num_colors);
  c.converse_of.assign(num_colors, 0);
  c.is_diagonal.assign(num_colors, false);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) {
      c.converse_of[colors[u * n + v]] = colors[v * n + u];
      if (u == v) c.is_diagonal[colors[u * n + v]] = true;
    }
  c.color_of = std::move(colors);
  return c;
}

// Coarsest coherent configuration refining the structure (2-WL stable coloring).
inline CoherentConfiguration refine_to_coarsest(const Structure& a) {
  const std::size_t n = a.size();
  std::size_t count = 0;
  auto colors = detail::initial_pair_colors(a, count);
  while (true) {
    std::size_t next_count = 0;
    auto next = refine_round(n, colors, next_count);
    if (next_count == count) break;
    colors = std::move(next);
    count = next_count;
  }
  return configuration_from_colors(n, std::move(colors), count);
}

enum class CoherenceAxiom { kNone, kPartition, kDiagonal, kConverse, kIntersection, kRefinement };

inline const char* axiom_name(CoherenceAxiom a) {
  switch (a) {
    case CoherenceAxiom::kNone: return "none";
    case CoherenceAxiom::kPartition: return "partition";
    case CoherenceAxiom::kDiagonal: return "diagonal";
    case CoherenceAxiom::kConverse: return "converse";
    case CoherenceAxiom::kIntersection: return "intersection";
    case CoherenceAxiom::kRefinement: return "refinement";
  }
  return "?";
}

struct CoherenceVerdict {
  bool ok = true;
  CoherenceAxiom axiom = CoherenceAxiom::kNone;
  std::vector<Vertex> witness;  // offending pair (u,v), plus w for intersection failures
  std::string message;
  explicit operator bool() const noexcept { return ok; }
};

inline CoherenceVerdict verify_coherent(const CoherentConfiguration& c, const Structure& against) {
  const std::size_t n = c.n;
  if (against.size() != n || c.color_of.size() != n * n)
    throw PreconditionError("configuration has " + std::to_string(n) + " vertices, structure has " +
                            std::to_string(against.size()));
  auto fail = [](CoherenceAxiom ax, std::vector<Vertex> w, std::string msg) {
    return CoherenceVerdict{false, ax, std::move(w), std::move(msg)};
  };
  const std::size_t k = c.num_colors;
  std::vector<std::size_t> first(k, n * n);
  for (std::size_t i = 0; i < n * n; ++i) {
    if (c.color_of[i] >= k)
      return fail(CoherenceAxiom::kPartition, {Vertex(i / n), Vertex(i % n)}, "color id out of range");
    if (first[c.color_of[i]] == n * n) first[c.color_of[i]] = i;
  }
  for (ColorId r = 0; r < k; ++r)
    if (first[r] == n * n) return fail(CoherenceAxiom::kPartition, {}, "color " + std::to_string(r) + " is empty");

  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = 0; v < n; ++v) {
      ColorId r = c.color(u, v);
      bool diag_rep = first[r] / n == first[r] % n;
      if ((u == v) != diag_rep)
        return fail(CoherenceAxiom::kDiagonal, {u, v}, "color " + std::to_string(r) + " mixes diagonal and off-diagonal pairs");
      if (r < c.is_diagonal.size() && c.is_diagonal[r] != (u == v))
        return fail(CoherenceAxiom::kDiagonal, {u, v}, "diagonal flag of color " + std::to_string(r) + " is wrong");
    }

  if (c.converse_of.size() != k) return fail(CoherenceAxiom::kConverse, {}, "converse table has wrong size");
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = 0; v < n; ++v) {
      ColorId r = c.color(u, v);
      if (c.color(v, u) != c.converse_of[r] || c.converse_of[c.converse_of[r]] != r)
        return fail(CoherenceAxiom::kConverse, {u, v}, "reversed pair does not carry the converse color");
    }

  if (c.q.num_colors() != k) return fail(CoherenceAxiom::kIntersection, {}, "intersection table has wrong size");
  std::vector<std::uint64_t> buf(n);
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = 0; v < n; ++v) {
      for (std::size_t w = 0; w < n; ++w)
        buf[w] = (static_cast<std::uint64_t>(c.color(u, Vertex(w))) << 32) | c.color(Vertex(w), v);
      std::sort(buf.begin(), buf.end());
      auto row = c.q.row(c.color(u, v));
      std::size_t entry = 0;
      for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && buf[j] == buf[i]) ++j;
        auto r2 = ColorId(buf[i] >> 32), r3 = ColorId(buf[i] & 0xFFFFFFFFU);
        if (entry >= row.size() || row[entry].second != r2 || row[entry].third != r3 || row[entry].count != j - i)
          return fail(CoherenceAxiom::kIntersection, {u, v},
                      "count of (" + std::to_string(r2) + "," + std::to_string(r3) + ") midpoints is " +
                          std::to_string(j - i) + ", q says " + std::to_string(c.q(c.color(u, v), r2, r3)));
        ++entry;
        i = j;
      }
      if (entry != row.size())
        return fail(CoherenceAxiom::kIntersection, {u, v}, "q lists a midpoint pattern that does not occur");
    }

  for (const auto& [sym, rel] : against.relations()) {
    std::vector<std::uint8_t> inside(k, 2);
    for (Vertex u = 0; u < n; ++u)
      for (Vertex v = 0; v < n; ++v) {
        ColorId r = c.color(u, v);
        std::uint8_t in = relation_contains(rel, u, v) ? 1 : 0;
        if (inside[r] == 2) inside[r] = in;
        else if (inside[r] != in)
          return fail(CoherenceAxiom::kRefinement, {u, v},
                      "color " + std::to_string(r) + " is split by relation " + sym.text());
      }
  }
  return {};
}

// Stable 1-WL vertex coloring.
struct VertexColoring {
  std::vector<std::uint32_t> class_of;
  std::vector<std::size_t> histogram;  // count per class id
};

inline VertexColoring color_refinement_1wl(const Structure& a) {
  const std::size_t n = a.size();
  std::vector<std::vector<std::vector<Vertex>>> out_adj, in_adj;
  for (const auto& [sym, rel] : a.relations()) {
    out_adj.emplace_back(n);
    in_adj.emplace_back(n);
    for (auto [u, v] : rel) {
      out_adj.back()[u].push_back(v);
      in_adj.back()[v].push_back(u);
    }
  }
  std::vector<std::uint32_t> cls(n, 0);
  std::size_t count = n == 0 ? 0 : 1;
  while (true) {
    std::map<std::vector<std::uint32_t>, std::uint32_t> sigs;
    std::vector<std::vector<std::uint32_t>> per_vertex(n);
    for (Vertex v = 0; v < n; ++v) {
      auto& sig = per_vertex[v];
      sig.push_back(cls[v]);
      for (std::size_t s = 0; s < out_adj.size(); ++s)
        for (const auto* adj : {&out_adj[s][v], &in_adj[s][v]}) {
          std::vector<std::uint32_t> nb;
          for (Vertex w : *adj) nb.push_back(cls[w]);
          std::sort(nb.begin(), nb.end());
          sig.push_back(static_cast<std::uint32_t>(nb.size()));
          sig.insert(sig.end(), nb.begin(), nb.end());
        }
      sigs.emplace(sig, 0);
    }
    std::uint32_t id = 0;
    for (auto& [sig, rank] : sigs) rank = id++;
    std::vector<std::uint32_t> next(n);
    for (Vertex v = 0; v < n; ++v) next[v] = sigs[per_vertex[v]];
    bool stable = sigs.size() == count;
    cls = std::move(next);
    count = sigs.size();
    if (stable) break;
  }
  VertexColoring out;
  out.class_of = std::move(cls);
  out.histogram.assign(count, 0);
  for (auto c : out.class_of) ++out.histogram[c];
  return out;
}

// Whether 1-WL fails to tell the two structures apart (joint refinement on the union).
inline bool one_wl_equivalent(const Structure& a, const Structure& b) {
  if (a.size() != b.size()) return false;
  auto joint = color_refinement_1wl(disjoint_union(a, b));
  std::vector<std::size_t> ha(joint.histogram.size(), 0), hb(joint.histogram.size(), 0);
  for (Vertex v = 0; v < a.size(); ++v) ++ha[joint.class_of[v]];
  for (Vertex v = 0; v < b.size(); ++v) ++hb[joint.class_of[a.size() + v]];
  return ha == hb;
}

}  // namespace dwl
