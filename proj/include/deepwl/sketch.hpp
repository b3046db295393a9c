#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "deepwl/digest.hpp"
#include "deepwl/refine.hpp"
#include "deepwl/structure.hpp"

namespace dwl {

// (tau, sigma, subset relation, q): everything a program may observe.
class AlgebraicSketch {
 public:
  AlgebraicSketch() = default;
  // `subset` is |sigma| x |tau| row-major. tau and sigma must be shortlex-sorted.
  AlgebraicSketch(std::vector<Symbol> tau, std::vector<Symbol> sigma, std::vector<std::uint8_t> subset,
                  IntersectionNumbers q)
      : tau_(std::move(tau)), sigma_(std::move(sigma)), subset_(std::move(subset)), q_(std::move(q)) {
    if (subset_.size() != sigma_.size() * tau_.size()) throw PreconditionError("subset matrix has wrong size");
    if (q_.num_colors() != sigma_.size()) throw PreconditionError("q has wrong number of colors");
    if (!std::is_sorted(tau_.begin(), tau_.end()) || !std::is_sorted(sigma_.begin(), sigma_.end()))
      throw PreconditionError("sketch vocabularies must be shortlex-sorted");
    meta_ = derive_metadata(q_);
  }

  const std::vector<Symbol>& tau() const noexcept { return tau_; }
  const std::vector<Symbol>& sigma() const noexcept { return sigma_; }
  std::size_t num_symbols() const noexcept { return tau_.size(); }
  std::size_t num_colors() const noexcept { return sigma_.size(); }
  const IntersectionNumbers& q() const noexcept { return q_; }
  const ColorMetadata& meta() const noexcept { return meta_; }
  const std::vector<std::uint8_t>& subset_matrix() const noexcept { return subset_; }

  // Whether color r lies inside relation symbol number s.
  bool inside(ColorId r, std::size_t s) const { return subset_[r * tau_.size() + s] != 0; }

  std::optional<std::size_t> symbol_index(const Symbol& s) const {
    auto it = std::lower_bound(tau_.begin(), tau_.end(), s);
    if (it == tau_.end() || *it != s) return std::nullopt;
    return static_cast<std::size_t>(it - tau_.begin());
  }
  std::size_t require_symbol(const Symbol& s) const {
    auto i = symbol_index(s);
    if (!i) throw UnknownName("unknown relation symbol " + s.text());
    return *i;
  }
  std::optional<ColorId> color_index(const Symbol& s) const {
    auto it = std::lower_bound(sigma_.begin(), sigma_.end(), s);
    if (it == sigma_.end() || *it != s) return std::nullopt;
    return static_cast<ColorId>(it - sigma_.begin());
  }
  ColorId require_color(const Symbol& s) const {
    auto i = color_index(s);
    if (!i) throw UnknownName("unknown color " + s.text());
    return *i;
  }

  bool is_diagonal(ColorId r) const { return meta_.diagonal[r]; }
  ColorId converse(ColorId r) const { return meta_.converse[r]; }
  std::uint64_t vertex_count() const { return meta_.vertices; }

  // Colors contained in relation symbol number s.
  std::vector<ColorId> colors_inside(std::size_t s) const {
    std::vector<ColorId> out;
    for (ColorId r = 0; r < num_colors(); ++r)
      if (inside(r, s)) out.push_back(r);
    return out;
  }

  Vocabulary vocabulary() const { return Vocabulary(tau_.begin(), tau_.end()); }

  friend bool operator==(const AlgebraicSketch& a, const AlgebraicSketch& b) {
    return a.tau_ == b.tau_ && a.sigma_ == b.sigma_ && a.subset_ == b.subset_ && a.q_ == b.q_;
  }

 private:
  std::vector<Symbol> tau_;
  std::vector<Symbol> sigma_;
  std::vector<std::uint8_t> subset_;
  IntersectionNumbers q_;
  ColorMetadata meta_;
};

// Result of canonical renaming: the sketch plus where each input color went.
struct CanonicalForm {
  AlgebraicSketch sketch;
  std::vector<ColorId> class_of_input;
};

namespace detail {

struct AggregatedEntry {
  std::uint64_t key;  // (class of R2) << 32 | class of R3
  std::uint64_t sum;
  friend bool operator==(const AggregatedEntry&, const AggregatedEntry&) = default;
};

inline std::vector<AggregatedEntry> aggregate_row(const IntersectionNumbers& q, ColorId r,
                                                  const std::vector<std::uint32_t>& cls) {
  std::vector<AggregatedEntry> out;
  auto row = q.row(r);
  out.reserve(row.size());
  for (const auto& e : row) out.push_back({(std::uint64_t{cls[e.second]} << 32) | cls[e.third], e.count});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  std::size_t w = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (w > 0 && out[w - 1].key == out[i].key) out[w - 1].sum += out[i].sum;
    else out[w++] = out[i];
  }
  out.resize(w);
  return out;
}

// Three-way comparison of two class-aggregated rows viewed as total functions with default 0:
// at the first key where they differ, the smaller value is the smaller row.
inline int compare_aggregated(const std::vector<AggregatedEntry>& a, const std::vector<AggregatedEntry>& b) {
  std::size_t i = 0;
  while (i < a.size() && i < b.size()) {
    if (a[i].key != b[i].key) return a[i].key < b[i].key ? 1 : -1;  // the other row holds 0 there
    if (a[i].sum != b[i].sum) return a[i].sum < b[i].sum ? -1 : 1;
    ++i;
  }
  if (i < a.size()) return 1;
  if (i < b.size()) return -1;
  return 0;
}

}  // namespace detail

// Canonical renaming of a coherent configuration given only through (tau, subset, q).
inline CanonicalForm canonicalize(std::vector<Symbol> tau, const std::vector<std::uint8_t>& subset,
                                  const IntersectionNumbers& q) {
  std::sort(tau.begin(), tau.end());
  const std::size_t k = q.num_colors(), t = tau.size();
  if (subset.size() != k * t) throw PreconditionError("subset matrix has wrong size");
  const ColorMetadata meta = derive_metadata(q);

  std::vector<ColorId> order(k);
  for (ColorId r = 0; r < k; ++r) order[r] = r;
  std::vector<std::uint32_t> cls(k, 0);

  // Level 0: relation memberships, then diagonal colors first.
  auto level0 = [&](ColorId a, ColorId b) -> int {
    for (std::size_t s = 0; s < t; ++s) {
      bool ia = subset[a * t + s], ib = subset[b * t + s];
      if (ia == ib) continue;
      // The sequence lacking symbol s is smaller only if it stops here (proper prefix).
      ColorId lacking = ia ? b : a;
      bool continues = false;
      for (std::size_t s2 = s + 1; s2 < t && !continues; ++s2) continues = subset[lacking * t + s2] != 0;
      bool a_smaller = continues ? ia : !ia;
      return a_smaller ? -1 : 1;
    }
    if (meta.diagonal[a] != meta.diagonal[b]) return meta.diagonal[a] ? -1 : 1;
    return 0;
  };
  std::sort(order.begin(), order.end(), [&](ColorId a, ColorId b) { return level0(a, b) < 0; });
  std::size_t count = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (i > 0 && level0(order[i - 1], order[i]) != 0) ++count;
    cls[order[i]] = static_cast<std::uint32_t>(count);
  }
  count = k == 0 ? 0 : count + 1;

  std::vector<std::vector<detail::AggregatedEntry>> rows(k);
  while (true) {
    for (ColorId r = 0; r < k; ++r) rows[r] = detail::aggregate_row(q, r, cls);
    auto cmp = [&](ColorId a, ColorId b) -> int {
      if (cls[a] != cls[b]) return cls[a] < cls[b] ? -1 : 1;
      auto ca = cls[meta.converse[a]], cb = cls[meta.converse[b]];
      if (ca != cb) return ca < cb ? -1 : 1;
      return detail::compare_aggregated(rows[a], rows[b]);
    };
    std::sort(order.begin(), order.end(), [&](ColorId a, ColorId b) { return cmp(a, b) < 0; });
    std::vector<std::uint32_t> next(k);
    std::size_t next_count = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (i > 0 && cmp(order[i - 1], order[i]) != 0) ++next_count;
      next[order[i]] = static_cast<std::uint32_t>(next_count);
    }
    next_count = k == 0 ? 0 : next_count + 1;
    cls = std::move(next);
    if (next_count == count) break;
    count = next_count;
  }

  // Merge each class into one color; rows of any member agree at the fixpoint.
  std::vector<ColorId> rep(count, 0);
  std::vector<bool> seen(count, false);
  for (ColorId r = 0; r < k; ++r)
    if (!seen[cls[r]]) {
      seen[cls[r]] = true;
      rep[cls[r]] = r;
    }
  std::vector<std::vector<IntersectionEntry>> merged(count);
  std::vector<std::uint8_t> merged_subset(count * t);
  for (std::size_t c = 0; c < count; ++c) {
    for (const auto& e : rows[rep[c]])
      merged[c].push_back({ColorId(e.key >> 32), ColorId(e.key & 0xFFFFFFFFU), static_cast<std::uint32_t>(e.sum)});
    std::copy_n(subset.begin() + static_cast<std::ptrdiff_t>(rep[c] * t), t,
                merged_subset.begin() + static_cast<std::ptrdiff_t>(c * t));
  }
  auto names = fresh_symbols(tau, count);
  CanonicalForm out{AlgebraicSketch(std::move(tau), std::move(names), std::move(merged_subset),
                                    IntersectionNumbers(std::move(merged))),
                    std::vector<ColorId>(cls.begin(), cls.end())};
  return out;
}

inline CanonicalForm canonical_form(const Structure& a, const CoherentConfiguration& c) {
  if (c.n != a.size()) throw PreconditionError("configuration and structure differ in size");
  std::vector<Symbol> tau;
  for (const auto& [sym, rel] : a.relations()) tau.push_back(sym);
  const std::size_t t = tau.size(), k = c.num_colors;
  std::vector<std::uint64_t> sizes(k, 0);
  for (auto col : c.color_of) ++sizes[col];
  std::vector<std::uint8_t> subset(k * t, 0);
  std::size_t s = 0;
  for (const auto& [sym, rel] : a.relations()) {
    std::uint64_t covered = 0;
    for (auto [u, v] : rel) {
      auto col = c.color(u, v);
      if (!subset[col * t + s]) {
        subset[col * t + s] = 1;
        covered += sizes[col];
      }
    }
    if (covered != rel.size()) throw PreconditionError("configuration does not refine relation " + sym.text());
    ++s;
  }
  return canonicalize(std::move(tau), subset, c.q);
}

inline AlgebraicSketch canonical_sketch(const Structure& a, const CoherentConfiguration& c) {
  return canonical_form(a, c).sketch;
}

inline AlgebraicSketch sketch_of(const Structure& a) { return canonical_sketch(a, refine_to_coarsest(a)); }

// ---- canonical unary encoding ----

inline constexpr char kSketchMagic[] = "DWLS1";

inline std::uint64_t encoded_size_bits(const AlgebraicSketch& d) {
  const std::uint64_t k = d.num_colors(), t = d.num_symbols();
  std::uint64_t bits = 40 + 32 + 32;
  for (const auto& s : d.tau()) bits += 32 + s.size();
  for (const auto& s : d.sigma()) bits += 32 + s.size();
  bits += k * t;
  bits += k * k * k;
  for (ColorId r = 0; r < k; ++r)
    for (const auto& e : d.q().row(r)) bits += e.count;
  return bits;
}

inline std::uint64_t encoded_size_bytes(const AlgebraicSketch& d) { return (encoded_size_bits(d) + 7) / 8; }

namespace detail {

class BitWriter {
 public:
  explicit BitWriter(std::uint64_t total_bits) : bytes_((total_bits + 7) / 8, 0) {}
  void put_bit(bool b) {
    if (b) bytes_[pos_ >> 3] |= static_cast<std::uint8_t>(0x80U >> (pos_ & 7));
    ++pos_;
  }
  void put_u32(std::uint32_t v) {
    for (int i = 31; i >= 0; --i) put_bit((v >> i) & 1U);
  }
  void put_ones(std::uint64_t count) {
    for (std::uint64_t i = 0; i < count; ++i) put_bit(true);
  }
  void skip(std::uint64_t zeros) { pos_ += zeros; }
  std::uint64_t position() const { return pos_; }
  std::vector<std::uint8_t> take() && { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t pos_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  bool get_bit() {
    if (pos_ >= bytes_.size() * 8) throw Error("sketch encoding truncated");
    bool b = (bytes_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1U;
    ++pos_;
    return b;
  }
  std::uint32_t get_u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 32; ++i) v = (v << 1) | (get_bit() ? 1U : 0U);
    return v;
  }
  std::uint64_t position() const { return pos_; }
  std::uint64_t size_bits() const { return bytes_.size() * 8; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::uint64_t pos_ = 0;
};

inline void put_symbols(BitWriter& w, const std::vector<Symbol>& symbols) {
  w.put_u32(static_cast<std::uint32_t>(symbols.size()));
  for (const auto& s : symbols) {
    w.put_u32(static_cast<std::uint32_t>(s.size()));
    for (char c : s.bits()) w.put_bit(c == '1');
  }
}

inline std::vector<Symbol> get_symbols(BitReader& r) {
  std::uint32_t count = r.get_u32();
  std::vector<Symbol> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t len = r.get_u32();
    if (len > r.size_bits()) throw Error("sketch encoding truncated");
    std::string bits(len, '0');
    for (auto& c : bits) c = r.get_bit() ? '1' : '0';
    out.emplace_back(std::move(bits));
  }
  return out;
}

}  // namespace detail

inline constexpr std::uint64_t kMaxEncodedBytes = std::uint64_t{1} << 32;

inline std::vector<std::uint8_t> encode_sketch(const AlgebraicSketch& d) {
  const std::uint64_t total = encoded_size_bits(d);
  if ((total + 7) / 8 > kMaxEncodedBytes)
    throw Error("sketch encoding would take " + std::to_string((total + 7) / 8) + " bytes; use a digest instead");
  detail::BitWriter w(total);
  for (int i = 0; i < 5; ++i)
    for (int b = 7; b >= 0; --b) w.put_bit((static_cast<unsigned char>(kSketchMagic[i]) >> b) & 1U);
  detail::put_symbols(w, d.tau());
  detail::put_symbols(w, d.sigma());
  for (auto b : d.subset_matrix()) w.put_bit(b != 0);
  const std::uint64_t k = d.num_colors();
  const std::uint64_t base = w.position();
  std::uint64_t ones = 0;
  for (ColorId r1 = 0; r1 < k; ++r1)
    for (const auto& e : d.q().row(r1)) {
      std::uint64_t triple = (std::uint64_t{r1} * k + e.second) * k + e.third;
      w.skip(base + triple + ones - w.position());
      w.put_ones(e.count);
      ones += e.count;
    }
  return std::move(w).take();
}

inline AlgebraicSketch decode_sketch(std::span<const std::uint8_t> bytes) {
  detail::BitReader r(bytes);
  for (int i = 0; i < 5; ++i) {
    unsigned v = 0;
    for (int b = 0; b < 8; ++b) v = (v << 1) | (r.get_bit() ? 1U : 0U);
    if (v != static_cast<unsigned char>(kSketchMagic[i])) throw Error("not a sketch encoding (bad magic)");
  }
  auto tau = detail::get_symbols(r);
  auto sigma = detail::get_symbols(r);
  const std::uint64_t k = sigma.size(), t = tau.size();
  if (k * t > r.size_bits()) throw Error("sketch encoding truncated");
  std::vector<std::uint8_t> subset(k * t);
  for (auto& b : subset) b = r.get_bit() ? 1 : 0;
  if (k * k * k > r.size_bits()) throw Error("sketch encoding truncated");
  std::vector<std::vector<IntersectionEntry>> rows(k);
  for (ColorId r1 = 0; r1 < k; ++r1)
    for (ColorId r2 = 0; r2 < k; ++r2)
      for (ColorId r3 = 0; r3 < k; ++r3) {
        std::uint32_t c = 0;
        while (r.get_bit()) ++c;
        if (c > 0) rows[r1].push_back({r2, r3, c});
      }
  if ((r.position() + 7) / 8 != bytes.size()) throw Error("trailing bytes after sketch encoding");
  while (r.position() < r.size_bits())
    if (r.get_bit()) throw Error("nonzero padding in sketch encoding");
  return AlgebraicSketch(std::move(tau), std::move(sigma), std::move(subset), IntersectionNumbers(std::move(rows)));
}

// Sparse canonical rendering used for hashing; same information as the unary encoding.
inline void feed_compact(Sha256& h, const AlgebraicSketch& d) {
  std::vector<std::uint8_t> buf;
  auto put32 = [&](std::uint32_t v) {
    for (int i = 3; i >= 0; --i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  buf.insert(buf.end(), {'D', 'W', 'L', 'C', '1'});
  for (const auto* syms : {&d.tau(), &d.sigma()}) {
    put32(static_cast<std::uint32_t>(syms->size()));
    for (const auto& s : *syms) {
      put32(static_cast<std::uint32_t>(s.size()));
      buf.insert(buf.end(), s.bits().begin(), s.bits().end());
    }
  }
  buf.insert(buf.end(), d.subset_matrix().begin(), d.subset_matrix().end());
  for (ColorId r = 0; r < d.num_colors(); ++r) {
    auto row = d.q().row(r);
    put32(static_cast<std::uint32_t>(row.size()));
    for (const auto& e : row) {
      put32(e.second);
      put32(e.third);
      put32(e.count);
    }
    if (buf.size() > (1U << 20)) {
      h.update(buf);
      buf.clear();
    }
  }
  h.update(buf);
}

inline Digest sketch_digest(const AlgebraicSketch& d) {
  Sha256 h;
  feed_compact(h, d);
  return h.finish();
}

// Human-readable dump for debugging. Not the canonical encoding.
inline std::string render_sketch_debug(const AlgebraicSketch& d) {
  std::ostringstream out;
  out << "# debug rendering, not the canonical encoding\n";
  out << "tau:";
  for (const auto& s : d.tau()) out << ' ' << s.text();
  out << "\nsigma:";
  for (const auto& s : d.sigma()) out << ' ' << s.text();
  out << '\n';
  for (ColorId r = 0; r < d.num_colors(); ++r) {
    out << "color " << d.sigma()[r].text() << (d.is_diagonal(r) ? " diag" : "") << " conv "
        << d.sigma()[d.converse(r)].text() << " size " << d.meta().size[r] << " in {";
    bool first = true;
    for (std::size_t s = 0; s < d.num_symbols(); ++s)
      if (d.inside(r, s)) {
        out << (first ? "" : " ") << d.tau()[s].text();
        first = false;
      }
    out << "}\n";
    for (const auto& e : d.q().row(r))
      out << "  q(" << d.sigma()[r].text() << ',' << d.sigma()[e.second].text() << ',' << d.sigma()[e.third].text()
          << ") = " << e.count << '\n';
  }
  return out.str();
}

}  // namespace dwl
