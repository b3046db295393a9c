#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <optional>
#include <unordered_map>
#include <vector>

#include "deepwl/sketch.hpp"

namespace dwl {

// Indicator over the colors of one sketch.
using ColorMask = std::vector<bool>;

inline std::vector<ColorId> mask_members(const ColorMask& m) {
  std::vector<ColorId> out;
  for (ColorId r = 0; r < m.size(); ++r)
    if (m[r]) out.push_back(r);
  return out;
}

// Colors R with q(R, a, b) >= 1 for some a in `first`, b in `second`.
inline ColorMask compose_mask(const AlgebraicSketch& d, const ColorMask& first, const ColorMask& second) {
  ColorMask out(d.num_colors(), false);
  for (ColorId r = 0; r < d.num_colors(); ++r)
    for (const auto& e : d.q().row(r))
      if (first[e.second] && second[e.third]) {
        out[r] = true;
        break;
      }
  return out;
}

// Colors of seed ∪ seed² ∪ seed³ ∪ ...
inline ColorMask transitive_closure(const AlgebraicSketch& d, ColorMask seed) {
  while (true) {
    ColorMask next = compose_mask(d, seed, seed);
    bool grew = false;
    for (ColorId r = 0; r < next.size(); ++r)
      if (next[r] && !seed[r]) {
        seed[r] = true;
        grew = true;
      }
    if (!grew) return seed;
  }
}

// Diagonal colors plus colors inside some relation or its converse.
inline ColorMask gaifman_mask(const AlgebraicSketch& d) {
  ColorMask m(d.num_colors(), false);
  for (ColorId r = 0; r < d.num_colors(); ++r) {
    if (d.is_diagonal(r)) m[r] = true;
    for (std::size_t s = 0; s < d.num_symbols(); ++s)
      if (d.inside(r, s) || d.inside(d.converse(r), s)) m[r] = true;
  }
  return m;
}

// Colors joining vertices of the same Gaifman component.
inline ColorMask connectivity_mask(const AlgebraicSketch& d) { return transitive_closure(d, gaifman_mask(d)); }

// Number of Gaifman components: the sum over fibers D of |D| / (component size seen from D).
inline std::uint64_t count_components(const AlgebraicSketch& d) {
  const auto conn = connectivity_mask(d);
  const auto& m = d.meta();
  std::vector<std::uint64_t> comp_size(d.num_colors(), 0);
  for (ColorId r = 0; r < d.num_colors(); ++r)
    if (conn[r]) comp_size[m.dom[r]] += m.valency[r];
  std::uint64_t num = 0, den = 1;
  for (ColorId r = 0; r < d.num_colors(); ++r) {
    if (!m.diagonal[r]) continue;
    std::uint64_t a = m.fiber_size[r], b = comp_size[r];
    num = num * b + a * den;
    den *= b;
    std::uint64_t g = std::gcd(num, den);
    num /= g;
    den /= g;
  }
  if (den != 1) throw PreconditionError("inconsistent component sizes in sketch");
  return num;
}

namespace detail {

inline std::vector<std::size_t> symbol_positions(const std::vector<Symbol>& from, const std::vector<Symbol>& to) {
  std::vector<std::size_t> pos;
  for (const auto& s : from) pos.push_back(static_cast<std::size_t>(std::lower_bound(to.begin(), to.end(), s) - to.begin()));
  return pos;
}

}  // namespace detail

// Sketch of A[sub_vocab, U] where U is the support of the diagonal relation e_u.
inline AlgebraicSketch sketch_of_subrestriction(const AlgebraicSketch& d, const Vocabulary& sub_vocab, const Symbol& e_u) {
  const std::size_t su = d.require_symbol(e_u);
  for (const auto& s : sub_vocab) d.require_symbol(s);
  const auto& m = d.meta();
  ColorMask in_u(d.num_colors(), false);
  for (ColorId r = 0; r < d.num_colors(); ++r)
    if (d.inside(r, su)) {
      if (!m.diagonal[r]) throw PreconditionError("relation " + e_u.text() + " is not diagonal");
      in_u[r] = true;
    }
  constexpr ColorId kDropped = ~ColorId{0};
  std::vector<ColorId> index(d.num_colors(), kDropped);
  ColorId kept = 0;
  for (ColorId r = 0; r < d.num_colors(); ++r)
    if (in_u[m.dom[r]] && in_u[m.cod[r]]) index[r] = kept++;
  std::vector<Symbol> tau(sub_vocab.begin(), sub_vocab.end());
  std::vector<std::size_t> cols;
  for (const auto& s : tau) cols.push_back(*d.symbol_index(s));
  std::vector<std::uint8_t> subset(kept * tau.size());
  std::vector<std::vector<IntersectionEntry>> rows(kept);
  for (ColorId r = 0; r < d.num_colors(); ++r) {
    if (index[r] == kDropped) continue;
    for (std::size_t j = 0; j < cols.size(); ++j) subset[index[r] * tau.size() + j] = d.inside(r, cols[j]);
    for (const auto& e : d.q().row(r))
      if (index[e.second] != kDropped && index[e.third] != kDropped)
        rows[index[r]].push_back({index[e.second], index[e.third], e.count});
  }
  return canonicalize(std::move(tau), subset, IntersectionNumbers(std::move(rows))).sketch;
}

// Sketch of the disjoint union of two structures given by their sketches.
inline AlgebraicSketch sketch_of_disjoint_union(const AlgebraicSketch& d1, const AlgebraicSketch& d2) {
  if (d1.tau() != d2.tau()) throw PreconditionError("disjoint union needs identical vocabularies");
  const std::array<const AlgebraicSketch*, 2> part{&d1, &d2};
  const std::array<ColorId, 2> offset{0, static_cast<ColorId>(d1.num_colors())};
  ColorId next = static_cast<ColorId>(d1.num_colors() + d2.num_colors());
  // crossing[s][(d, f)] = color from fiber d on side s to fiber f on the other side.
  std::array<std::map<std::pair<ColorId, ColorId>, ColorId>, 2> crossing;
  for (int s = 0; s < 2; ++s)
    for (ColorId a = 0; a < part[s]->num_colors(); ++a)
      if (part[s]->is_diagonal(a))
        for (ColorId b = 0; b < part[1 - s]->num_colors(); ++b)
          if (part[1 - s]->is_diagonal(b)) crossing[s][{a, b}] = next++;
  const std::size_t k = next, t = d1.num_symbols();
  std::vector<std::vector<IntersectionEntry>> rows(k);
  std::vector<std::uint8_t> subset(k * t, 0);
  for (int s = 0; s < 2; ++s) {
    const auto& d = *part[s];
    const auto& other = *part[1 - s];
    const auto& m = d.meta();
    const auto& mo = other.meta();
    for (ColorId r = 0; r < d.num_colors(); ++r) {
      auto& row = rows[offset[s] + r];
      for (std::size_t j = 0; j < t; ++j) subset[(offset[s] + r) * t + j] = d.inside(r, j);
      for (const auto& e : d.q().row(r)) row.push_back({offset[s] + e.second, offset[s] + e.third, e.count});
      // midpoint on the other side
      for (ColorId f = 0; f < other.num_colors(); ++f)
        if (mo.diagonal[f])
          row.push_back({crossing[s].at({m.dom[r], f}), crossing[1 - s].at({f, m.cod[r]}),
                         static_cast<std::uint32_t>(mo.fiber_size[f])});
    }
    // crossing colors a (side s) -> b (other side)
    for (const auto& [key, x] : crossing[s]) {
      auto [a, b] = key;
      auto& row = rows[x];
      for (ColorId r2 = 0; r2 < d.num_colors(); ++r2)  // midpoint on u's side
        if (m.dom[r2] == a)
          row.push_back({offset[s] + r2, crossing[s].at({m.cod[r2], b}), static_cast<std::uint32_t>(m.valency[r2])});
      for (ColorId r3 = 0; r3 < other.num_colors(); ++r3)  // midpoint on v's side
        if (mo.cod[r3] == b)
          row.push_back({crossing[s].at({a, mo.dom[r3]}), offset[1 - s] + r3,
                         static_cast<std::uint32_t>(mo.valency[mo.converse[r3]])});
    }
  }
  return canonicalize(d1.tau(), subset, IntersectionNumbers(std::move(rows))).sketch;
}

// Sketch after contracting the strongly connected components of color r.
inline AlgebraicSketch sketch_of_contraction(const AlgebraicSketch& d, ColorId r) {
  const std::size_t k = d.num_colors();
  if (r >= k) throw UnknownName("unknown color index " + std::to_string(r));
  const auto& m = d.meta();
  ColorMask seed(k, false);
  seed[r] = true;
  const ColorMask closure = transitive_closure(d, seed);
  ColorMask scc(k, false);
  for (ColorId x = 0; x < k; ++x) scc[x] = closure[x] && closure[m.converse[x]];
  // E_V: identity outside the components, same-component inside.
  ColorMask ev(k, false);
  for (ColorId x = 0; x < k; ++x) ev[x] = scc[x] || (m.diagonal[x] && !scc[x]);

  std::vector<ColorId> parent(k);
  std::iota(parent.begin(), parent.end(), ColorId{0});
  auto find = [&](ColorId x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  constexpr ColorId kNone = ~ColorId{0};
  std::vector<ColorId> owner(k, kNone);
  for (ColorId x = 0; x < k; ++x) {
    ColorMask single(k, false);
    single[x] = true;
    ColorMask image = compose_mask(d, compose_mask(d, ev, single), ev);
    for (ColorId y = 0; y < k; ++y) {
      if (!image[y]) continue;
      if (owner[y] == kNone) owner[y] = x;
      else {
        ColorId a = find(owner[y]), b = find(x);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<ColorId> cls(k);
  std::vector<ColorId> rep;
  std::map<ColorId, ColorId> root_to_class;
  for (ColorId x = 0; x < k; ++x) {
    auto [it, inserted] = root_to_class.try_emplace(find(x), static_cast<ColorId>(rep.size()));
    if (inserted) rep.push_back(x);
    cls[x] = it->second;
  }
  // Component size seen from the (unique) diagonal color inside the components.
  std::uint64_t comp_size = 1;
  std::optional<ColorId> comp_fiber;
  for (ColorId x = 0; x < k; ++x)
    if (scc[x] && m.diagonal[x]) comp_fiber = x;
  if (comp_fiber) {
    comp_size = 0;
    for (ColorId x = 0; x < k; ++x)
      if (scc[x] && m.dom[x] == *comp_fiber) comp_size += m.valency[x];
  }

  std::vector<Symbol> tau = d.tau();
  const Symbol dx = fresh_symbol(d.vocabulary());
  tau.push_back(dx);
  std::sort(tau.begin(), tau.end());
  const auto old_pos = detail::symbol_positions(d.tau(), tau);
  const std::size_t dx_pos = static_cast<std::size_t>(std::lower_bound(tau.begin(), tau.end(), dx) - tau.begin());
  const std::size_t nc = rep.size(), t = tau.size();
  std::vector<std::uint8_t> subset(nc * t, 0);
  for (ColorId x = 0; x < k; ++x)
    for (std::size_t s = 0; s < d.num_symbols(); ++s)
      if (d.inside(x, s)) subset[cls[x] * t + old_pos[s]] = 1;
  if (comp_fiber) subset[cls[*comp_fiber] * t + dx_pos] = 1;

  std::vector<std::vector<IntersectionEntry>> rows(nc);
  for (ColorId c = 0; c < nc; ++c) {
    std::map<std::pair<ColorId, ColorId>, std::uint64_t> sums;
    for (const auto& e : d.q().row(rep[c])) sums[{cls[e.second], cls[e.third]}] += e.count;
    for (const auto& [key, sum] : sums) {
      // The midpoint class determines whether w was a component member.
      ColorId any_member = kNone;
      for (ColorId x = 0; x < k && any_member == kNone; ++x)
        if (cls[x] == key.first) any_member = x;
      std::uint64_t divisor = (comp_fiber && m.cod[any_member] == *comp_fiber) ? comp_size : 1;
      if (sum % divisor != 0) throw Error("contraction sketch: intersection sum not divisible by component size");
      rows[c].push_back({key.first, key.second, static_cast<std::uint32_t>(sum / divisor)});
    }
  }
  return canonicalize(std::move(tau), subset, IntersectionNumbers(std::move(rows))).sketch;
}

// Names of the pair-edge symbols, once allocated.
struct PairSymbols {
  std::optional<Symbol> left;
  std::optional<Symbol> right;
  friend bool operator==(const PairSymbols&, const PairSymbols&) = default;
};

namespace detail {

struct PointKind {
  bool pair = false;
  ColorId color = 0;  // fiber for plain vertices, the pair color otherwise
  auto operator<=>(const PointKind&) const = default;
};

// Colored pattern on {p1(u), p2(u), p1(v), p2(v)}; col[i*2+j] = color(p_i(u), p_j(v)).
struct CrossingType {
  PointKind u, v;
  std::array<ColorId, 4> col{};
  auto operator<=>(const CrossingType&) const = default;
};

}  // namespace detail

// Sketch after addPair of every color in omega, for a state made of exactly two components
// where every omega color joins the two components.
inline AlgebraicSketch sketch_of_crossing_pairs(const AlgebraicSketch& d, std::vector<ColorId> omega,
                                                const PairSymbols& existing = {}) {
  using detail::CrossingType;
  using detail::PointKind;
  std::sort(omega.begin(), omega.end());
  omega.erase(std::unique(omega.begin(), omega.end()), omega.end());
  const std::size_t k = d.num_colors();
  for (ColorId w : omega)
    if (w >= k) throw UnknownName("unknown color index " + std::to_string(w));
  if (omega.empty()) return d;
  if (count_components(d) != 2) throw PreconditionError("state not normalised: expected exactly two components");
  const ColorMask plain = connectivity_mask(d);
  for (ColorId w : omega)
    if (plain[w]) throw PreconditionError("color " + d.sigma()[w].text() + " is not crossing");
  if (existing.left.has_value() != existing.right.has_value())
    throw PreconditionError("pair symbols must be given together");
  if (existing.left) {
    d.require_symbol(*existing.left);
    d.require_symbol(*existing.right);
  }
  const auto& m = d.meta();

  std::map<std::pair<ColorId, ColorId>, ColorId> cross;
  std::map<std::pair<ColorId, ColorId>, std::vector<ColorId>> plain_between;
  std::vector<std::vector<ColorId>> plain_into(k);
  for (ColorId x = 0; x < k; ++x) {
    if (plain[x]) {
      plain_between[{m.dom[x], m.cod[x]}].push_back(x);
      plain_into[m.cod[x]].push_back(x);
    } else {
      cross[{m.dom[x], m.cod[x]}] = x;
    }
  }
  auto cross_of = [&](ColorId a, ColorId b) -> std::optional<ColorId> {
    auto it = cross.find({a, b});
    if (it == cross.end()) return std::nullopt;
    return it->second;
  };
  auto plain_of = [&](ColorId a, ColorId b) -> const std::vector<ColorId>& {
    static const std::vector<ColorId> kEmpty;
    auto it = plain_between.find({a, b});
    return it == plain_between.end() ? kEmpty : it->second;
  };

  std::map<CrossingType, ColorId> type_id;
  std::vector<CrossingType> types;
  auto add_type = [&](const CrossingType& t) {
    if (type_id.emplace(t, static_cast<ColorId>(types.size())).second) types.push_back(t);
  };
  for (ColorId c = 0; c < k; ++c) add_type({{false, m.dom[c]}, {false, m.cod[c]}, {c, c, c, c}});
  std::vector<CrossingType> plain_to_pair;
  for (ColorId rho : omega) {
    const ColorId f1 = m.dom[rho], f2 = m.cod[rho];
    for (ColorId x : plain_into[f1])
      if (auto kx = cross_of(m.dom[x], f2)) plain_to_pair.push_back({{false, m.dom[x]}, {true, rho}, {x, *kx, x, *kx}});
    for (ColorId y : plain_into[f2])
      if (auto ky = cross_of(m.dom[y], f1)) plain_to_pair.push_back({{false, m.dom[y]}, {true, rho}, {*ky, y, *ky, y}});
  }
  for (const auto& t : plain_to_pair) {
    add_type(t);
    CrossingType back{t.v, t.u, {}};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) back.col[i * 2 + j] = m.converse[t.col[j * 2 + i]];
    add_type(back);
  }
  for (ColorId rho : omega)
    for (ColorId rho2 : omega) {
      const ColorId a1 = m.dom[rho], a2 = m.cod[rho], b1 = m.dom[rho2], b2 = m.cod[rho2];
      if (auto k1 = cross_of(a1, b2), k2 = cross_of(a2, b1); k1 && k2)
        for (ColorId x : plain_of(a1, b1))
          for (ColorId y : plain_of(a2, b2)) add_type({{true, rho}, {true, rho2}, {x, *k1, *k2, y}});
      if (auto k1 = cross_of(a1, b1), k2 = cross_of(a2, b2); k1 && k2)
        for (ColorId x : plain_of(a1, b2))
          for (ColorId y : plain_of(a2, b1)) add_type({{true, rho}, {true, rho2}, {*k1, x, y, *k2}});
    }

  // Vocabulary after the additions.
  Vocabulary used = d.vocabulary();
  Symbol left, right;
  if (existing.left) {
    left = *existing.left;
    right = *existing.right;
  } else {
    left = fresh_symbol(used);
    used.insert(left);
    right = fresh_symbol(used);
    used.insert(right);
  }
  std::vector<Symbol> pair_diag;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    pair_diag.push_back(fresh_symbol(used));
    used.insert(pair_diag.back());
  }
  std::vector<Symbol> tau(used.begin(), used.end());
  const std::size_t t = tau.size(), nt = types.size();
  auto pos = [&](const Symbol& s) { return static_cast<std::size_t>(std::lower_bound(tau.begin(), tau.end(), s) - tau.begin()); };
  std::vector<std::uint8_t> subset(nt * t, 0);
  const auto old_pos = detail::symbol_positions(d.tau(), tau);
  const std::size_t left_pos = pos(left), right_pos = pos(right);
  for (ColorId id = 0; id < nt; ++id) {
    const auto& ty = types[id];
    if (!ty.u.pair && !ty.v.pair) {
      for (std::size_t s = 0; s < d.num_symbols(); ++s)
        if (d.inside(ty.col[0], s)) subset[id * t + old_pos[s]] = 1;
    } else if (!ty.u.pair && ty.v.pair) {
      if (m.diagonal[ty.col[0]]) subset[id * t + left_pos] = 1;
      if (m.diagonal[ty.col[1]]) subset[id * t + right_pos] = 1;
    } else if (ty.u.pair && ty.v.pair && ty.u == ty.v && m.diagonal[ty.col[0]] && m.diagonal[ty.col[3]]) {
      auto idx = static_cast<std::size_t>(std::lower_bound(omega.begin(), omega.end(), ty.u.color) - omega.begin());
      subset[id * t + pos(pair_diag[idx])] = 1;
    }
  }

  // Base points: 0,1 belong to u and 2,3 to v; a plain vertex uses its first point only.
  auto point_fiber = [&](const PointKind& kind, int idx) { return kind.pair ? (idx == 0 ? m.dom[kind.color] : m.cod[kind.color]) : kind.color; };
  auto within = [&](const PointKind& kind, int i, int j) -> ColorId {
    if (!kind.pair || i == j) return point_fiber(kind, i);
    return i == 0 ? kind.color : m.converse[kind.color];
  };
  // color between base point a and b of pattern e1 (points 0,1 of u; 2,3 of v)
  auto color_between = [&](const CrossingType& e1, int a, int b) -> ColorId {
    if (a < 2 && b < 2) return within(e1.u, a, b);
    if (a >= 2 && b >= 2) return within(e1.v, a - 2, b - 2);
    if (a < 2) return e1.col[a * 2 + (b - 2)];
    return m.converse[e1.col[b * 2 + (a - 2)]];
  };

  auto count = [&](const CrossingType& e1, const CrossingType& e2, const CrossingType& e3) -> std::uint64_t {
    const PointKind& wk = e2.v;
    std::vector<int> points;
    points.push_back(0);
    if (e1.u.pair) points.push_back(1);
    points.push_back(2);
    if (e1.v.pair) points.push_back(3);
    const int wcount = wk.pair ? 2 : 1;
    std::array<bool, 2> same_as_first_u{};
    std::uint64_t product = 1;
    for (int j = 0; j < wcount; ++j) {
      const ColorId fw = point_fiber(wk, j);
      std::vector<std::pair<int, ColorId>> pl, cr;  // (point, constraint color oriented from u-point / to v-point)
      for (int p : points) {
        ColorId c = p < 2 ? e2.col[p * 2 + j] : e3.col[j * 2 + (p - 2)];
        ColorId into_w = p < 2 ? c : m.converse[c];  // oriented point -> w
        if (m.cod[into_w] != fw) return 0;
        (plain[c] ? pl : cr).emplace_back(p, c);
      }
      for (std::size_t x = 0; x < pl.size(); ++x)
        for (std::size_t y = x + 1; y < pl.size(); ++y)
          if (!plain[color_between(e1, pl[x].first, pl[y].first)]) return 0;
      for (std::size_t x = 0; x < cr.size(); ++x)
        for (std::size_t y = x + 1; y < cr.size(); ++y)
          if (!plain[color_between(e1, cr[x].first, cr[y].first)]) return 0;
      for (const auto& a : pl)
        for (const auto& b : cr)
          if (plain[color_between(e1, a.first, b.first)]) return 0;
      same_as_first_u[j] = !pl.empty() && pl.front().first == 0;
      const std::pair<int, ColorId>* xu = nullptr;
      const std::pair<int, ColorId>* yv = nullptr;
      for (const auto& c : pl) {
        if (c.first < 2 && !xu) xu = &c;
        if (c.first >= 2 && !yv) yv = &c;
      }
      std::uint64_t here;
      if (xu && yv) here = d.q()(color_between(e1, xu->first, yv->first), xu->second, yv->second);
      else if (xu) here = m.valency[xu->second];
      else if (yv) here = m.valency[m.converse[yv->second]];
      else {
        const auto& c = cr.front();
        here = c.first < 2 ? m.valency[c.second] : m.valency[m.converse[c.second]];
      }
      if (here == 0) return 0;
      product *= here;
    }
    if (wk.pair && same_as_first_u[0] == same_as_first_u[1]) return 0;
    return product;
  };

  std::map<PointKind, std::vector<ColorId>> by_u;
  std::map<std::pair<PointKind, PointKind>, std::vector<ColorId>> by_uv;
  for (ColorId id = 0; id < nt; ++id) {
    by_u[types[id].u].push_back(id);
    by_uv[{types[id].u, types[id].v}].push_back(id);
  }
  std::vector<std::vector<IntersectionEntry>> rows(nt);
  for (ColorId i1 = 0; i1 < nt; ++i1) {
    const auto& e1 = types[i1];
    for (ColorId i2 : by_u[e1.u]) {
      const auto& e2 = types[i2];
      auto it = by_uv.find({e2.v, e1.v});
      if (it == by_uv.end()) continue;
      for (ColorId i3 : it->second) {
        auto c = count(e1, e2, types[i3]);
        if (c > 0) rows[i1].push_back({i2, i3, static_cast<std::uint32_t>(c)});
      }
    }
  }
  return canonicalize(std::move(tau), subset, IntersectionNumbers(std::move(rows))).sketch;
}

}  // namespace dwl
