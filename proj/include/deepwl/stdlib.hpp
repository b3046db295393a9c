#pragma once

// Sketch-only operations. Each one reads the current sketch, issues machine commands through
// the channel and returns the symbol it produced. Temporaries are forgotten before returning.

#include <string>
#include <vector>

#include "deepwl/machine.hpp"
#include "deepwl/sketch_ops.hpp"

namespace dwl::stdlib {

// Colors inside relation symbol e.
inline ColorMask inside_mask(const AlgebraicSketch& d, const Symbol& e) {
  const std::size_t s = d.require_symbol(e);
  ColorMask m(d.num_colors(), false);
  for (ColorId r = 0; r < d.num_colors(); ++r) m[r] = d.inside(r, s);
  return m;
}

inline ColorMask converse_mask(const AlgebraicSketch& d, const ColorMask& m) {
  ColorMask out(d.num_colors(), false);
  for (ColorId r = 0; r < d.num_colors(); ++r) out[r] = m[d.converse(r)];
  return out;
}

inline Symbol create_mask(Channel& ch, const ColorMask& m) { return ch.create(ch.color_names(m)); }

enum class BooleanKind { kUnion, kIntersection, kDifference };

inline Symbol op_boolean(Channel& ch, BooleanKind kind, const Symbol& e1, const Symbol& e2) {
  const auto& d = ch.sketch();
  const auto a = inside_mask(d, e1), b = inside_mask(d, e2);
  ColorMask m(d.num_colors(), false);
  for (ColorId r = 0; r < d.num_colors(); ++r) {
    switch (kind) {
      case BooleanKind::kUnion: m[r] = a[r] || b[r]; break;
      case BooleanKind::kIntersection: m[r] = a[r] && b[r]; break;
      case BooleanKind::kDifference: m[r] = a[r] && !b[r]; break;
    }
  }
  return create_mask(ch, m);
}

// Colors R with q(R', R'', R) = 0 whenever R' != R''.
inline ColorMask diagonal_mask(const AlgebraicSketch& d) {
  ColorMask m(d.num_colors(), true);
  for (ColorId r1 = 0; r1 < d.num_colors(); ++r1)
    for (const auto& e : d.q().row(r1))
      if (r1 != e.second) m[e.third] = false;
  return m;
}

inline Symbol op_diag(Channel& ch) { return create_mask(ch, diagonal_mask(ch.sketch())); }

// R is inside the converse of e1 iff some diagonal R2 has q(R2, R1, R) >= 1 with R1 inside e1 and R = R1^-1.
inline Symbol op_converse(Channel& ch, const Symbol& e1) {
  const auto& d = ch.sketch();
  const auto diag = diagonal_mask(d);
  const auto a = inside_mask(d, e1);
  ColorMask m(d.num_colors(), false);
  for (ColorId r2 = 0; r2 < d.num_colors(); ++r2) {
    if (!diag[r2]) continue;
    for (const auto& e : d.q().row(r2))
      if (a[e.second]) m[e.third] = true;
  }
  return create_mask(ch, m);
}

inline Symbol op_compose(Channel& ch, const Symbol& e1, const Symbol& e2) {
  const auto& d = ch.sketch();
  return create_mask(ch, compose_mask(d, inside_mask(d, e1), inside_mask(d, e2)));
}

// Same-component relation: the union of all powers of e1, intersected with its converse.
inline Symbol op_scc(Channel& ch, const Symbol& e1) {
  const auto& d = ch.sketch();
  ColorMask power = inside_mask(d, e1);
  ColorMask closure = power;
  // Paths have at most n edges before repeating a vertex.
  for (std::uint64_t step = 1; step < d.vertex_count(); ++step) {
    power = compose_mask(d, power, inside_mask(d, e1));
    bool grew = false;
    for (ColorId r = 0; r < d.num_colors(); ++r)
      if (power[r] && !closure[r]) closure[r] = grew = true;
    if (!grew) break;
  }
  const auto back = converse_mask(d, closure);
  ColorMask m(d.num_colors(), false);
  for (ColorId r = 0; r < d.num_colors(); ++r) m[r] = closure[r] && back[r];
  return create_mask(ch, m);
}

inline bool query_subset(const Channel& ch, const Symbol& e1, const Symbol& e2) {
  const auto& d = ch.sketch();
  const auto a = inside_mask(d, e1), b = inside_mask(d, e2);
  for (ColorId r = 0; r < d.num_colors(); ++r)
    if (a[r] && !b[r]) return false;
  return true;
}

inline bool query_equal(const Channel& ch, const Symbol& e1, const Symbol& e2) {
  return query_subset(ch, e1, e2) && query_subset(ch, e2, e1);
}

// |E| = sum of |R| over the colors inside E, all sizes read off q.
inline std::uint64_t cardinality(const Channel& ch, const Symbol& e1) {
  const auto& d = ch.sketch();
  const auto a = inside_mask(d, e1);
  std::uint64_t total = 0;
  for (ColorId r = 0; r < d.num_colors(); ++r)
    if (a[r]) total += d.meta().size[r];
  return total;
}

enum class Projection { kDomain, kCodomain, kSupport };

// Diagonal colors D with D∘E (domain) or E∘D (codomain) nonempty: q(R, D, R) or q(R, R, D) >= 1 for R inside E.
inline Symbol op_projection(Channel& ch, const Symbol& e, Projection which) {
  const auto& d = ch.sketch();
  const auto a = inside_mask(d, e);
  const auto diag = diagonal_mask(d);
  ColorMask m(d.num_colors(), false);
  for (ColorId r = 0; r < d.num_colors(); ++r) {
    if (!diag[r]) continue;
    bool dom = false, cod = false;
    for (ColorId x = 0; x < d.num_colors(); ++x) {
      if (!a[x]) continue;
      dom = dom || d.q()(x, r, x) >= 1;
      cod = cod || d.q()(x, x, r) >= 1;
    }
    m[r] = which == Projection::kDomain ? dom : which == Projection::kCodomain ? cod : (dom || cod);
  }
  return create_mask(ch, m);
}

inline Symbol op_dom(Channel& ch, const Symbol& e) { return op_projection(ch, e, Projection::kDomain); }
inline Symbol op_codom(Channel& ch, const Symbol& e) { return op_projection(ch, e, Projection::kCodomain); }
inline Symbol op_supp(Channel& ch, const Symbol& e) { return op_projection(ch, e, Projection::kSupport); }

// addPair(e) issued one color at a time; returns the combined D symbol.
inline Symbol pure_add_pair(Channel& ch, const Symbol& e) {
  std::vector<ColorId> inside = mask_members(inside_mask(ch.sketch(), e));
  if (inside.empty()) {
    if (!ch.pair_symbols().left || !ch.pair_symbols().right) {
      // Direct addPair would introduce both pair symbols here, empty.
      ch.create({});
      ch.create({});
    }
    return ch.create({});
  }
  std::vector<Symbol> pieces, temporaries;
  Symbol current = e;
  ColorId color = inside.front();
  while (true) {
    const Symbol piece = ch.add_pair(ch.sketch().sigma()[color]);
    pieces.push_back(piece);
    const auto& d = ch.sketch();
    // Pairs just materialised: E_left ∘ piece ∘ E_right^-1.
    const auto left = inside_mask(d, *ch.pair_symbols().left);
    const auto right_back = converse_mask(d, inside_mask(d, *ch.pair_symbols().right));
    const auto done = compose_mask(d, compose_mask(d, left, inside_mask(d, piece)), right_back);
    ColorMask rest = inside_mask(d, current);
    for (ColorId r = 0; r < d.num_colors(); ++r) rest[r] = rest[r] && !done[r];
    if (mask_members(rest).empty()) break;
    current = create_mask(ch, rest);
    temporaries.push_back(current);
    color = mask_members(inside_mask(ch.sketch(), current)).front();
  }
  ColorMask all_pieces(ch.sketch().num_colors(), false);
  for (const auto& p : pieces) {
    const auto m = inside_mask(ch.sketch(), p);
    for (ColorId r = 0; r < m.size(); ++r) all_pieces[r] = all_pieces[r] || m[r];
  }
  const Symbol combined = create_mask(ch, all_pieces);
  for (const auto& t : temporaries) ch.forget(t);
  for (const auto& p : pieces) ch.forget(p);
  // Re-create under the least free name, which is what a direct addPair would have used.
  const Symbol result = create_mask(ch, inside_mask(ch.sketch(), combined));
  ch.forget(combined);
  return result;
}

struct SetClass {
  bool aligned = false;
  bool homogeneous = false;
  bool discrete = false;

  std::string text() const {
    if (!aligned) return "not-aligned";
    if (homogeneous && discrete) return "homogeneous,discrete";
    if (homogeneous) return "homogeneous";
    if (discrete) return "discrete";
    return "colour-aligned";
  }
};

// Classifies U = supp(E_U) against the configuration of the structure without E_U.
inline SetClass classify_set(Channel& ch, const Symbol& e_u) {
  const auto before = ch.sketch();
  const auto u = inside_mask(before, e_u);
  for (ColorId r = 0; r < before.num_colors(); ++r)
    if (u[r] && !before.is_diagonal(r)) throw PreconditionError("relation " + e_u.text() + " is not diagonal");
  const Symbol everything = op_diag(ch);
  Vocabulary rest = before.vocabulary();
  rest.erase(e_u);
  const auto without = sketch_of_subrestriction(ch.sketch(), rest, everything);
  ch.forget(everything);
  SetClass out;
  out.aligned = without.num_colors() == before.num_colors();
  if (!out.aligned) return out;
  std::size_t fibers = 0;
  out.discrete = true;
  for (ColorId r = 0; r < before.num_colors(); ++r)
    if (u[r]) {
      ++fibers;
      if (before.meta().fiber_size[r] != 1) out.discrete = false;
    }
  out.homogeneous = fibers == 1;
  return out;
}

}  // namespace dwl::stdlib
