#pragma once

#include <bit>
#include <map>
#include <vector>

#include "deepwl/harness/fixtures.hpp"
#include "deepwl/structure.hpp"

namespace dwl {

struct CfiGadgetVertex {
  Vertex base;
  std::uint32_t subset;  // bit i set: the i-th incident base edge is in the subset
};

struct CfiPair {
  Structure base;
  Structure untwisted;
  Structure twisted;
  std::vector<CfiGadgetVertex> gadget;  // shared vertex layout of both outputs
  VertexPair twisted_edge;
};

// Compact CFI construction: for every base vertex one gadget vertex per even subset of its
// incident edges. Across a base edge e, gadget vertices are adjacent iff they agree on e;
// the twisted copy flips this on one edge. Base vertices are marked by diagonal relations.
inline CfiPair cfi_pair(const Structure& base) {
  if (base.relations().size() != 1) throw PreconditionError("CFI base must have exactly one relation");
  const Relation& edges = base.relations().begin()->second;
  const std::size_t n = base.size();
  std::vector<std::vector<Vertex>> incident(n);
  for (auto [u, v] : edges) {
    if (u == v) throw PreconditionError("CFI base must be loop-free");
    if (!relation_contains(edges, v, u)) throw PreconditionError("CFI base must be undirected");
    incident[u].push_back(v);
  }
  if (edges.empty()) throw PreconditionError("CFI base has no edges");
  if (connected_components(base).size() != 1) throw PreconditionError("CFI base must be connected");
  for (const auto& inc : incident)
    if (inc.size() > 20) throw PreconditionError("CFI base degree too large");

  CfiPair out;
  out.base = base;
  std::vector<std::map<std::uint32_t, Vertex>> index(n);
  for (Vertex v = 0; v < n; ++v)
    for (std::uint32_t s = 0; s < (1U << incident[v].size()); ++s)
      if (std::popcount(s) % 2 == 0) {
        index[v][s] = static_cast<Vertex>(out.gadget.size());
        out.gadget.push_back({v, s});
      }
  out.twisted_edge = edges.front();
  auto position = [&](Vertex v, Vertex w) {
    return static_cast<std::uint32_t>(std::find(incident[v].begin(), incident[v].end(), w) - incident[v].begin());
  };
  Relation plain, twisted;
  for (auto [v, w] : edges) {
    const bool flip = VertexPair{std::min(v, w), std::max(v, w)} == out.twisted_edge;
    const auto pv = position(v, w), pw = position(w, v);
    for (auto [s, x] : index[v])
      for (auto [t, y] : index[w]) {
        const bool agree = ((s >> pv) & 1U) == ((t >> pw) & 1U);
        if (agree) plain.emplace_back(x, y);
        if (agree != flip) twisted.emplace_back(x, y);
      }
  }
  // Base-vertex markers get the least names after the edge symbol.
  std::map<Symbol, Relation> colors;
  Vocabulary used{kEdgeSymbol};
  for (Vertex v = 0; v < n; ++v) {
    const Symbol name = fresh_symbol(used);
    used.insert(name);
    Relation diag;
    for (auto [s, x] : index[v]) diag.emplace_back(x, x);
    colors.emplace(name, std::move(diag));
  }
  auto build = [&](Relation adjacency) {
    auto rels = colors;
    rels.emplace(kEdgeSymbol, std::move(adjacency));
    return Structure(out.gadget.size(), std::move(rels));
  };
  out.untwisted = build(std::move(plain));
  out.twisted = build(std::move(twisted));
  return out;
}

}  // namespace dwl
