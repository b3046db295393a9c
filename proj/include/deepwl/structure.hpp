#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "deepwl/error.hpp"
#include "deepwl/symbol.hpp"

namespace dwl {

using Vertex = std::uint32_t;
using VertexPair = std::pair<Vertex, Vertex>;
// Sorted, duplicate-free list of ordered pairs.
using Relation = std::vector<VertexPair>;

inline Relation make_relation(std::vector<VertexPair> pairs) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

inline bool relation_contains(const Relation& r, Vertex u, Vertex v) {
  return std::binary_search(r.begin(), r.end(), VertexPair{u, v});
}

// Finite universe 0..n-1 with named binary relations. Immutable value.
class Structure {
 public:
  Structure() = default;
  explicit Structure(std::size_t n, std::map<Symbol, Relation> relations = {})
      : n_(n), relations_(std::move(relations)) {
    for (auto& [sym, rel] : relations_) {
      rel = make_relation(std::move(rel));
      for (auto [u, v] : rel)
        if (u >= n_ || v >= n_)
          throw PreconditionError("relation " + sym.text() + " has pair (" + std::to_string(u) + "," +
                                  std::to_string(v) + ") outside 0.." + std::to_string(n_) + "-1");
    }
  }

  std::size_t size() const noexcept { return n_; }
  const std::map<Symbol, Relation>& relations() const noexcept { return relations_; }

  Vocabulary vocabulary() const {
    Vocabulary v;
    for (const auto& [sym, rel] : relations_) v.insert(sym);
    return v;
  }

  bool has_symbol(const Symbol& s) const { return relations_.contains(s); }

  const Relation& relation(const Symbol& s) const {
    auto it = relations_.find(s);
    if (it == relations_.end()) throw UnknownName("unknown relation symbol " + s.text());
    return it->second;
  }

  bool contains(const Symbol& s, Vertex u, Vertex v) const { return relation_contains(relation(s), u, v); }

  Structure with_relation(const Symbol& s, Relation r) const {
    auto rels = relations_;
    rels[s] = std::move(r);
    return Structure(n_, std::move(rels));
  }

  Structure without_relation(const Symbol& s) const {
    if (!has_symbol(s)) throw UnknownName("unknown relation symbol " + s.text());
    auto rels = relations_;
    rels.erase(s);
    return Structure(n_, std::move(rels));
  }

  friend bool operator==(const Structure&, const Structure&) = default;

 private:
  std::size_t n_ = 0;
  std::map<Symbol, Relation> relations_;
};

class VertexPermutation {
 public:
  VertexPermutation() = default;
  explicit VertexPermutation(std::vector<Vertex> images) : images_(std::move(images)) {
    std::vector<bool> seen(images_.size(), false);
    for (Vertex v : images_) {
      if (v >= images_.size() || seen[v]) throw PreconditionError("vertex permutation is not a bijection");
      seen[v] = true;
    }
  }
  static VertexPermutation identity(std::size_t n) {
    std::vector<Vertex> im(n);
    std::iota(im.begin(), im.end(), Vertex{0});
    return VertexPermutation(std::move(im));
  }

  std::size_t size() const noexcept { return images_.size(); }
  Vertex operator()(Vertex v) const { return images_.at(v); }
  const std::vector<Vertex>& images() const noexcept { return images_; }

  VertexPermutation inverse() const {
    std::vector<Vertex> inv(images_.size());
    for (Vertex v = 0; v < images_.size(); ++v) inv[images_[v]] = v;
    return VertexPermutation(std::move(inv));
  }

 private:
  std::vector<Vertex> images_;
};

inline Structure apply_permutation(const Structure& a, const VertexPermutation& p) {
  if (p.size() != a.size())
    throw PreconditionError("permutation length " + std::to_string(p.size()) + " != structure size " +
                            std::to_string(a.size()));
  std::map<Symbol, Relation> rels;
  for (const auto& [sym, rel] : a.relations()) {
    Relation out;
    out.reserve(rel.size());
    for (auto [u, v] : rel) out.emplace_back(p(u), p(v));
    rels.emplace(sym, std::move(out));
  }
  return Structure(a.size(), std::move(rels));
}

// Side-by-side union; the second part's vertices are shifted by the first part's size.
inline Structure disjoint_union(const Structure& a1, const Structure& a2) {
  if (a1.vocabulary() != a2.vocabulary()) throw PreconditionError("disjoint union needs identical vocabularies");
  const auto shift = static_cast<Vertex>(a1.size());
  std::map<Symbol, Relation> rels;
  for (const auto& [sym, rel] : a1.relations()) {
    Relation out = rel;
    for (auto [u, v] : a2.relation(sym)) out.emplace_back(u + shift, v + shift);
    rels.emplace(sym, std::move(out));
  }
  return Structure(a1.size() + a2.size(), std::move(rels));
}

// Keeps the symbols in `sub_vocab` and the vertices in `vertex_set`, renumbered in increasing order.
inline Structure subrestriction(const Structure& a, const Vocabulary& sub_vocab, const std::set<Vertex>& vertex_set) {
  for (const Symbol& s : sub_vocab)
    if (!a.has_symbol(s)) throw UnknownName("unknown relation symbol " + s.text());
  constexpr Vertex kAbsent = ~Vertex{0};
  std::vector<Vertex> index(a.size(), kAbsent);
  Vertex next = 0;
  for (Vertex v : vertex_set) {
    if (v >= a.size()) throw PreconditionError("vertex " + std::to_string(v) + " out of range");
    index[v] = next++;
  }
  std::map<Symbol, Relation> rels;
  for (const Symbol& s : sub_vocab) {
    Relation out;
    for (auto [u, v] : a.relation(s))
      if (index[u] != kAbsent && index[v] != kAbsent) out.emplace_back(index[u], index[v]);
    rels.emplace(s, std::move(out));
  }
  return Structure(vertex_set.size(), std::move(rels));
}

// Components of the Gaifman graph, each sorted, ordered by least member.
inline std::vector<std::vector<Vertex>> connected_components(const Structure& a) {
  std::vector<Vertex> parent(a.size());
  std::iota(parent.begin(), parent.end(), Vertex{0});
  auto find = [&](Vertex x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [sym, rel] : a.relations())
    for (auto [u, v] : rel) {
      Vertex ru = find(u), rv = find(v);
      if (ru != rv) parent[std::max(ru, rv)] = std::min(ru, rv);
    }
  std::map<Vertex, std::vector<Vertex>> groups;
  for (Vertex v = 0; v < a.size(); ++v) groups[find(v)].push_back(v);
  std::vector<std::vector<Vertex>> out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  return out;
}

// Strongly connected components of a relation over 0..n-1. A singleton counts only when looped.
// Components are sorted and ordered by least member.
inline std::vector<std::vector<Vertex>> strongly_connected_components(std::size_t n, const Relation& r) {
  std::vector<std::vector<Vertex>> out_adj(n);
  for (auto [u, v] : r) out_adj[u].push_back(v);
  // Iterative Tarjan.
  constexpr std::uint32_t kUnvisited = ~std::uint32_t{0};
  std::vector<std::uint32_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<Vertex> stack;
  std::vector<std::vector<Vertex>> comps;
  std::uint32_t counter = 0;
  for (Vertex root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    std::vector<std::pair<Vertex, std::size_t>> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, next] = call.back();
      if (next < out_adj[v].size()) {
        Vertex w = out_adj[v][next++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<Vertex> comp;
        Vertex w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        if (comp.size() > 1 || relation_contains(r, v, v)) comps.push_back(std::move(comp));
      }
      Vertex done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
    }
  }
  std::sort(comps.begin(), comps.end());
  return comps;
}

}  // namespace dwl
