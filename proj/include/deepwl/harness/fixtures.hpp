#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "deepwl/structure.hpp"

namespace dwl {

// Relation symbol used by every single-relation fixture.
inline const Symbol kEdgeSymbol{"0"};

inline Structure undirected_graph(std::size_t n, const std::vector<std::pair<Vertex, Vertex>>& edges) {
  Relation rel;
  for (auto [u, v] : edges) {
    rel.emplace_back(u, v);
    rel.emplace_back(v, u);
  }
  return Structure(n, {{kEdgeSymbol, std::move(rel)}});
}

struct FixtureInfo {
  std::string name;
  std::string description;
  std::size_t components;
  std::optional<std::size_t> coarsest_colors;  // |sigma| where known
  std::function<Structure()> make;
};

namespace detail {

inline Structure make_cycle(std::size_t n) {
  std::vector<std::pair<Vertex, Vertex>> e;
  for (Vertex i = 0; i < n; ++i) e.emplace_back(i, static_cast<Vertex>((i + 1) % n));
  return undirected_graph(n, e);
}

// Cayley-type graph on Z4 x Z4: vertex 4a+b, adjacent when the difference is in `steps` (or its negation).
inline Structure make_torus_graph(const std::vector<std::pair<int, int>>& steps) {
  std::vector<std::pair<Vertex, Vertex>> e;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (auto [da, db] : steps) {
        Vertex u = static_cast<Vertex>(4 * a + b);
        Vertex v = static_cast<Vertex>(4 * ((a + da) % 4) + (b + db) % 4);
        if (u < v) e.emplace_back(u, v);
        else e.emplace_back(v, u);
      }
  auto g = undirected_graph(16, e);
  return g;
}

inline Structure make_rook4() {
  std::vector<std::pair<Vertex, Vertex>> e;
  for (Vertex u = 0; u < 16; ++u)
    for (Vertex v = u + 1; v < 16; ++v)
      if (u / 4 == v / 4 || u % 4 == v % 4) e.emplace_back(u, v);
  return undirected_graph(16, e);
}

}  // namespace detail

inline const std::vector<FixtureInfo>& fixture_catalog() {
  static const std::vector<FixtureInfo> catalog = {
      {"C6", "symmetric 6-cycle", 1, 4, [] { return detail::make_cycle(6); }},
      {"TT", "two disjoint triangles", 2, 3,
       [] { return undirected_graph(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}}); }},
      {"K4", "complete graph on 4 vertices", 1, 2,
       [] { return undirected_graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}); }},
      {"K1_3", "star with center 0 and three leaves", 1, std::nullopt,
       [] { return undirected_graph(4, {{0, 1}, {0, 2}, {0, 3}}); }},
      {"P2", "single directed edge 0->1", 1, 4, [] { return Structure(2, {{kEdgeSymbol, {{0, 1}}}}); }},
      {"DC3", "directed 3-cycle", 1, std::nullopt,
       [] { return Structure(3, {{kEdgeSymbol, {{0, 1}, {1, 2}, {2, 0}}}}); }},
      {"shrikhande", "Shrikhande graph, SRG(16,6,2,2)", 1, 3,
       [] { return detail::make_torus_graph({{1, 0}, {0, 1}, {1, 1}}); }},
      {"rook4", "4x4 rook's graph, SRG(16,6,2,2)", 1, 3, [] { return detail::make_rook4(); }},
  };
  return catalog;
}

inline Structure fixture(const std::string& name) {
  for (const auto& f : fixture_catalog())
    if (f.name == name) return f.make();
  throw UnknownName("unknown fixture " + name);
}

}  // namespace dwl
