#include <gtest/gtest.h>

#include <random>

#include "deepwl/harness/cfi.hpp"
#include "deepwl/harness/drivers.hpp"
#include "deepwl/harness/fixtures.hpp"
#include "deepwl/harness/programs.hpp"
#include "oracles.hpp"

namespace dwl {
namespace {

Structure complete_graph(std::size_t n) {
  Relation e;
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = 0; v < n; ++v)
      if (u != v) e.emplace_back(u, v);
  return Structure(n, {{kEdgeSymbol, std::move(e)}});
}

TEST(Fixtures, StronglyRegularParameters) {
  for (const char* name : {"shrikhande", "rook4"}) {
    const auto g = fixture(name);
    const auto& e = g.relation(kEdgeSymbol);
    ASSERT_EQ(g.size(), 16U);
    std::vector<std::vector<bool>> adj(16, std::vector<bool>(16, false));
    for (auto [u, v] : e) adj[u][v] = true;
    for (Vertex u = 0; u < 16; ++u) {
      EXPECT_EQ(std::count(adj[u].begin(), adj[u].end(), true), 6) << name;
      for (Vertex v = 0; v < 16; ++v) {
        if (u == v) continue;
        EXPECT_EQ(adj[u][v], adj[v][u]);
        int common = 0;
        for (Vertex w = 0; w < 16; ++w) common += adj[u][w] && adj[v][w];
        EXPECT_EQ(common, 2) << name << " " << u << " " << v;
      }
    }
  }
}

TEST(Fixtures, ShrikhandeAndRookAreSeparatedOnlyByThreeWl) {
  const auto s = fixture("shrikhande"), r = fixture("rook4");
  EXPECT_FALSE(oracle::kwl_distinguishes(s, r, 2));
  EXPECT_TRUE(oracle::kwl_distinguishes(s, r, 3));
  EXPECT_EQ(Cloud(s).sketch(), Cloud(r).sketch());
}

TEST(Cfi, K4Pair) {
  const auto pair = cfi_pair(complete_graph(4));
  EXPECT_EQ(pair.untwisted.size(), 16U);
  EXPECT_EQ(pair.twisted.size(), 16U);
  EXPECT_EQ(pair.untwisted.relation(kEdgeSymbol).size(), pair.twisted.relation(kEdgeSymbol).size());
  EXPECT_FALSE(oracle::isomorphic(pair.untwisted, pair.twisted));
  EXPECT_EQ(Cloud(pair.untwisted).sketch(), Cloud(pair.twisted).sketch());
  EXPECT_FALSE(oracle::kwl_distinguishes(pair.untwisted, pair.twisted, 2));
  EXPECT_TRUE(oracle::kwl_distinguishes(pair.untwisted, pair.twisted, 3));
}

TEST(Cfi, OutputsShareDegreeSequence) {
  const auto pair = cfi_pair(complete_graph(4));
  auto degrees = [](const Structure& s) {
    std::vector<std::size_t> d(s.size(), 0);
    for (auto [u, v] : s.relation(kEdgeSymbol)) ++d[u];
    return d;
  };
  EXPECT_EQ(degrees(pair.untwisted), degrees(pair.twisted));
  EXPECT_EQ(pair.gadget.size(), 16U);
  for (const auto& g : pair.gadget) EXPECT_EQ(std::popcount(g.subset) % 2, 0);
}

TEST(Cfi, TwistIsDetectedOnEveryConnectedBase) {
  // Even the single-edge base yields non-isomorphic outputs.
  const auto k2 = cfi_pair(complete_graph(2));
  EXPECT_EQ(k2.untwisted.size(), 2U);
  EXPECT_FALSE(oracle::isomorphic(k2.untwisted, k2.twisted));
  const auto k3 = cfi_pair(complete_graph(3));
  EXPECT_FALSE(oracle::isomorphic(k3.untwisted, k3.twisted));
  EXPECT_TRUE(oracle::isomorphic(k3.untwisted, cfi_pair(complete_graph(3)).untwisted));
}

TEST(Cfi, RejectsBadBases) {
  EXPECT_THROW(cfi_pair(Structure(3, {{kEdgeSymbol, {}}})), PreconditionError);
  EXPECT_THROW(cfi_pair(fixture("P2")), PreconditionError);
  EXPECT_THROW(cfi_pair(fixture("TT")), PreconditionError);
  EXPECT_THROW(cfi_pair(Structure(1, {{kEdgeSymbol, {{0, 0}}}})), PreconditionError);
}

TEST(Programs, KwlOnFixtures) {
  auto two = iso_test(fixture("C6"), fixture("TT"), kwl_program(2));
  EXPECT_EQ(two.verdict, IsoVerdict::kNonIsomorphic);
  auto same = iso_test(fixture("C6"), fixture("C6"), kwl_program(2));
  EXPECT_EQ(same.verdict, IsoVerdict::kIsomorphic);
  auto srg = iso_test(fixture("shrikhande"), fixture("rook4"), kwl_program(2));
  EXPECT_EQ(srg.verdict, IsoVerdict::kIsomorphic);  // 2-WL cannot tell them apart
}

TEST(Programs, KwlAgreesWithOracleOnSmallCfi) {
  for (std::size_t n : {2, 3}) {
    const auto pair = cfi_pair(complete_graph(n));
    const bool separated = oracle::kwl_distinguishes(pair.untwisted, pair.twisted, 2);
    EXPECT_EQ(iso_test(pair.untwisted, pair.twisted, kwl_program(2)).verdict,
              separated ? IsoVerdict::kNonIsomorphic : IsoVerdict::kIsomorphic);
  }
}

TEST(Programs, KwlMatchesOracleOnRandomGraphs) {
  std::mt19937_64 rng(404);
  for (int i = 0; i < 15; ++i) {
    auto a = oracle::random_connected_structure(rng, 3 + rng() % 4, 1, 0.4);
    auto b = oracle::random_connected_structure(rng, a.size(), 1, 0.4);
    if (b.vocabulary() != a.vocabulary()) continue;
    for (int k : {2, 3}) {
      const auto r = iso_test(a, b, kwl_program(k));
      ASSERT_NE(r.verdict, IsoVerdict::kIndeterminate) << r.run.outcome.message;
      EXPECT_EQ(r.verdict == IsoVerdict::kNonIsomorphic, oracle::kwl_distinguishes(a, b, k)) << "k=" << k;
    }
  }
}

TEST(Drivers, IsoTestBudget) {
  MachineOptions opt;
  opt.max_steps = 1;
  EXPECT_EQ(iso_test(fixture("C6"), fixture("TT"), kwl_program(2), opt).verdict, IsoVerdict::kIndeterminate);
  EXPECT_THROW(iso_test(fixture("C6"), Structure(6), kwl_program(2)), PreconditionError);
}

TEST(Drivers, PrepareUnionMakesSidesConnected) {
  auto u = prepare_union(fixture("TT"), fixture("C6"));
  ASSERT_TRUE(u.auxiliary.has_value());
  EXPECT_EQ(connected_components(u.structure).size(), 2U);
  EXPECT_EQ(u.sides.size(), 12U);
  EXPECT_EQ(u.sides[5], Side::kFirst);
  EXPECT_EQ(u.sides[6], Side::kSecond);
  EXPECT_FALSE(prepare_union(fixture("C6"), fixture("C6")).auxiliary.has_value());
}

TEST(Drivers, Distinguisher) {
  auto diff = distinguisher_run(fixture("C6"), fixture("TT"), halt_program());
  EXPECT_EQ(diff.verdict, DistinguishVerdict::kDistinguished);
  EXPECT_EQ(diff.step, 0U);
  auto srg = distinguisher_run(fixture("shrikhande"), fixture("rook4"), kwl_program(3));
  EXPECT_EQ(srg.verdict, DistinguishVerdict::kDistinguished) << srg.text();
  EXPECT_GT(*srg.step, 0U);
  auto same = distinguisher_run(fixture("K4"), fixture("K4"), explore_program());
  EXPECT_EQ(same.verdict, DistinguishVerdict::kNotDistinguished);
  EXPECT_EQ(same.text(), "not distinguished");
  MachineOptions opt;
  opt.max_steps = 0;
  EXPECT_EQ(distinguisher_run(fixture("K4"), fixture("K4"), kwl_program(3), opt).verdict,
            DistinguishVerdict::kIndeterminate);
}

TEST(Drivers, CompleteInvariant) {
  std::mt19937_64 rng(77);
  auto a = fixture("K1_3");
  const auto ref = complete_invariant(a, kwl_program(2));
  for (int i = 0; i < 5; ++i)
    EXPECT_EQ(complete_invariant(apply_permutation(a, oracle::random_permutation(rng, a.size())), kwl_program(2)), ref);
  EXPECT_NE(complete_invariant(fixture("C6"), kwl_program(2)), complete_invariant(fixture("TT"), kwl_program(2)));
  MachineOptions opt;
  opt.max_steps = 0;
  EXPECT_THROW(complete_invariant(a, kwl_program(2), opt), Error);
}

TEST(Programs, ByName) {
  EXPECT_TRUE(run_program(fixture("C6"), program_by_name("halt")).accepted());
  EXPECT_NO_THROW(program_by_name("kwl4"));
  EXPECT_THROW(program_by_name("/nonexistent/program"), UnknownName);
  EXPECT_THROW(program_by_name("kwl1"), PreconditionError);
}

}  // namespace
}  // namespace dwl
