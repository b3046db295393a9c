#include <gtest/gtest.h>

#include <random>

#include "deepwl/harness/fixtures.hpp"
#include "deepwl/machine.hpp"
#include "deepwl/sketch_ops.hpp"
#include "deepwl/structure_io.hpp"
#include "oracles.hpp"
#include "shortcut_corpus.hpp"

namespace dwl {
namespace {

TEST(Sketch, SingleVertexGoldenEncoding) {
  auto d = sketch_of(Structure(1));
  ASSERT_EQ(d.num_colors(), 1U);
  EXPECT_EQ(d.sigma()[0], Symbol(""));
  EXPECT_EQ(d.q()(0, 0, 0), 1U);
  // "DWLS1", |tau|=0, |sigma|=1, one empty name, no subset bits, q = "10", padding.
  const Bytes golden{0x44, 0x57, 0x4C, 0x53, 0x31, 0x00, 0x00, 0x00, 0x00,
                     0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x00, 0x80};
  EXPECT_EQ(encode_sketch(d), golden);
  EXPECT_EQ(encoded_size_bytes(d), golden.size());
}

TEST(Sketch, SeparatesC6FromTwoTriangles) {
  auto c6 = sketch_of(fixture("C6"));
  auto tt = sketch_of(fixture("TT"));
  EXPECT_EQ(c6.num_colors(), oracle::two_wl_class_count(fixture("C6")));
  EXPECT_EQ(tt.num_colors(), oracle::two_wl_class_count(fixture("TT")));
  EXPECT_NE(encode_sketch(c6), encode_sketch(tt));
}

TEST(Sketch, K4) {
  auto d = sketch_of(fixture("K4"));
  ASSERT_EQ(d.num_colors(), 2U);
  ColorId off = d.is_diagonal(0) ? 1 : 0;
  EXPECT_EQ(d.q()(off, off, off), 2U);
  EXPECT_EQ(d.vertex_count(), 4U);
}

TEST(Sketch, NamesAvoidVocabulary) {
  auto d = sketch_of(fixture("C6"));
  for (const auto& name : d.sigma()) EXPECT_FALSE(d.symbol_index(name).has_value());
  EXPECT_EQ(d.sigma().front(), Symbol(""));
  EXPECT_EQ(d.sigma()[1], Symbol("1"));
}

TEST(Sketch, RejectsNonRefiningConfiguration) {
  auto coarse = refine_to_coarsest(Structure(6));
  EXPECT_THROW(canonical_sketch(fixture("C6"), coarse), PreconditionError);
}

TEST(Sketch, RoundTripAndMetadata) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    auto a = oracle::random_structure(rng, 1 + rng() % 8, rng() % 4, 0.3);
    auto c = refine_to_coarsest(a);
    auto form = canonical_form(a, c);
    const auto& d = form.sketch;
    auto bytes = encode_sketch(d);
    EXPECT_EQ(decode_sketch(bytes), d);
    EXPECT_EQ(bytes.size(), encoded_size_bytes(d));
    // Class sizes and vertex counts derived from q agree with the concrete partition.
    std::vector<std::uint64_t> sizes(d.num_colors(), 0);
    for (auto raw : c.color_of) ++sizes[form.class_of_input[raw]];
    for (ColorId r = 0; r < d.num_colors(); ++r) EXPECT_EQ(d.meta().size[r], sizes[r]);
    EXPECT_EQ(d.vertex_count(), a.size());
    // Subset relation agrees with concrete containment.
    for (ColorId r = 0; r < d.num_colors(); ++r)
      for (std::size_t s = 0; s < d.num_symbols(); ++s) {
        bool all = true;
        for (Vertex u = 0; u < a.size(); ++u)
          for (Vertex v = 0; v < a.size(); ++v)
            if (form.class_of_input[c.color(u, v)] == r && !a.contains(d.tau()[s], u, v)) all = false;
        EXPECT_EQ(d.inside(r, s), all);
      }
  }
}

TEST(Sketch, DecodeRejectsGarbage) {
  auto bytes = encode_sketch(sketch_of(fixture("P2")));
  auto extra = bytes;
  extra.push_back(0);
  EXPECT_THROW(decode_sketch(extra), Error);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_sketch(bad), Error);
  bytes.pop_back();
  EXPECT_THROW(decode_sketch(bytes), Error);
}

TEST(Sketch, CanonicalUnderPermutation) {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 10; ++i) {
    auto a = oracle::random_structure(rng, 1 + rng() % 10, 1 + rng() % 3, 0.3);
    auto ref = encode_sketch(sketch_of(a));
    for (int j = 0; j < 15; ++j)
      EXPECT_EQ(encode_sketch(sketch_of(apply_permutation(a, oracle::random_permutation(rng, a.size())))), ref);
  }
}

TEST(Sketch, DigestIsStable) {
  auto a = sketch_of(fixture("C6"));
  EXPECT_EQ(sketch_digest(a), sketch_digest(sketch_of(apply_permutation(fixture("C6"), VertexPermutation({3, 1, 4, 0, 5, 2})))));
  EXPECT_NE(sketch_digest(a), sketch_digest(sketch_of(fixture("TT"))));
}

TEST(SketchOps, ComponentsAndConnectivity) {
  EXPECT_EQ(count_components(sketch_of(fixture("C6"))), 1U);
  EXPECT_EQ(count_components(sketch_of(fixture("TT"))), 2U);
  EXPECT_EQ(count_components(sketch_of(disjoint_union(fixture("C6"), fixture("TT")))), 3U);
  EXPECT_EQ(count_components(sketch_of(Structure(3))), 3U);
}

TEST(SketchOps, SubrestrictionExamples) {
  auto c6 = fixture("C6");
  const Symbol all("1");
  Relation diag;
  for (Vertex v = 0; v < 6; ++v) diag.emplace_back(v, v);
  auto with_all = c6.with_relation(all, diag);
  EXPECT_EQ(sketch_of_subrestriction(sketch_of(with_all), with_all.vocabulary(), all), sketch_of(with_all));
  EXPECT_THROW(sketch_of_subrestriction(sketch_of(c6), c6.vocabulary(), kEdgeSymbol), PreconditionError);
  EXPECT_THROW(sketch_of_subrestriction(sketch_of(with_all), {Symbol("11")}, all), UnknownName);
}

TEST(SketchOps, DisjointUnionExamples) {
  auto p2 = sketch_of(fixture("P2"));
  EXPECT_EQ(sketch_of_disjoint_union(p2, p2), sketch_of(disjoint_union(fixture("P2"), fixture("P2"))));
  auto c6 = sketch_of(fixture("C6"));
  auto triangle = sketch_of(subrestriction(fixture("TT"), fixture("TT").vocabulary(), {0, 1, 2}));
  EXPECT_EQ(sketch_of_disjoint_union(c6, triangle), sketch_of_disjoint_union(triangle, c6));
  EXPECT_THROW(sketch_of_disjoint_union(c6, sketch_of(Structure(2))), PreconditionError);
}

TEST(SketchOps, ContractionExamples) {
  Cloud dc3(fixture("DC3"));
  const ColorId edge = [&] {
    for (ColorId r = 0; r < dc3.sketch().num_colors(); ++r)
      if (dc3.sketch().inside(r, 0)) return r;
    return ColorId{0};
  }();
  auto shortcut = sketch_of_contraction(dc3.sketch(), edge);
  auto concrete = dc3.contract(dc3.sketch().sigma()[edge]);
  EXPECT_EQ(concrete.structure().size(), 1U);
  EXPECT_EQ(concrete.structure().relation(kEdgeSymbol), (Relation{{0, 0}}));
  EXPECT_EQ(shortcut, concrete.sketch());
  EXPECT_EQ(shortcut.vertex_count(), 1U);
  EXPECT_EQ(shortcut.num_symbols(), 2U);

  // A diagonal color: every vertex carries a loop, so each becomes its own component.
  Cloud c6(fixture("C6"));
  ColorId diag = 0;
  while (!c6.sketch().is_diagonal(diag)) ++diag;
  auto contracted = c6.contract(c6.sketch().sigma()[diag]);
  EXPECT_EQ(contracted.structure().size(), 6U);
  EXPECT_EQ(sketch_of_contraction(c6.sketch(), diag), contracted.sketch());
  EXPECT_THROW(sketch_of_contraction(c6.sketch(), 99), UnknownName);
}

TEST(SketchOps, CrossingPairExamples) {
  auto p2 = disjoint_union(fixture("P2"), fixture("P2"));
  Cloud cloud(p2, {Side::kFirst, Side::kFirst, Side::kSecond, Side::kSecond});
  const auto& d = cloud.sketch();
  EXPECT_EQ(sketch_of_crossing_pairs(d, {}), d);
  const auto plain = connectivity_mask(d);
  std::optional<ColorId> rho;
  for (ColorId c = 0; c < d.num_colors(); ++c)
    if (!plain[c] && d.meta().dom[c] == d.meta().cod[c]) rho = c;
  ASSERT_TRUE(rho.has_value());
  EXPECT_EQ(sketch_of_crossing_pairs(d, {*rho}), cloud.add_pair(d.sigma()[*rho]).sketch());
  ColorId some_plain = 0;
  while (!plain[some_plain]) ++some_plain;
  EXPECT_THROW(sketch_of_crossing_pairs(d, {some_plain}), PreconditionError);
  EXPECT_THROW(sketch_of_crossing_pairs(sketch_of(fixture("C6")), {1}), PreconditionError);
}

void run_corpus(std::string (*check)(std::mt19937_64&), std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) {
    auto failure = check(rng);
    ASSERT_TRUE(failure.empty()) << "instance " << i << ": " << failure;
  }
}

TEST(ShortcutCorpus, Subrestriction) { run_corpus(corpus::check_subrestriction, 41, 60); }
TEST(ShortcutCorpus, DisjointUnion) { run_corpus(corpus::check_disjoint_union, 42, 60); }
TEST(ShortcutCorpus, Contraction) { run_corpus(corpus::check_contraction, 43, 60); }
TEST(ShortcutCorpus, CrossingPairs) { run_corpus(corpus::check_crossing_pairs, 44, 60); }
TEST(ShortcutCorpus, ContractionKeepsUntouchedRefinement) { run_corpus(corpus::check_contraction_refinement, 45, 60); }
TEST(ShortcutCorpus, CrossingPairsKeepOldPartition) { run_corpus(corpus::check_crossing_equally_fine, 46, 60); }

}  // namespace
}  // namespace dwl
