#include <gtest/gtest.h>

#include <random>

#include "deepwl/harness/fixtures.hpp"
#include "deepwl/harness/programs.hpp"
#include "deepwl/machine.hpp"
#include "oracles.hpp"

namespace dwl {
namespace {

TEST(Cloud, InitialSketches) {
  // P2: the two endpoints differ, so both diagonal classes are singletons.
  EXPECT_EQ(Cloud(fixture("P2")).sketch().num_colors(), oracle::two_wl_class_count(fixture("P2")));
  EXPECT_EQ(Cloud(fixture("P2")).sketch().num_colors(), 4U);
  EXPECT_EQ(Cloud(fixture("C6")).sketch().num_colors(), 4U);
  EXPECT_EQ(Cloud(Structure(1)).sketch().num_colors(), 1U);
}

TEST(Cloud, AddPairOnRelation) {
  Cloud c(fixture("P2"));
  auto next = c.add_pair(kEdgeSymbol);
  const auto& a = next.structure();
  EXPECT_EQ(a.size(), 3U);
  ASSERT_TRUE(next.pair_symbols().left.has_value());
  EXPECT_EQ(*next.pair_symbols().left, Symbol(""));
  EXPECT_EQ(*next.pair_symbols().right, Symbol("1"));
  EXPECT_EQ(a.relation(Symbol("")), (Relation{{0, 2}}));
  EXPECT_EQ(a.relation(Symbol("1")), (Relation{{1, 2}}));
  EXPECT_EQ(a.relation(Symbol("00")), (Relation{{2, 2}}));
  EXPECT_EQ(*next.last_allocated(), Symbol("00"));
  EXPECT_EQ(next.provenance()[2].origin, Origin::kPair);
  EXPECT_EQ(next.provenance()[2].parents, (std::vector<Vertex>{0, 1}));
}

TEST(Cloud, AddPairOnDiagonalColorAndEmptyRelation) {
  Cloud c6(fixture("C6"));
  ColorId diag = 0;
  while (!c6.sketch().is_diagonal(diag)) ++diag;
  auto copied = c6.add_pair(c6.sketch().sigma()[diag]);
  EXPECT_EQ(copied.structure().size(), 12U);

  Cloud empty(Structure(2, {{kEdgeSymbol, {}}}));
  auto next = empty.add_pair(kEdgeSymbol);
  EXPECT_EQ(next.structure().size(), 2U);
  EXPECT_TRUE(next.structure().relation(*next.last_allocated()).empty());
  EXPECT_THROW(empty.add_pair(Symbol("0101")), UnknownName);
}

TEST(Cloud, PairSymbolsAccumulate) {
  Cloud c(fixture("P2"));
  auto twice = c.add_pair(kEdgeSymbol).add_pair(kEdgeSymbol);
  EXPECT_EQ(twice.structure().size(), 4U);
  EXPECT_EQ(twice.structure().relation(*twice.pair_symbols().left).size(), 2U);
  EXPECT_EQ(*twice.last_allocated(), Symbol("01"));
}

TEST(Cloud, Contract) {
  auto dc3 = Cloud(fixture("DC3")).contract(kEdgeSymbol);
  EXPECT_EQ(dc3.structure().size(), 1U);
  EXPECT_EQ(dc3.structure().relation(kEdgeSymbol), (Relation{{0, 0}}));
  EXPECT_EQ(dc3.structure().relation(*dc3.last_allocated()), (Relation{{0, 0}}));
  EXPECT_EQ(dc3.provenance()[0].origin, Origin::kContracted);

  auto p2 = Cloud(fixture("P2")).contract(kEdgeSymbol);
  EXPECT_EQ(p2.structure().size(), 2U);
  EXPECT_EQ(p2.structure().relation(kEdgeSymbol), fixture("P2").relation(kEdgeSymbol));
  EXPECT_TRUE(p2.structure().relation(*p2.last_allocated()).empty());

  auto two = disjoint_union(fixture("DC3"), fixture("DC3"));
  EXPECT_EQ(Cloud(two).contract(kEdgeSymbol).structure().size(), 2U);
}

TEST(Cloud, CreateAndForget) {
  Cloud c6(fixture("C6"));
  const auto& d = c6.sketch();
  std::vector<Symbol> diag, all;
  for (ColorId r = 0; r < d.num_colors(); ++r) {
    all.push_back(d.sigma()[r]);
    if (d.is_diagonal(r)) diag.push_back(d.sigma()[r]);
  }
  auto with_diag = c6.create(diag);
  EXPECT_EQ(with_diag.structure().relation(*with_diag.last_allocated()), oracle::diagonal(6));
  EXPECT_EQ(with_diag.sketch().num_colors(), d.num_colors());
  auto with_none = c6.create({});
  EXPECT_TRUE(with_none.structure().relation(*with_none.last_allocated()).empty());
  auto with_all = c6.create(all);
  EXPECT_EQ(with_all.structure().relation(*with_all.last_allocated()).size(), 36U);
  EXPECT_EQ(with_diag.forget(*with_diag.last_allocated()).sketch(), d);
  EXPECT_THROW(c6.create({Symbol("0")}), UnknownName);  // a relation, not a color

  auto bare = Cloud(fixture("P2")).forget(kEdgeSymbol);
  EXPECT_TRUE(bare.sketch().tau().empty());
  EXPECT_EQ(bare.sketch().num_colors(), 2U);
  EXPECT_THROW(Cloud(fixture("P2")).forget(Symbol("1")), UnknownName);
}

TEST(Cloud, ForgottenPairSymbolIsReallocated) {
  auto c = Cloud(fixture("P2")).add_pair(kEdgeSymbol);
  auto left = *c.pair_symbols().left;
  c = c.forget(left);
  EXPECT_FALSE(c.pair_symbols().left.has_value());
  c = c.add_pair(kEdgeSymbol);
  EXPECT_EQ(c.structure().relation(*c.pair_symbols().left).size(), 1U);
}

TEST(Cloud, ProvenanceSides) {
  auto u = disjoint_union(fixture("P2"), fixture("P2"));
  Cloud c(u, {Side::kFirst, Side::kFirst, Side::kSecond, Side::kSecond});
  std::vector<Symbol> everything(c.sketch().sigma().begin(), c.sketch().sigma().end());
  auto all = c.create(everything);
  auto paired = all.add_pair(*all.last_allocated());
  std::size_t crossing = 0, first = 0;
  for (const auto& p : paired.provenance()) {
    if (p.crossing) ++crossing;
    if (p.origin == Origin::kPair && p.side == Side::kFirst) ++first;
  }
  EXPECT_EQ(crossing, 8U);
  EXPECT_EQ(first, 4U);
  EXPECT_THROW(Cloud(u, {Side::kFirst}), PreconditionError);
}

TEST(Commands, TextRoundTrip) {
  for (const char* line : {"addPair 01", "contract -", "forget 1", "create", "create - 0 11", "halt 01ff"})
    EXPECT_EQ(command_text(parse_command(line)), line);
  EXPECT_THROW(parse_command("jump 1"), PreconditionError);
  EXPECT_THROW(parse_command("addPair"), PreconditionError);
}

TEST(Run, HaltImmediately) {
  auto run = run_program(fixture("C6"), halt_program());
  ASSERT_EQ(run.steps.size(), 1U);
  EXPECT_TRUE(run.accepted());
  EXPECT_EQ(run.steps[0].command, "init");
  EXPECT_EQ(run.cost, 1 + run.steps[0].sketch.size);
  const auto text = run.transcript();
  EXPECT_EQ(text.rfind("STEP 0 CMD init SKETCH ", 0), 0U);
  EXPECT_NE(text.find("\nOUTCOME accept\n"), std::string::npos);
}

TEST(Run, OutcomeMapping) {
  EXPECT_EQ(run_program(Structure(1), [](Channel&) { return Bytes{0}; }).outcome.text(), "reject");
  EXPECT_EQ(run_program(Structure(1), [](Channel&) { return Bytes{7, 8}; }).outcome.text(), "halt:0708");
  EXPECT_EQ(run_program(Structure(1), [](Channel&) { return Bytes{}; }).outcome.text(), "halt:");
  auto bad = run_program(Structure(1), [](Channel& ch) {
    ch.forget(Symbol("0"));
    return Bytes{1};
  });
  EXPECT_EQ(bad.outcome.kind, OutcomeKind::kAbort);
  EXPECT_NE(bad.outcome.message.find("unknown"), std::string::npos);
}

TEST(Run, Budget) {
  auto two_commands = [](Channel& ch) {
    ch.create({});
    ch.create({});
    return Bytes{1};
  };
  MachineOptions opt;
  opt.max_steps = 1;
  auto run = run_program(fixture("P2"), two_commands, opt);
  EXPECT_EQ(run.outcome.kind, OutcomeKind::kBudget);
  EXPECT_EQ(run.steps.size(), 2U);
  EXPECT_NE(run.transcript().find("OUTCOME budget"), std::string::npos);
  opt.max_steps = 2;
  EXPECT_TRUE(run_program(fixture("P2"), two_commands, opt).accepted());
}

TEST(Run, RefinementChargeAndVerification) {
  MachineOptions opt;
  opt.charge_refinement = true;
  opt.verify_each = true;
  auto run = run_program(fixture("C6"), kwl_program(3), opt);
  auto plain = run_program(fixture("C6"), kwl_program(3));
  EXPECT_GT(run.cost, plain.cost);
  EXPECT_EQ(run.coherence_checks, run.steps.size());
  EXPECT_EQ(run.transcript(), plain.transcript());
}

TEST(Run, TranscriptsInvariantUnderPermutation) {
  std::mt19937_64 rng(61);
  const std::vector<Program> programs{halt_program(), kwl_program(2), explore_program()};
  for (int i = 0; i < 6; ++i) {
    auto a = oracle::random_structure(rng, 2 + rng() % 6, 1 + rng() % 2, 0.3);
    for (const auto& prog : programs) {
      const auto ref = run_program(a, prog).transcript();
      for (int j = 0; j < 4; ++j)
        EXPECT_EQ(run_program(apply_permutation(a, oracle::random_permutation(rng, a.size())), prog).transcript(), ref);
    }
  }
}

TEST(Run, ReplayIsDeterministic) {
  auto a = fixture("K1_3");
  EXPECT_EQ(run_program(a, explore_program()).transcript(), run_program(a, explore_program()).transcript());
}

TEST(Run, ScriptProgram) {
  auto prog = script_program("# copy the edge\naddPair 0\nforget 00\nhalt 01\naddPair 0\n");
  auto run = run_program(fixture("P2"), prog);
  EXPECT_TRUE(run.accepted());
  ASSERT_EQ(run.steps.size(), 3U);
  EXPECT_EQ(run.steps[1].command, "addPair 0");
  EXPECT_THROW(script_program("addPair 0\nbogus\n"), ParseError);
}

}  // namespace
}  // namespace dwl

namespace dwl {
namespace {

TEST(Run, LargeSketchesTravelAsDigests) {
  auto run = run_program(fixture("shrikhande"), kwl_program(3));
  ASSERT_EQ(run.outcome.kind, OutcomeKind::kReject);  // one component: nothing is shared
  const auto& last = run.steps.back().sketch;
  EXPECT_GT(last.size, kInlineSketchBytes);
  EXPECT_FALSE(last.bytes.has_value());
  EXPECT_EQ(last.text().rfind("sha256:", 0), 0U);
  EXPECT_TRUE(run.steps.front().sketch.bytes.has_value());
}

}  // namespace
}  // namespace dwl
