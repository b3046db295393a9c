#pragma once

// Stdlib operations against concrete set-theoretic definitions.

#include <functional>
#include <random>
#include <string>

#include "deepwl/stdlib.hpp"
#include "deepwl/structure_io.hpp"
#include "oracles.hpp"

namespace corpus {

using namespace dwl;

// Runs one fragment on a fresh machine and returns the relation it produced.
struct FragmentResult {
  Relation relation;
  std::size_t universe = 0;
  std::size_t vocabulary_growth = 0;
  std::string error;
};

inline FragmentResult run_fragment(const Structure& a, const std::function<Symbol(Channel&)>& fragment) {
  FragmentResult out;
  auto run = run_program(a, [&](Channel& ch) {
    const Symbol s = fragment(ch);
    const auto& cloud = ch.cloud_for_testing();
    out.relation = cloud.structure().relation(s);
    out.universe = cloud.structure().size();
    out.vocabulary_growth = cloud.structure().relations().size() - a.relations().size();
    return Bytes{1};
  });
  if (!run.accepted()) out.error = run.outcome.message;
  return out;
}

// Every basic stdlib operation on one random structure. Returns "" when all agree.
inline std::string check_stdlib(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> n(1, 8), syms(1, 3);
  const auto a = oracle::random_structure(rng, n(rng), syms(rng), 0.3);
  const auto vocab_set = a.vocabulary();
  const std::vector<Symbol> vocab(vocab_set.begin(), vocab_set.end());
  const Symbol e1 = vocab[rng() % vocab.size()], e2 = vocab[rng() % vocab.size()];
  const Relation& r1 = a.relation(e1);
  const Relation& r2 = a.relation(e2);
  const std::string where = "\non\n" + save_structure(a) + "with E1=" + e1.text() + " E2=" + e2.text();

  struct Case {
    const char* name;
    std::function<Symbol(Channel&)> fragment;
    Relation expected;
  };
  using stdlib::BooleanKind;
  const std::vector<Case> cases{
      {"union", [&](Channel& ch) { return stdlib::op_boolean(ch, BooleanKind::kUnion, e1, e2); },
       oracle::set_union(r1, r2)},
      {"intersection", [&](Channel& ch) { return stdlib::op_boolean(ch, BooleanKind::kIntersection, e1, e2); },
       oracle::set_intersection(r1, r2)},
      {"difference", [&](Channel& ch) { return stdlib::op_boolean(ch, BooleanKind::kDifference, e1, e2); },
       oracle::set_difference(r1, r2)},
      {"diag", [&](Channel& ch) { return stdlib::op_diag(ch); }, oracle::diagonal(a.size())},
      {"converse", [&](Channel& ch) { return stdlib::op_converse(ch, e1); }, oracle::converse(r1)},
      {"compose", [&](Channel& ch) { return stdlib::op_compose(ch, e1, e2); }, oracle::compose(r1, r2)},
      {"scc", [&](Channel& ch) { return stdlib::op_scc(ch, e1); }, oracle::same_scc(a.size(), r1)},
      {"dom", [&](Channel& ch) { return stdlib::op_dom(ch, e1); }, oracle::dom_diag(r1)},
      {"codom", [&](Channel& ch) { return stdlib::op_codom(ch, e1); }, oracle::codom_diag(r1)},
      {"supp", [&](Channel& ch) { return stdlib::op_supp(ch, e1); },
       oracle::set_union(oracle::dom_diag(r1), oracle::codom_diag(r1))},
  };
  for (const auto& c : cases) {
    auto got = run_fragment(a, c.fragment);
    if (!got.error.empty()) return std::string(c.name) + " aborted: " + got.error + where;
    if (got.relation != c.expected) return std::string(c.name) + " differs from the concrete result" + where;
    if (got.universe != a.size()) return std::string(c.name) + " changed the universe" + where;
    if (got.vocabulary_growth != 1) return std::string(c.name) + " left temporaries behind" + where;
  }

  std::string failure;
  run_program(a, [&](Channel& ch) {
    const bool subset = std::includes(r2.begin(), r2.end(), r1.begin(), r1.end());
    const bool reverse = std::includes(r1.begin(), r1.end(), r2.begin(), r2.end());
    if (stdlib::query_subset(ch, e1, e2) != subset) failure = "subset query differs";
    else if (stdlib::query_equal(ch, e1, e2) != (subset && reverse)) failure = "equality query differs";
    else if (stdlib::cardinality(ch, e1) != r1.size()) failure = "cardinality differs";
    else {
      // Cardinality is additive over a split of E1 into created pieces.
      const Symbol inter = stdlib::op_boolean(ch, BooleanKind::kIntersection, e1, e2);
      const Symbol diff = stdlib::op_boolean(ch, BooleanKind::kDifference, e1, e2);
      if (stdlib::cardinality(ch, inter) + stdlib::cardinality(ch, diff) != stdlib::cardinality(ch, e1))
        failure = "cardinality not additive";
    }
    return Bytes{1};
  });
  return failure.empty() ? failure : failure + where;
}

// pure_add_pair against a direct addPair of a random relation. Returns "" on byte equality.
inline std::string check_pure_add_pair(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> n(1, 6), syms(1, 3);
  const auto a = oracle::random_structure(rng, n(rng), syms(rng), 0.3);
  const auto vocab_set = a.vocabulary();
  const std::vector<Symbol> vocab(vocab_set.begin(), vocab_set.end());
  const Symbol e = vocab[rng() % vocab.size()];
  Cloud direct = Cloud(a).add_pair(e);
  Bytes pure;
  auto run = run_program(a, [&](Channel& ch) {
    stdlib::pure_add_pair(ch, e);
    pure = ch.sketch_bytes();
    return Bytes{1};
  });
  if (!run.accepted()) return "pure addPair aborted: " + run.outcome.message;
  if (pure != direct.sketch_bytes())
    return "pure addPair of " + e.text() + " differs on\n" + save_structure(a) + "pure:\n" +
           render_sketch_debug(decode_sketch(pure)) + "direct:\n" + render_sketch_debug(direct.sketch());
  return {};
}

}  // namespace corpus
