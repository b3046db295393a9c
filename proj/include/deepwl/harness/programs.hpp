#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "deepwl/machine.hpp"
#include "deepwl/sketch_ops.hpp"
#include "deepwl/stdlib.hpp"

namespace dwl {

inline Bytes verdict_with_digest(bool verdict, const AlgebraicSketch& d) {
  Bytes out{static_cast<std::uint8_t>(verdict ? 1 : 0)};
  const Digest h = sketch_digest(d);
  out.insert(out.end(), h.begin(), h.end());
  return out;
}

// Halts at once; accepts.
inline Program halt_program() {
  return [](Channel&) { return Bytes{1}; };
}

// k-WL as pair creation: every round materialises the current tuples (inside one connected
// component) combined with one more original vertex as fresh pair vertices, then halts.
// The verdict byte is 1 iff some original-vertex class meets two components, which on a
// union of two connected inputs means they were not told apart.
inline Program kwl_program(int k) {
  if (k < 2) throw PreconditionError("k-WL program needs k >= 2");
  return [k](Channel& ch) {
    const Symbol conn = stdlib::create_mask(ch, connectivity_mask(ch.sketch()));
    const Symbol original = stdlib::op_diag(ch);
    Symbol tuples = original;
    for (int round = 1; round <= k - 2; ++round) {
      if (round == 1) {
        tuples = ch.add_pair(conn);
        continue;
      }
      // Pairs (tuple vertex, original vertex) inside one component.
      const auto& d = ch.sketch();
      const auto reach = connectivity_mask(d);
      const auto from = stdlib::inside_mask(d, tuples);
      const auto to = stdlib::inside_mask(d, original);
      ColorMask step(d.num_colors(), false);
      for (ColorId r = 0; r < d.num_colors(); ++r) step[r] = reach[r] && from[d.meta().dom[r]] && to[d.meta().cod[r]];
      const Symbol step_symbol = stdlib::create_mask(ch, step);
      tuples = ch.add_pair(step_symbol);
      ch.forget(step_symbol);
    }
    const auto& d = ch.sketch();
    const auto inside_conn = stdlib::inside_mask(d, conn);
    const auto orig = stdlib::inside_mask(d, original);
    bool shared = false;
    for (ColorId r = 0; r < d.num_colors(); ++r)
      if (!d.is_diagonal(r) && !inside_conn[r] && d.meta().dom[r] == d.meta().cod[r] && orig[d.meta().dom[r]]) shared = true;
    return verdict_with_digest(shared, d);
  };
}

// Exercises every command kind through stdlib fragments; used for invariance tests.
inline Program explore_program() {
  return [](Channel& ch) {
    const auto tau = ch.sketch().tau();
    if (tau.empty()) return verdict_with_digest(false, ch.sketch());
    const Symbol first = tau.front();
    const Symbol scc = stdlib::op_scc(ch, first);
    const Symbol supp = stdlib::op_supp(ch, first);
    ch.add_pair(supp);
    ch.forget(supp);
    ch.contract(scc);
    const bool big = stdlib::cardinality(ch, first) > 2;
    return verdict_with_digest(big, ch.sketch());
  };
}

// Literal command list, one per line; `halt <hex>` ends it (default output 01). '#' starts a comment.
inline Program script_program(const std::string& text) {
  std::vector<Command> commands;
  std::istringstream in(text);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      commands.push_back(parse_command(line));
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return [commands](Channel& ch) {
    for (const auto& c : commands) {
      if (const auto* h = std::get_if<Halt>(&c)) return h->output;
      ch.execute(c);
    }
    return Bytes{1};
  };
}

// Named programs: halt, explore, kwl<k>; anything else is read as a script file.
inline Program program_by_name(const std::string& name) {
  if (name == "halt") return halt_program();
  if (name == "explore") return explore_program();
  if (name.rfind("kwl", 0) == 0 && name.size() > 3 &&
      name.find_first_not_of("0123456789", 3) == std::string::npos)
    return kwl_program(std::stoi(name.substr(3)));
  std::ifstream file(name);
  if (!file) throw UnknownName("unknown program " + name);
  std::stringstream buf;
  buf << file.rdbuf();
  return script_program(buf.str());
}

}  // namespace dwl
