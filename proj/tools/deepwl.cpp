// Command-line front end. Exit codes: 0 success (or "isomorphic"), 1 "non-isomorphic",
// 2 "indeterminate", 3 usage error, 4 input or runtime error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <random>

#include "deepwl/deepwl.hpp"

namespace {

using namespace dwl;

constexpr int kExitIndeterminate = 2;
constexpr int kExitError = 4;

MachineOptions options_with_budget(std::uint64_t max_steps) {
  MachineOptions opt;
  opt.max_steps = max_steps;
  return opt;
}

int cmd_refine(const std::string& path) {
  const auto a = read_structure_file(path);
  const auto c = refine_to_coarsest(a);
  std::size_t diagonal = 0;
  for (ColorId r = 0; r < c.num_colors; ++r) diagonal += c.is_diagonal[r] ? 1 : 0;
  std::cout << "vertices " << a.size() << "\ncolors " << c.num_colors << "\ndiagonal-colors " << diagonal << '\n';
  const auto v = verify_coherent(c, a);
  std::cout << "coherent " << (v.ok ? "yes" : "no") << '\n';
  if (!v.ok) std::cout << "violation " << axiom_name(v.axiom) << ": " << v.message << '\n';
  return v.ok ? 0 : kExitError;
}

int cmd_sketch(const std::string& path, bool hex) {
  const auto bytes = encode_sketch(sketch_of(read_structure_file(path)));
  if (hex) {
    std::cout << to_hex(bytes) << '\n';
  } else {
    std::fwrite(bytes.data(), 1, bytes.size(), stdout);
  }
  return 0;
}

int cmd_run(const std::string& path, const std::string& program, std::uint64_t max_steps, bool trace) {
  MachineOptions opt = options_with_budget(max_steps);
  if (trace)
    opt.on_step = [](std::size_t step, const SketchImage& s) {
      std::cerr << "step " << step << " sketch " << s.size << " bytes\n";
      return true;
    };
  const auto run = run_program(read_structure_file(path), program_by_name(program), opt);
  std::cout << run.transcript();
  if (run.outcome.kind == OutcomeKind::kAbort) std::cerr << "aborted: " << run.outcome.message << '\n';
  return run.outcome.kind == OutcomeKind::kAbort ? kExitError : 0;
}

int cmd_iso(const std::string& a, const std::string& b, const std::string& program, std::uint64_t max_steps) {
  const auto r = iso_test(read_structure_file(a), read_structure_file(b), program_by_name(program),
                          options_with_budget(max_steps));
  std::cout << verdict_text(r.verdict) << '\n';
  if (r.run.outcome.kind == OutcomeKind::kAbort) std::cerr << "aborted: " << r.run.outcome.message << '\n';
  switch (r.verdict) {
    case IsoVerdict::kIsomorphic: return 0;
    case IsoVerdict::kNonIsomorphic: return 1;
    case IsoVerdict::kIndeterminate: return kExitIndeterminate;
  }
  return kExitIndeterminate;
}

int cmd_distinguish(const std::string& a, const std::string& b, const std::string& program, std::uint64_t max_steps) {
  const auto r = distinguisher_run(read_structure_file(a), read_structure_file(b), program_by_name(program),
                                   options_with_budget(max_steps));
  std::cout << r.text() << '\n';
  switch (r.verdict) {
    case DistinguishVerdict::kDistinguished: return 1;
    case DistinguishVerdict::kNotDistinguished: return 0;
    case DistinguishVerdict::kIndeterminate: return kExitIndeterminate;
  }
  return kExitIndeterminate;
}

int cmd_invariant(const std::string& path, const std::string& program, std::uint64_t max_steps) {
  std::cout << to_hex(complete_invariant(read_structure_file(path), program_by_name(program),
                                         options_with_budget(max_steps)))
            << '\n';
  return 0;
}

int cmd_cfi(const std::string& base, const std::string& prefix) {
  const auto pair = cfi_pair(read_structure_file(base));
  write_structure_file(prefix + "-untwisted.txt", pair.untwisted);
  write_structure_file(prefix + "-twisted.txt", pair.twisted);
  std::cout << prefix << "-untwisted.txt\n" << prefix << "-twisted.txt\n";
  return 0;
}

int cmd_fixture(const std::string& name, const std::string& out) {
  const auto a = fixture(name);
  if (out.empty()) std::cout << save_structure(a);
  else write_structure_file(out, a);
  return 0;
}

int cmd_list_fixtures() {
  for (const auto& f : fixture_catalog()) std::cout << f.name << '\t' << f.description << '\n';
  return 0;
}

// Random structure for corpus work; the seed is the only source of randomness.
int cmd_random(std::uint64_t seed, std::size_t n, std::size_t symbols, double density) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution edge(density);
  std::map<Symbol, Relation> rels;
  Vocabulary used;
  for (std::size_t s = 0; s < symbols; ++s) {
    const Symbol name = fresh_symbol(used);
    used.insert(name);
    Relation r;
    for (Vertex u = 0; u < n; ++u)
      for (Vertex v = 0; v < n; ++v)
        if (edge(rng)) r.emplace_back(u, v);
    rels.emplace(name, std::move(r));
  }
  std::cout << save_structure(Structure(n, std::move(rels)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deepwl: 2-WL refinement, algebraic sketches and the DeepWL machine"};
  app.require_subcommand(1);

  std::string file, file_b, program = "halt", out, base, prefix, name;
  std::uint64_t max_steps = 1'000'000, seed = 1;
  bool hex = false, trace = false;
  std::size_t n = 8, symbols = 1;
  double density = 0.3;

  auto* refine = app.add_subcommand("refine", "coarsest coherent configuration: color counts and coherence report");
  refine->add_option("file", file, "structure file")->required();

  auto* sketch = app.add_subcommand("sketch", "canonical sketch bytes (raw, or hex with --hex)");
  sketch->add_option("file", file, "structure file")->required();
  sketch->add_flag("--hex", hex, "print hex instead of raw bytes");

  auto add_program = [&](CLI::App* sub) {
    sub->add_option("--program", program, "halt, explore, kwl<k> or a script file")->capture_default_str();
    sub->add_option("--max-steps", max_steps, "command budget")->capture_default_str();
  };
  auto* run = app.add_subcommand("run", "run a program and dump its transcript");
  run->add_option("file", file, "structure file")->required();
  add_program(run);
  run->add_flag("--trace", trace, "log sketch sizes to stderr as the run proceeds");

  auto* iso = app.add_subcommand("iso", "isomorphism test via a program on the disjoint union");
  iso->add_option("a", file, "first structure")->required();
  iso->add_option("b", file_b, "second structure")->required();
  add_program(iso);

  auto* dist = app.add_subcommand("distinguish", "lockstep runs on both inputs, comparing sketches");
  dist->add_option("a", file, "first structure")->required();
  dist->add_option("b", file_b, "second structure")->required();
  add_program(dist);

  auto* inv = app.add_subcommand("invariant", "hex digest of the transcript on the self-union");
  inv->add_option("file", file, "structure file")->required();
  add_program(inv);

  auto* cfi = app.add_subcommand("cfi", "write the CFI pair over a base graph");
  cfi->add_option("--base", base, "base graph file")->required();
  cfi->add_option("--out-prefix", prefix, "output path prefix")->required();

  auto* fix = app.add_subcommand("fixture", "write a named fixture");
  fix->add_option("name", name, "fixture name");
  fix->add_option("-o,--out", out, "output file (default stdout)");
  auto* list = fix->add_flag("--list", "list the fixture names");

  auto* rnd = app.add_subcommand("random", "random structure for test corpora");
  rnd->add_option("--seed", seed, "corpus seed")->capture_default_str();
  rnd->add_option("-n", n, "universe size")->capture_default_str();
  rnd->add_option("--symbols", symbols, "relation count")->capture_default_str();
  rnd->add_option("--density", density, "pair probability")->check(CLI::Range(0.0, 1.0))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (*refine) return cmd_refine(file);
    if (*sketch) return cmd_sketch(file, hex);
    if (*run) return cmd_run(file, program, max_steps, trace);
    if (*iso) return cmd_iso(file, file_b, program, max_steps);
    if (*dist) return cmd_distinguish(file, file_b, program, max_steps);
    if (*inv) return cmd_invariant(file, program, max_steps);
    if (*cfi) return cmd_cfi(base, prefix);
    if (*fix) {
      if (*list) return cmd_list_fixtures();
      if (name.empty()) {
        std::cerr << "fixture: a name or --list is required\n";
        return 3;
      }
      return cmd_fixture(name, out);
    }
    if (*rnd) return cmd_random(seed, n, symbols, density);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 3;
}
