#pragma once

#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "deepwl/digest.hpp"
#include "deepwl/refine.hpp"
#include "deepwl/sketch.hpp"
#include "deepwl/sketch_ops.hpp"
#include "deepwl/structure.hpp"

namespace dwl {

using Bytes = std::vector<std::uint8_t>;

// Sketches whose unary encoding exceeds this are carried by digest; cost still uses the full length.
inline constexpr std::uint64_t kInlineSketchBytes = std::uint64_t{1} << 20;

// One delivered sketch: its canonical bytes when small enough, else its digest; plus its encoded length.
struct SketchImage {
  std::optional<Bytes> bytes;
  std::optional<Digest> digest;
  std::uint64_t size = 0;

  static SketchImage of(const AlgebraicSketch& d) {
    SketchImage out;
    out.size = encoded_size_bytes(d);
    if (out.size <= kInlineSketchBytes) out.bytes = encode_sketch(d);
    else out.digest = sketch_digest(d);
    return out;
  }

  std::string text() const { return bytes ? to_hex(*bytes) : "sha256:" + to_hex(*digest); }
  bool operator==(const SketchImage&) const = default;
};

// ---- concrete command semantics on plain structures ----

// Appends one vertex per pair of p (in sorted order) and records how it hangs off its endpoints.
// left/right are created empty when absent; dx must be new.
inline Structure add_pair_vertices(const Structure& a, const Relation& p, const Symbol& left, const Symbol& right,
                                   const Symbol& dx) {
  if (a.has_symbol(dx)) throw PreconditionError("symbol " + dx.text() + " already in use");
  auto rels = a.relations();
  auto& l = rels[left];
  auto& r = rels[right];
  auto& d = rels[dx];
  const auto n = static_cast<Vertex>(a.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vertex x = n + static_cast<Vertex>(i);
    if (p[i].first >= n || p[i].second >= n) throw PreconditionError("pair outside the universe");
    l.emplace_back(p[i].first, x);
    r.emplace_back(p[i].second, x);
    d.emplace_back(x, x);
  }
  return Structure(a.size() + p.size(), std::move(rels));
}

struct ContractionResult {
  Structure structure;
  std::vector<Vertex> image;                    // old vertex -> new vertex
  std::vector<std::vector<Vertex>> components;  // contracted groups, in new-vertex order
};

// Replaces every strongly connected component of r by one fresh vertex tagged with dx.
// Untouched vertices keep their relative order and come first.
inline ContractionResult contract_components(const Structure& a, const Relation& r, const Symbol& dx) {
  if (a.has_symbol(dx)) throw PreconditionError("symbol " + dx.text() + " already in use");
  ContractionResult out;
  out.components = strongly_connected_components(a.size(), r);
  constexpr Vertex kUnset = ~Vertex{0};
  out.image.assign(a.size(), kUnset);
  std::vector<bool> member(a.size(), false);
  for (const auto& comp : out.components)
    for (Vertex v : comp) member[v] = true;
  Vertex next = 0;
  for (Vertex v = 0; v < a.size(); ++v)
    if (!member[v]) out.image[v] = next++;
  std::map<Symbol, Relation> rels;
  Relation d;
  for (const auto& comp : out.components) {
    for (Vertex v : comp) out.image[v] = next;
    d.emplace_back(next, next);
    ++next;
  }
  for (const auto& [sym, rel] : a.relations()) {
    Relation mapped;
    mapped.reserve(rel.size());
    for (auto [u, v] : rel) mapped.emplace_back(out.image[u], out.image[v]);
    rels.emplace(sym, std::move(mapped));
  }
  rels.emplace(dx, std::move(d));
  out.structure = Structure(next, std::move(rels));
  return out;
}

// ---- commands ----

struct AddPair {
  Symbol target;
};
struct Contract {
  Symbol target;
};
struct Create {
  std::vector<Symbol> colors;
};
struct Forget {
  Symbol target;
};
struct Halt {
  Bytes output;
};
using Command = std::variant<AddPair, Contract, Create, Forget, Halt>;

inline std::string command_text(const Command& cmd) {
  return std::visit(
      [](const auto& c) -> std::string {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, AddPair>) return "addPair " + c.target.text();
        else if constexpr (std::is_same_v<T, Contract>) return "contract " + c.target.text();
        else if constexpr (std::is_same_v<T, Forget>) return "forget " + c.target.text();
        else if constexpr (std::is_same_v<T, Create>) {
          std::string s = "create";
          for (const auto& x : c.colors) s += " " + x.text();
          return s;
        } else {
          return "halt " + to_hex(c.output);
        }
      },
      cmd);
}

inline Command parse_command(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::string op;
  in >> op;
  std::vector<std::string> args;
  for (std::string a; in >> a;) args.push_back(a);
  auto one = [&]() {
    if (args.size() != 1) throw PreconditionError("command " + op + " takes exactly one argument");
    return Symbol::from_text(args[0]);
  };
  if (op == "addPair") return AddPair{one()};
  if (op == "contract") return Contract{one()};
  if (op == "forget") return Forget{one()};
  if (op == "create") {
    Create c;
    for (const auto& a : args) c.colors.push_back(Symbol::from_text(a));
    return c;
  }
  if (op == "halt") {
    if (args.size() > 1) throw PreconditionError("halt takes at most one hex argument");
    return Halt{args.empty() ? Bytes{} : from_hex(args[0])};
  }
  throw PreconditionError("unknown command: " + op);
}

// ---- the cloud ----

// Which input of a disjoint union a vertex belongs to.
enum class Side : std::uint8_t { kNone, kFirst, kSecond, kMixed };
enum class Origin : std::uint8_t { kInput, kPair, kContracted };

struct VertexProvenance {
  Origin origin = Origin::kInput;
  Side side = Side::kNone;
  bool crossing = false;        // pair of plain vertices from different sides
  std::vector<Vertex> parents;  // pair endpoints, renumbered across contractions

  bool plain() const { return side == Side::kFirst || side == Side::kSecond; }
};

class Cloud {
 public:
  explicit Cloud(Structure a, const std::vector<Side>& sides = {}) {
    if (!sides.empty() && sides.size() != a.size()) throw PreconditionError("side tags do not match the universe");
    provenance_.resize(a.size());
    for (std::size_t v = 0; v < sides.size(); ++v) provenance_[v].side = sides[v];
    structure_ = std::move(a);
    recompute();
  }

  const Structure& structure() const noexcept { return structure_; }
  const CoherentConfiguration& config() const noexcept { return config_; }
  const AlgebraicSketch& sketch() const noexcept { return sketch_; }
  const SketchImage& image() const noexcept { return image_; }
  // Full canonical encoding; encoded on demand when the image holds only a digest.
  Bytes sketch_bytes() const { return image_.bytes ? *image_.bytes : encode_sketch(sketch_); }
  const std::vector<VertexProvenance>& provenance() const noexcept { return provenance_; }
  const PairSymbols& pair_symbols() const noexcept { return pair_symbols_; }
  // Canonical color index of each raw configuration color.
  const std::vector<ColorId>& canonical_of_raw() const noexcept { return canon_of_raw_; }
  // Symbol introduced by the last command (D_X or E_pi), if any.
  const std::optional<Symbol>& last_allocated() const noexcept { return last_allocated_; }

  // Pair set named by a relation symbol or a color name.
  Relation resolve(const Symbol& x) const {
    if (structure_.has_symbol(x)) return structure_.relation(x);
    if (auto c = sketch_.color_index(x)) return pairs_of_canonical(*c);
    throw UnknownName("unknown relation or color " + x.text());
  }

  Relation pairs_of_canonical(ColorId c) const {
    Relation out;
    for (Vertex u = 0; u < config_.n; ++u)
      for (Vertex v = 0; v < config_.n; ++v)
        if (canon_of_raw_[config_.color(u, v)] == c) out.emplace_back(u, v);
    return out;
  }

  Cloud add_pair(const Symbol& x) const {
    const Relation p = resolve(x);
    Vocabulary used = structure_.vocabulary();
    PairSymbols ps = pair_symbols_;
    auto ensure = [&](std::optional<Symbol>& slot) {
      if (!slot || !used.contains(*slot)) {
        slot = fresh_symbol(used);
        used.insert(*slot);
      }
    };
    ensure(ps.left);
    ensure(ps.right);
    const Symbol dx = fresh_symbol(used);
    Cloud next = *this;
    next.structure_ = add_pair_vertices(structure_, p, *ps.left, *ps.right, dx);
    for (auto [u, v] : p) {
      VertexProvenance pv;
      pv.origin = Origin::kPair;
      pv.parents = {u, v};
      const auto& a = provenance_[u];
      const auto& b = provenance_[v];
      pv.side = a.side == b.side ? a.side : Side::kMixed;
      pv.crossing = a.plain() && b.plain() && a.side != b.side;
      next.provenance_.push_back(std::move(pv));
    }
    next.pair_symbols_ = std::move(ps);
    next.last_allocated_ = dx;
    next.recompute();
    return next;
  }

  Cloud contract(const Symbol& x) const {
    const Relation r = resolve(x);
    const Symbol dx = fresh_symbol(structure_.vocabulary());
    auto result = contract_components(structure_, r, dx);
    Cloud next = *this;
    next.structure_ = std::move(result.structure);
    std::vector<VertexProvenance> prov(next.structure_.size());
    std::vector<bool> member(structure_.size(), false);
    for (const auto& comp : result.components)
      for (Vertex v : comp) member[v] = true;
    for (Vertex v = 0; v < structure_.size(); ++v)
      if (!member[v]) prov[result.image[v]] = provenance_[v];
    const Vertex first_comp = static_cast<Vertex>(next.structure_.size() - result.components.size());
    for (std::size_t i = 0; i < result.components.size(); ++i) {
      auto& pv = prov[first_comp + i];
      pv.origin = Origin::kContracted;
      const auto& comp = result.components[i];
      pv.side = provenance_[comp.front()].side;
      for (Vertex v : comp)
        if (provenance_[v].side != pv.side) pv.side = Side::kMixed;
    }
    for (auto& pv : prov)
      for (auto& p : pv.parents) p = result.image[p];
    next.provenance_ = std::move(prov);
    next.last_allocated_ = dx;
    next.recompute();
    return next;
  }

  Cloud create(const std::vector<Symbol>& colors) const {
    std::vector<bool> chosen(sketch_.num_colors(), false);
    for (const auto& c : colors) chosen[sketch_.require_color(c)] = true;
    Relation e;
    for (Vertex u = 0; u < config_.n; ++u)
      for (Vertex v = 0; v < config_.n; ++v)
        if (chosen[canon_of_raw_[config_.color(u, v)]]) e.emplace_back(u, v);
    const Symbol name = fresh_symbol(structure_.vocabulary());
    Cloud next = *this;
    next.structure_ = structure_.with_relation(name, std::move(e));
    next.last_allocated_ = name;
    next.recompute();
    return next;
  }

  Cloud forget(const Symbol& e) const {
    Cloud next = *this;
    next.structure_ = structure_.without_relation(e);
    if (next.pair_symbols_.left == e) next.pair_symbols_.left.reset();
    if (next.pair_symbols_.right == e) next.pair_symbols_.right.reset();
    next.last_allocated_.reset();
    next.recompute();
    return next;
  }

  Cloud apply(const Command& cmd) const {
    return std::visit(
        [&](const auto& c) -> Cloud {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, AddPair>) return add_pair(c.target);
          else if constexpr (std::is_same_v<T, Contract>) return contract(c.target);
          else if constexpr (std::is_same_v<T, Create>) return create(c.colors);
          else if constexpr (std::is_same_v<T, Forget>) return forget(c.target);
          else throw PreconditionError("halt does not change the cloud");
        },
        cmd);
  }

 private:
  void recompute() {
    config_ = refine_to_coarsest(structure_);
    auto form = canonical_form(structure_, config_);
    sketch_ = std::move(form.sketch);
    canon_of_raw_ = std::move(form.class_of_input);
    image_ = SketchImage::of(sketch_);
  }

  Structure structure_;
  CoherentConfiguration config_;
  AlgebraicSketch sketch_;
  std::vector<ColorId> canon_of_raw_;
  SketchImage image_;
  std::vector<VertexProvenance> provenance_;
  PairSymbols pair_symbols_;
  std::optional<Symbol> last_allocated_;
};

// ---- program execution ----

struct MachineOptions {
  std::uint64_t max_steps = 1'000'000;  // mutating commands allowed
  bool charge_refinement = false;       // add n^3 per recomputation to the cost
  bool verify_each = false;             // run the coherence checker after every command
  // Called after every sketch delivery; returning false stops the run.
  std::function<bool(std::size_t step, const SketchImage& sketch)> on_step;
};

enum class OutcomeKind { kAccept, kReject, kHalt, kBudget, kAbort };

struct Outcome {
  OutcomeKind kind = OutcomeKind::kAbort;
  Bytes output;
  std::string message;

  std::string text() const {
    switch (kind) {
      case OutcomeKind::kAccept: return "accept";
      case OutcomeKind::kReject: return "reject";
      case OutcomeKind::kHalt: return "halt:" + to_hex(output);
      case OutcomeKind::kBudget: return "budget";
      case OutcomeKind::kAbort: return "abort";
    }
    return "abort";
  }
};

struct RunStep {
  std::string command;
  SketchImage sketch;
};

struct InternalRun {
  std::vector<RunStep> steps;
  std::uint64_t cost = 0;
  std::uint64_t coherence_checks = 0;
  Outcome outcome;

  bool accepted() const { return outcome.kind == OutcomeKind::kAccept; }

  std::string transcript() const {
    std::string out;
    for (std::size_t i = 0; i < steps.size(); ++i)
      out += "STEP " + std::to_string(i) + " CMD " + steps[i].command + " SKETCH " + steps[i].sketch.text() + "\n";
    out += "OUTCOME " + outcome.text() + "\n";
    return out;
  }
};

class BudgetExhausted : public Error {
 public:
  BudgetExhausted() : Error("step budget exhausted") {}
};

class RunStopped : public Error {
 public:
  RunStopped() : Error("run stopped by observer") {}
};

// The only view of the machine a program gets: the current sketch and a way to issue commands.
class Channel {
 public:
  Channel(Cloud cloud, const MachineOptions& options, InternalRun& run)
      : cloud_(std::move(cloud)), options_(options), run_(run) {
    deliver("init");
  }

  const AlgebraicSketch& sketch() const noexcept { return cloud_.sketch(); }
  Bytes sketch_bytes() const { return cloud_.sketch_bytes(); }
  const PairSymbols& pair_symbols() const noexcept { return cloud_.pair_symbols(); }
  std::uint64_t steps_taken() const noexcept { return steps_; }

  const AlgebraicSketch& execute(const Command& cmd) {
    if (std::holds_alternative<Halt>(cmd)) throw PreconditionError("return the output instead of issuing halt");
    if (steps_ >= options_.max_steps) throw BudgetExhausted();
    ++steps_;
    ++run_.cost;
    cloud_ = cloud_.apply(cmd);
    deliver(command_text(cmd));
    return cloud_.sketch();
  }

  Symbol add_pair(const Symbol& x) { return allocated(AddPair{x}); }
  Symbol contract(const Symbol& x) { return allocated(Contract{x}); }
  Symbol create(std::vector<Symbol> colors) { return allocated(Create{std::move(colors)}); }
  void forget(const Symbol& e) { execute(Forget{e}); }

  // Color names for a set of canonical color indices of the current sketch.
  std::vector<Symbol> color_names(const ColorMask& mask) const {
    std::vector<Symbol> out;
    for (ColorId r = 0; r < mask.size(); ++r)
      if (mask[r]) out.push_back(sketch().sigma()[r]);
    return out;
  }

  // Testing hook: the cloud itself is not visible to programs.
  const Cloud& cloud_for_testing() const noexcept { return cloud_; }

 private:
  Symbol allocated(const Command& cmd) {
    execute(cmd);
    return *cloud_.last_allocated();
  }

  void deliver(std::string command) {
    run_.cost += cloud_.image().size;
    if (options_.charge_refinement) {
      const std::uint64_t n = cloud_.structure().size();
      run_.cost += n * n * n;
    }
    if (options_.verify_each) {
      auto verdict = verify_coherent(cloud_.config(), cloud_.structure());
      ++run_.coherence_checks;
      if (!verdict.ok) throw Error("coherence check failed: " + verdict.message);
    }
    run_.steps.push_back({std::move(command), cloud_.image()});
    if (options_.on_step && !options_.on_step(run_.steps.size() - 1, cloud_.image())) throw RunStopped();
  }

  Cloud cloud_;
  const MachineOptions& options_;
  InternalRun& run_;
  std::uint64_t steps_ = 0;
};

// A program reads sketches and issues commands through the channel, then returns its output.
using Program = std::function<Bytes(Channel&)>;

inline Outcome outcome_of_output(Bytes output) {
  Outcome o;
  if (!output.empty() && output[0] == 1) o.kind = OutcomeKind::kAccept;
  else if (!output.empty() && output[0] == 0) o.kind = OutcomeKind::kReject;
  else o.kind = OutcomeKind::kHalt;
  o.output = std::move(output);
  return o;
}

inline InternalRun run_program(const Cloud& start, const Program& program, const MachineOptions& options = {}) {
  InternalRun run;
  try {
    Channel channel(start, options, run);
    Bytes out = program(channel);
    ++run.cost;  // the halting decision
    run.outcome = outcome_of_output(std::move(out));
  } catch (const BudgetExhausted& e) {
    run.outcome = {OutcomeKind::kBudget, {}, e.what()};
  } catch (const Error& e) {
    run.outcome = {OutcomeKind::kAbort, {}, e.what()};
  }
  return run;
}

inline InternalRun run_program(const Structure& a, const Program& program, const MachineOptions& options = {}) {
  return run_program(Cloud(a), program, options);
}

}  // namespace dwl
