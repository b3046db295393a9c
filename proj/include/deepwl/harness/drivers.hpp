#pragma once

#include <array>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <thread>

#include "deepwl/machine.hpp"

namespace dwl {

struct PreparedUnion {
  Structure structure;
  std::vector<Side> sides;
  std::optional<Symbol> auxiliary;  // all-pairs relation per side, when one was needed
};

// A1 ⊎ A2 with side tags; if either side is disconnected, each side first gets its complete
// pair set under one fresh symbol so that both sides become connected.
inline PreparedUnion prepare_union(const Structure& a1, const Structure& a2) {
  if (a1.vocabulary() != a2.vocabulary()) throw PreconditionError("inputs have different vocabularies");
  PreparedUnion out;
  const bool connected = connected_components(a1).size() <= 1 && connected_components(a2).size() <= 1;
  if (connected) {
    out.structure = disjoint_union(a1, a2);
  } else {
    const Symbol aux = fresh_symbol(a1.vocabulary());
    auto complete = [](std::size_t n) {
      Relation r;
      for (Vertex u = 0; u < n; ++u)
        for (Vertex v = 0; v < n; ++v) r.emplace_back(u, v);
      return r;
    };
    out.structure = disjoint_union(a1.with_relation(aux, complete(a1.size())), a2.with_relation(aux, complete(a2.size())));
    out.auxiliary = aux;
  }
  out.sides.assign(a1.size(), Side::kFirst);
  out.sides.resize(a1.size() + a2.size(), Side::kSecond);
  return out;
}

enum class IsoVerdict { kIsomorphic, kNonIsomorphic, kIndeterminate };

inline const char* verdict_text(IsoVerdict v) {
  switch (v) {
    case IsoVerdict::kIsomorphic: return "isomorphic";
    case IsoVerdict::kNonIsomorphic: return "non-isomorphic";
    case IsoVerdict::kIndeterminate: return "indeterminate";
  }
  return "indeterminate";
}

struct IsoResult {
  IsoVerdict verdict;
  InternalRun run;
};

inline IsoResult iso_test(const Structure& a1, const Structure& a2, const Program& program,
                          const MachineOptions& options = {}) {
  auto u = prepare_union(a1, a2);
  IsoResult out{IsoVerdict::kIndeterminate, run_program(Cloud(u.structure, u.sides), program, options)};
  if (out.run.outcome.kind == OutcomeKind::kAccept) out.verdict = IsoVerdict::kIsomorphic;
  else if (out.run.outcome.kind == OutcomeKind::kReject) out.verdict = IsoVerdict::kNonIsomorphic;
  return out;
}

enum class DistinguishVerdict { kDistinguished, kNotDistinguished, kIndeterminate };

struct DistinguishResult {
  DistinguishVerdict verdict = DistinguishVerdict::kIndeterminate;
  std::optional<std::size_t> step;  // first differing sketch
  std::array<InternalRun, 2> runs;

  std::string text() const {
    switch (verdict) {
      case DistinguishVerdict::kDistinguished: return "distinguished at step " + std::to_string(*step);
      case DistinguishVerdict::kNotDistinguished: return "not distinguished";
      case DistinguishVerdict::kIndeterminate: return "indeterminate";
    }
    return "indeterminate";
  }
};

namespace detail {

// Per-step rendezvous of two runs; the first differing sketch stops both.
class Lockstep {
 public:
  bool post(int side, std::size_t step, const SketchImage& sketch) {
    std::unique_lock lock(mutex_);
    seen_[side].push_back(sketch);
    changed_.notify_all();
    const int other = 1 - side;
    changed_.wait(lock, [&] { return diverged_ || seen_[other].size() > step || finished_[other]; });
    if (diverged_) return false;
    if (seen_[other].size() <= step || seen_[other][step] != seen_[side][step]) {
      diverged_ = step;
      changed_.notify_all();
      return false;
    }
    return true;
  }

  void finish(int side) {
    std::lock_guard lock(mutex_);
    finished_[side] = true;
    changed_.notify_all();
  }

  std::optional<std::size_t> diverged() const { return diverged_; }

 private:
  std::mutex mutex_;
  std::condition_variable changed_;
  std::array<std::vector<SketchImage>, 2> seen_;
  std::array<bool, 2> finished_{};
  std::optional<std::size_t> diverged_;
};

}  // namespace detail

// Runs the program on both inputs side by side and compares sketches step by step.
inline DistinguishResult distinguisher_run(const Structure& a1, const Structure& a2, const Program& program,
                                           const MachineOptions& options = {}) {
  if (a1.vocabulary() != a2.vocabulary()) throw PreconditionError("inputs have different vocabularies");
  detail::Lockstep sync;
  DistinguishResult out;
  auto worker = [&](int side, const Structure& a) {
    MachineOptions opt = options;
    opt.on_step = [&, side](std::size_t step, const SketchImage& sketch) { return sync.post(side, step, sketch); };
    out.runs[side] = run_program(a, program, opt);
    sync.finish(side);
  };
  {
    std::jthread first(worker, 0, std::cref(a1));
    worker(1, a2);
  }
  if (auto step = sync.diverged()) {
    out.verdict = DistinguishVerdict::kDistinguished;
    out.step = step;
    return out;
  }
  const auto& r0 = out.runs[0];
  const auto& r1 = out.runs[1];
  const auto halted = [](const InternalRun& r) {
    return r.outcome.kind != OutcomeKind::kBudget && r.outcome.kind != OutcomeKind::kAbort;
  };
  if (halted(r0) && halted(r1)) {
    if (r0.transcript() == r1.transcript()) {
      out.verdict = DistinguishVerdict::kNotDistinguished;
    } else {
      out.verdict = DistinguishVerdict::kDistinguished;
      out.step = r0.steps.size();
    }
  }
  return out;
}

// Digest of the full transcript of the program on A ⊎ A.
inline Digest complete_invariant(const Structure& a, const Program& program, const MachineOptions& options = {}) {
  auto u = prepare_union(a, a);
  auto run = run_program(Cloud(u.structure, u.sides), program, options);
  if (run.outcome.kind == OutcomeKind::kBudget) throw Error("invariant run exhausted its budget");
  if (run.outcome.kind == OutcomeKind::kAbort) throw Error("invariant run aborted: " + run.outcome.message);
  return Sha256().update(run.transcript()).finish();
}

}  // namespace dwl
