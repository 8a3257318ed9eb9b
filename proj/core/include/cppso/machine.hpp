#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cppso/counts.hpp"
#include "cppso/model.hpp"
#include "cppso/rng.hpp"
#include "cppso/source.hpp"
#include "cppso/tree.hpp"
#include "cppso/types.hpp"

namespace cppso {

// Work limits for one execution. max_calls counts node expansions (each
// recursive Sample&Print invocation is one call); max_prints caps emitted
// letters. Exceeding either ends the execution as BudgetExceeded, which the
// surrounding machinery treats as non-termination, not as an error.
struct Budget {
  int max_calls = 500;
  int max_prints = std::numeric_limits<int>::max();
};

enum class RunEvent : std::uint8_t {
  Printed,         // paused right after an Ob node emitted a letter
  Finished,        // root returned; output() is valid
  DeadEnd,         // a weight row with zero total mass; cannot continue
  BudgetExceeded,  // ran out of calls or prints
  NeedDraw,        // external mode: caller must feed() a choice
};

// The categorical choice an externally driven machine is waiting on.
// For Fn draws, `row` is the input symbol selecting the table row.
struct PendingDraw {
  DrawKind kind = DrawKind::Cn;
  SymbolId q = kNoSymbol;
  SymbolId row = kNoSymbol;
};

// Resumable executor of the procedural semantics. One instance runs a single
// top-level Sample&Print(q, i) to completion, pausing at every print. The
// whole state is value-typed, so copying the machine forks the execution —
// that is how particle resampling and exhaustive branch enumeration work.
//
// Draw modes:
//   internal  — choices sampled from the source with a caller-supplied rng;
//   replay    — choices forced from a reference tree (same arena order);
//   external  — run() yields NeedDraw and the caller picks via feed().
// Every mode records draws into draws(), which is also the execution's local
// count delta for the collapsed urn predictive. A replay/external machine
// switched back to internal continues seamlessly (clones of a particle
// filter's reference particle rely on this).
class Machine {
 public:
  Machine() = default;

  void reset(const ModelStructure& model, const SourceRef& source, SymbolId q,
             SymbolId i, Budget budget);

  void set_replay(const ParseTree* reference) { replay_ = reference; }
  void set_external(bool on) { external_ = on; }

  // Advances until the next event. rng may be null in replay/external modes.
  RunEvent run(RngStream* rng = nullptr);

  // External mode, valid after run() returned NeedDraw. Values encode Cn/Fn
  // outputs as j and combinator pairs as f * num_symbols + g. The
  // distribution lists every value with nonzero probability.
  const PendingDraw& pending() const { return pending_; }
  void pending_distribution(std::vector<std::pair<std::int32_t, double>>& out) const;
  void feed(std::int32_t value);

  const std::string& printed() const { return printed_; }
  bool finished() const { return finished_; }
  SymbolId output() const { return tree_.nodes.empty() ? kNoSymbol : tree_.nodes[0].output; }
  const ParseTree& tree() const { return tree_; }
  ParseTree take_tree() { return std::move(tree_); }
  const std::vector<DrawRec>& draws() const { return draws_; }
  int calls_used() const { return budget_.max_calls - calls_left_; }

 private:
  struct Frame {
    std::int32_t node;
    std::int8_t stage;
  };

  bool push_node(SymbolId symbol, SymbolId input, std::int32_t parent, int slot);
  void record(DrawKind kind, std::int16_t q, std::int16_t a, std::int16_t b);

  int delta_count(DrawKind kind, SymbolId q, SymbolId row, std::int32_t cell) const;
  int delta_total(DrawKind kind, SymbolId q, SymbolId row) const;

  int draw_collapsed(const PriorBlock& pb, const CountBlock& cb, DrawKind kind,
                     SymbolId q, SymbolId row, RngStream& rng);

  // Internal-mode draws; return false on a dead end.
  bool draw_cn(SymbolId q, RngStream& rng, SymbolId& out);
  bool draw_fn(SymbolId q, SymbolId input, RngStream& rng, SymbolId& out);
  bool draw_cm(SymbolId q, RngStream& rng, SymbolId& f, SymbolId& g);

  bool next_value(const PendingDraw& ctx, std::int32_t node_idx, RngStream* rng,
                  std::int32_t& value, RunEvent& fail);

  const ModelStructure* model_ = nullptr;
  const WeightTables* weights_ = nullptr;  // materialized source
  const CountTables* base_ = nullptr;      // collapsed source
  const PredictivePrior* prior_ = nullptr;
  bool urn_ = true;

  const ParseTree* replay_ = nullptr;
  bool external_ = false;

  Budget budget_;
  int calls_left_ = 0;

  ParseTree tree_;
  std::vector<Frame> stack_;
  std::vector<DrawRec> draws_;
  std::string printed_;
  bool finished_ = false;
  PendingDraw pending_;
  bool has_pending_ = false;
  std::int32_t fed_value_ = 0;
  bool has_fed_ = false;
};

}  // namespace cppso
