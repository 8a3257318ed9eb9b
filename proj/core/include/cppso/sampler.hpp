#pragma once

#include <string>

#include "cppso/machine.hpp"
#include "cppso/model.hpp"
#include "cppso/rng.hpp"
#include "cppso/source.hpp"
#include "cppso/tree.hpp"

namespace cppso {

enum class ExecStatus : std::uint8_t { Returned, BudgetExceeded };

// Result of one complete execution: final status, the symbol the root
// returned, the letters printed along the way, and the full trace.
struct ExecOutcome {
  ExecStatus status = ExecStatus::BudgetExceeded;
  SymbolId output = kNoSymbol;
  std::string printed;
  ParseTree trace;
};

// One run of the plain procedural semantics from (q, i): draw through the
// case split until the root returns. On models with Ob symbols the prints
// are still recorded; plain models never print.
ExecOutcome sample(const SourceRef& source, const ModelStructure& model, SymbolId q,
                   SymbolId i, Budget budget, RngStream& rng);

// Identical machinery under the sequential-observation reading (prints are
// the point); provided as its own entry to keep call sites self-describing.
ExecOutcome sample_and_print(const SourceRef& source, const ModelStructure& model,
                             SymbolId q, SymbolId i, Budget budget, RngStream& rng);

// One draw from the model's observation distribution: run from (q0, q1) and
// keep the printed string.
ExecOutcome generate(const SourceRef& source, const ModelStructure& model,
                     Budget budget, RngStream& rng);

}  // namespace cppso
