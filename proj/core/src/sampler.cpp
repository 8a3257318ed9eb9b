#include "cppso/sampler.hpp"

namespace cppso {

namespace {

ExecOutcome run_to_completion(const SourceRef& source, const ModelStructure& model,
                              SymbolId q, SymbolId i, Budget budget, RngStream& rng) {
  Machine m;
  m.reset(model, source, q, i, budget);
  ExecOutcome out;
  for (;;) {
    switch (m.run(&rng)) {
      case RunEvent::Printed:
        continue;
      case RunEvent::Finished:
        out.status = ExecStatus::Returned;
        out.output = m.output();
        out.printed = m.printed();
        out.trace = m.take_tree();
        return out;
      case RunEvent::DeadEnd:
      case RunEvent::BudgetExceeded:
        out.status = ExecStatus::BudgetExceeded;
        out.output = kNoSymbol;
        out.printed = m.printed();
        out.trace = m.take_tree();
        return out;
      case RunEvent::NeedDraw:
        throw std::logic_error("sampler machine unexpectedly externalized");
    }
  }
}

}  // namespace

ExecOutcome sample(const SourceRef& source, const ModelStructure& model, SymbolId q,
                   SymbolId i, Budget budget, RngStream& rng) {
  return run_to_completion(source, model, q, i, budget, rng);
}

ExecOutcome sample_and_print(const SourceRef& source, const ModelStructure& model,
                             SymbolId q, SymbolId i, Budget budget, RngStream& rng) {
  return run_to_completion(source, model, q, i, budget, rng);
}

ExecOutcome generate(const SourceRef& source, const ModelStructure& model,
                     Budget budget, RngStream& rng) {
  return sample_and_print(source, model, model.q0, model.q1, budget, rng);
}

}  // namespace cppso
