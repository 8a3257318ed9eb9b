#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "cppso/counts.hpp"
#include "cppso/model.hpp"
#include "cppso/types.hpp"

namespace cppso {

// Concentration table of one categorical context, stored as a uniform base
// value plus sparse overrides so samplers touch O(#overrides) cells instead
// of the whole table. `additive` is true when every override >= base, which
// enables O(1) sampling of the uniform part.
struct PriorBlock {
  int n_cells = 0;
  double base = 0.0;
  double total = 0.0;
  std::vector<std::pair<std::int32_t, double>> overrides;  // cell -> value
  bool additive = true;

  double cell(int c) const {
    for (const auto& [oc, v] : overrides) {
      if (oc == c) return v;
    }
    return base;
  }
};

// PriorSpec compiled into PriorBlocks: one per Cn symbol, per Fn row, per
// combinator symbol (cells flattened f * |Q| + g).
struct PredictivePrior {
  int num_symbols = 0;
  std::vector<PriorBlock> cn;
  std::vector<std::vector<PriorBlock>> fn;
  std::vector<PriorBlock> cm;

  static PredictivePrior compile(const ModelStructure& model, const PriorSpec& spec);
};

// One categorical draw of an execution, in draw order. Doubles as the
// execution's count delta: under within-trace urn updating, each prior draw
// of the same context adds one pseudo-count to its cell.
enum class DrawKind : std::uint8_t { Cn, Fn, Cm };

struct DrawRec {
  DrawKind kind;
  std::int16_t q;
  std::int16_t a;  // Cn: output j.  Fn: input i.  Cm: f.
  std::int16_t b;  // Fn: output j.  Cm: g.
};

// Where an execution's categorical probabilities come from: fixed weight
// tables, or the collapsed Dirichlet-multinomial predictive given global
// counts (plus the execution's own draws when `urn` is set).
struct CollapsedRef {
  const CountTables* base = nullptr;
  const PredictivePrior* prior = nullptr;
  bool urn = true;
};

using SourceRef = std::variant<const WeightTables*, CollapsedRef>;

// Predictive distribution of one context under counts + prior, no deltas:
// cell = (alpha + count) / sum(alpha + count). Contexts: a Cn symbol, an
// (Fn symbol, input row), or a combinator symbol (|Q|^2 cells).
Eigen::VectorXd predictive_cn(const CountTables& counts, const PredictivePrior& prior,
                              SymbolId q);
Eigen::VectorXd predictive_fn_row(const CountTables& counts, const PredictivePrior& prior,
                                  SymbolId q, SymbolId input);
Eigen::MatrixXd predictive_cm(const CountTables& counts, const PredictivePrior& prior,
                              SymbolId q);

// Posterior mean weight tables under the same closed form, shaped like the
// model's WeightTables (always passes validate_weights since alphas are
// positive).
WeightTables posterior_mean_weights(const ModelStructure& model,
                                    const CountTables& counts,
                                    const PredictivePrior& prior);

// Collapsed probability of a full trace: the product of predictive factors
// in draw order, with earlier draws of the trace feeding later factors when
// `urn` is set. Log scale.
double trace_log_prob(const ModelStructure& model, const CountTables& base,
                      const PredictivePrior& prior, const ParseTree& tree,
                      bool urn = true);

}  // namespace cppso
