#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

#include "cppso/model.hpp"
#include "cppso/source.hpp"
#include "cppso/tree.hpp"
#include "cppso/types.hpp"

namespace cppso {

// Exact symbol semantics: table[q](i, j) is the probability that running
// symbol q on input i terminates and returns j. Rows may sum to less than 1;
// the deficit is the probability of non-termination.
struct SemanticsTable {
  std::vector<Eigen::MatrixXd> table;  // indexed by symbol
  int iterations = 0;
  double max_residual = 0.0;
  bool converged = false;
};

struct SemanticsOptions {
  double tol = 1e-9;
  int max_iter = 10000;
};

// Least fixed point of the semantic equations by iteration from all-zero
// tables. Requires a model using only the plain types {Id, Cn, Fn, S2, P21}
// and weights passing validate_weights; throws std::invalid_argument
// otherwise. Non-convergence within max_iter leaves converged == false with
// the partial table returned.
SemanticsTable evaluate_semantics(const ModelStructure& model,
                                  const WeightTables& weights,
                                  SemanticsOptions opts = {});

// One update step for a composite symbol given the current table:
// S2(i,j)  = sum_{f,g} W[f,g] (M_f M_g)(i,j)
// P21(i,j) = sum_{f,g,k,l} W[f,g] M_f(i,k) M_g(i,l) M_l(k,j)
// Throws std::invalid_argument unless q is S2- or P21-typed.
Eigen::MatrixXd compose_step(const SemanticsTable& table, const ModelStructure& model,
                             const WeightTables& weights, SymbolId q);

// Exhaustive expansion of the observation semantics from (q0, q1): every
// branch of every categorical draw is followed, weighted by its probability.
// Branches whose printed output deviates from x (or terminates without
// completing it) are discarded as known misses; branches cut by the call
// budget or the mass floor count into truncated_mass. So
//   matched_mass <= p(x) <= matched_mass + truncated_mass.
struct OracleOptions {
  int max_calls = 500;
  double mass_floor = 0.0;   // prune branches below this mass (into truncated)
  bool collect_trees = false;
};

struct WeightedTree {
  ParseTree tree;
  double mass = 0.0;
};

struct OracleResult {
  double matched_mass = 0.0;
  double truncated_mass = 0.0;
  int max_calls = 0;
  std::vector<WeightedTree> trees;  // full-match traces, when collected
};

OracleResult observation_oracle(const ModelStructure& model, const SourceRef& source,
                                std::string_view x, OracleOptions opts = {});

// Monte Carlo validation binding the sampler to the exact table: frequencies
// of outputs of n_samples runs from (q, i), each cell checked against a
// 4-standard-error binomial interval, non-termination included.
struct CellCheck {
  SymbolId j = kNoSymbol;  // kNoSymbol row = non-termination mass
  double expected = 0.0;
  double observed = 0.0;
  double tolerance = 0.0;
};

struct SamplerCheckReport {
  bool ok = true;
  std::vector<CellCheck> failures;
  int n_samples = 0;
};

SamplerCheckReport semantics_vs_sampler_check(const ModelStructure& model,
                                              const WeightTables& weights, SymbolId q,
                                              SymbolId i, int n_samples,
                                              std::uint64_t seed);

}  // namespace cppso
