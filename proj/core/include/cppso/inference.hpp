#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cppso/counts.hpp"
#include "cppso/datasets.hpp"
#include "cppso/machine.hpp"
#include "cppso/model.hpp"
#include "cppso/rng.hpp"
#include "cppso/source.hpp"
#include "cppso/tree.hpp"

namespace cppso {

enum class ResamplingScheme { Multinomial, Systematic, KeepSurvivors };

struct PGConfig {
  int particles = 100;  // M > 1
  Budget budget{};
  int max_restarts = 10;  // bootstrap retries when every particle dies
  ResamplingScheme resampling = ResamplingScheme::Multinomial;
  bool urn_within_filter = true;  // draws update their own predictive mid-trace
};

struct FilterResult {
  ParseTree tree;
  double log_z = 0.0;
  int attempts = 1;
};

// Reusable buffers so consecutive filters don't reallocate their pools.
struct FilterScratch {
  std::vector<Machine> pool;
  std::vector<Machine> next;
  std::vector<std::uint8_t> state;
  std::vector<std::uint8_t> state_next;
  std::vector<int> survivors;
  std::vector<int> assignment;
};

// One particle filter pass for datum x against base counts (the collapsed
// predictive excludes x's own tree). Particles run Sample&Print from
// (q0, q1), pausing at every print; particles whose output deviates from x
// die, survivors fill the pool again, and log morsels of survivors/M
// accumulate into an unbiased estimate of log p(x | base counts).
//
// With a reference tree (conditional variant) the reference trajectory is
// replayed deterministically in slot 0 and always survives; clones of it
// continue with fresh randomness. Without one, a filter whose particles all
// die restarts with fresh randomness up to max_restarts times before
// throwing std::runtime_error ("unparseable datum").
FilterResult particle_filter(const std::string& x, const ModelStructure& model,
                             const CountTables& base, const PredictivePrior& prior,
                             const PGConfig& cfg, const KeyChain& key,
                             const ParseTree* reference = nullptr,
                             FilterScratch* scratch = nullptr);

struct DatumSlot {
  std::string x;
  ParseTree tree;  // empty until first parsed
};

struct EpochMetrics {
  int epoch = 0;
  double raw_nll = 0.0;  // mean over data of -log_z / |x|
  double smoothed_nll = 0.0;
  std::vector<double> per_datum_log_z;  // in slot order
};

struct ChainState {
  ModelStructure model;
  PriorSpec prior_spec;
  PredictivePrior prior;
  PGConfig pg;
  std::vector<DatumSlot> data;
  CountTables counts;
  int epoch = 0;  // completed sweeps
  std::uint64_t seed = 0;
  std::vector<EpochMetrics> history;
  FilterScratch scratch;
};

ChainState init_chain(const ModelStructure& model, const PriorSpec& prior,
                      const PGConfig& pg, std::vector<std::string> data,
                      std::uint64_t seed);

// Swap in a new sentence for one slot, dropping the old tree's counts.
void replace_datum(ChainState& chain, int slot, std::string x);

// One collapsed Gibbs sweep in slot order: detach each datum's tree from the
// counts, re-parse against the rest via the conditional filter (bootstrap on
// first encounter), re-attach, and record the per-epoch NLL metric.
EpochMetrics gibbs_sweep(ChainState& chain);

// Global counts == sum of every present tree's counts.
bool counts_consistent(const ChainState& chain);

// Runs a schedule end to end: fresh chain on the schedule's initial dataset,
// per-epoch curriculum mutations, one sweep per epoch. on_epoch (optional)
// fires after every sweep. Fully deterministic in `seed`.
using EpochCallback = std::function<void(const ChainState&, const EpochMetrics&)>;
ChainState run_chain(const ModelStructure& model, const PriorSpec& prior,
                     const CurriculumSchedule& schedule, int epochs,
                     const PGConfig& pg, std::uint64_t seed,
                     const EpochCallback& on_epoch = {});

// Bootstrap-filter estimate of log p(x | counts) with frozen counts,
// averaged over n_runs filters in probability space (log of the mean of Z).
// Returns -inf if every run fails to parse.
double heldout_log_prob(const std::string& x, const ModelStructure& model,
                        const CountTables& counts, const PredictivePrior& prior,
                        const PGConfig& cfg, const KeyChain& key, int n_runs);

// Does some Fn symbol's predictive implement `relation` letter-for-letter?
// A symbol passes iff for every letter c the predictive row at the Ob symbol
// of c puts its strict argmax on the Ob symbol of relation(c).
struct RelationVerdict {
  SymbolId fn_symbol = kNoSymbol;
  bool pass = false;
};
std::vector<RelationVerdict> relation_check(const ModelStructure& model,
                                            const CountTables& counts,
                                            const PredictivePrior& prior,
                                            const std::map<char, char>& relation);

// Does some combinator's pair predictive put its strict argmax on
// (f_node, f_node)?
bool composition_check(const ModelStructure& model, const CountTables& counts,
                       const PredictivePrior& prior, SymbolId f_node);

// s_1 = v_1, s_t = rate * s_{t-1} + (1 - rate) * v_t.
std::vector<double> smooth_series(const std::vector<double>& raw, double rate = 0.9);

}  // namespace cppso
