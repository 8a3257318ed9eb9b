#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cppso/datasets.hpp"
#include "cppso/inference.hpp"
#include "cppso/model.hpp"

namespace cppso {

// A full training run definition: model + prior, curriculum, filter
// configuration, chain count. Presets pin the published A1..A7 settings;
// config_from_json builds custom runs (optionally starting from a preset).
struct ExperimentConfig {
  std::string name;
  ModelStructure model;
  PriorSpec prior;
  CurriculumSchedule schedule;
  int epochs = 0;  // 0 = schedule total
  PGConfig pg;
  int chains = 10;
  std::uint64_t seed = 1;  // chain k runs with seed + k
  std::string out_dir;     // artifacts written here when nonempty
  std::vector<int> snapshot_epochs;  // tree renderings; default {1, phase starts, final}
};

ExperimentConfig preset(ExperimentId id);
ExperimentConfig config_from_json(const std::string& text);

std::vector<int> default_snapshot_epochs(const CurriculumSchedule& schedule);

// Which Fn symbols' predictives implement f(x)=(x+1)%10 / g(x)=(x+2)%10 over
// the model's alphabet, and whether any combinator composes an f-passing
// symbol with itself.
struct Verdicts {
  std::vector<SymbolId> fn_passing_f;
  std::vector<SymbolId> fn_passing_g;
  bool composition = false;
};

Verdicts compute_verdicts(const ModelStructure& model, const CountTables& counts,
                          const PredictivePrior& prior);

struct ChainReport {
  int chain = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double epoch1_raw_nll = 0.0;
  double epoch1_smoothed_nll = 0.0;
  double final_raw_nll = 0.0;
  double final_smoothed_nll = 0.0;
  Verdicts verdicts;
  double seconds = 0.0;  // wall clock; reported separately, never serialized
  std::string snapshot_path;
  std::string weights_path;
  std::vector<std::string> tree_paths;
};

struct RunReport {
  std::string name;
  int epochs = 0;
  std::vector<ChainReport> chains;
  std::vector<std::vector<EpochMetrics>> curves;  // per chain, possibly partial on failure
  double total_seconds = 0.0;
};

// Runs all chains (concurrently when CPPSO_WORKERS or the hardware allows;
// results are identical regardless of worker count). A chain that throws is
// reported failed without stopping its siblings. With out_dir set, writes
// curves.csv, report.json, per-chain snapshots / posterior-mean weights /
// tree renderings, and timings.txt (the only output that varies between
// reruns; everything else is bit-identical given the seed).
RunReport run_experiment(const ExperimentConfig& config);

std::string curves_csv(const RunReport& report);
std::string report_json(const RunReport& report);

// Frozen-counts read of one trained chain: posterior-mean weights, relation /
// composition verdicts, and a rendering of every datum's current tree.
struct Inspection {
  std::string weights_json;
  Verdicts verdicts;
  std::vector<std::string> tree_renderings;
};

Inspection inspect(const ChainState& chain);

// Held-out scoring with frozen counts: one bootstrap filter per string
// (restarts per pg.max_restarts); parse failure reports an infinite NLL.
struct HeldoutEntry {
  std::string x;
  double nll = 0.0;  // -log_z / |x|
  int attempts = 0;
  bool parsed = false;
};

std::vector<HeldoutEntry> heldout_eval(const ChainState& chain,
                                       const std::vector<std::string>& test_strings,
                                       const PGConfig& pg, std::uint64_t seed);

// For every digit pair (A, B), estimates p("ABc") for each candidate third
// letter c by averaging exp(log_z) over runs_per_string frozen-counts
// bootstrap filters, and counts the pairs whose strict argmax is c == A.
int aba_argmax_matches(const ChainState& chain, int runs_per_string, std::uint64_t seed);

}  // namespace cppso
