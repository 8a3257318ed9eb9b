#pragma once

#include <string>

#include "cppso/counts.hpp"
#include "cppso/inference.hpp"
#include "cppso/model.hpp"
#include "cppso/semantics.hpp"
#include "cppso/tree.hpp"

namespace cppso {

// JSON codecs. Every *_to_json emits a compact, key-sorted document so
// identical values always produce identical bytes; *_from_json throws
// std::runtime_error on malformed input.

std::string model_to_json(const ModelStructure& model);
ModelStructure model_from_json(const std::string& text);

// PriorSpec and WeightTables share one layout:
// {"cn": {"<q>": [..]}, "fn": {"<q>": [[..],..]}, "cm": {"<q>": [[..],..]}}.
std::string prior_to_json(const PriorSpec& prior);
PriorSpec prior_from_json(const std::string& text);
std::string weights_to_json(const WeightTables& weights);
WeightTables weights_from_json(const std::string& text);

// {"symbol","type","input","output","label?","f?","g?","children":[..]},
// nested from the root. Node order round-trips exactly (children are written
// in slot order and rebuilt pre-order, which is the arena order).
std::string tree_to_json(const ParseTree& tree, const ModelStructure& model);
ParseTree tree_from_json(const std::string& text, const ModelStructure& model);

// Sparse triples/quadruples of nonzero cells.
std::string counts_to_json(const CountTables& counts);
CountTables counts_from_json(const std::string& text, const ModelStructure& model);

std::string semantics_to_json(const SemanticsTable& table, const ModelStructure& model);
std::string oracle_to_json(const OracleResult& result, const ModelStructure& model);

// Whole-chain snapshot: model, prior, filter configuration, seed, epoch,
// data slots with their current trees, counts, and the metrics history.
// Loading recompiles the predictive prior and verifies that the stored
// counts equal the sum over the stored trees.
std::string snapshot_to_json(const ChainState& chain);
ChainState snapshot_from_json(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace cppso
