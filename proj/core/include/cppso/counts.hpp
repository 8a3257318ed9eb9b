#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cppso/model.hpp"
#include "cppso/tree.hpp"
#include "cppso/types.hpp"

namespace cppso {

// One categorical context's counts: dense cell array plus an exact nonzero
// list and a running total, so samplers can walk just the occupied cells.
// The nonzero list stays sorted, so a draw's cell order never depends on the
// history that produced the counts — a chain resumed from a snapshot draws
// exactly like one that never left memory.
class CountBlock {
 public:
  CountBlock() = default;
  explicit CountBlock(int n_cells)
      : count_(static_cast<size_t>(n_cells), 0),
        pos_(static_cast<size_t>(n_cells), -1) {}

  int cells() const { return static_cast<int>(count_.size()); }
  int total() const { return total_; }
  std::int32_t count(int cell) const { return count_[static_cast<size_t>(cell)]; }
  const std::vector<std::int32_t>& nonzero_cells() const { return nz_; }

  void add(int cell) {
    auto c = static_cast<size_t>(cell);
    if (count_[c] == 0) {
      const auto at = static_cast<size_t>(
          std::lower_bound(nz_.begin(), nz_.end(), cell) - nz_.begin());
      nz_.insert(nz_.begin() + static_cast<std::ptrdiff_t>(at), cell);
      reindex_from(at);
    }
    ++count_[c];
    ++total_;
  }

  // False signals underflow; the caller treats that as a bookkeeping bug.
  bool remove(int cell) {
    auto c = static_cast<size_t>(cell);
    if (count_[c] <= 0) return false;
    --count_[c];
    --total_;
    if (count_[c] == 0) {
      auto at = static_cast<size_t>(pos_[c]);
      nz_.erase(nz_.begin() + static_cast<std::ptrdiff_t>(at));
      pos_[c] = -1;
      reindex_from(at);
    }
    return true;
  }

  bool operator==(const CountBlock& o) const { return count_ == o.count_; }

 private:
  void reindex_from(size_t at) {
    for (size_t k = at; k < nz_.size(); ++k)
      pos_[static_cast<size_t>(nz_[k])] = static_cast<std::int32_t>(k);
  }

  std::vector<std::int32_t> count_;
  std::vector<std::int32_t> nz_;   // cells with count > 0, ascending
  std::vector<std::int32_t> pos_;  // cell -> index into nz_, -1 if absent
  std::int32_t total_ = 0;
};

// Sufficient statistics over a set of parse trees: how often each Cn symbol
// returned j, each Fn symbol mapped i to j, each combinator drew (f, g).
// Blocks are indexed by symbol id; only symbols of the right type carry
// non-empty blocks. Combinator cells are flattened as f * num_symbols + g.
struct CountTables {
  int num_symbols = 0;
  std::vector<CountBlock> cn;               // per Cn symbol: |Q| cells
  std::vector<std::vector<CountBlock>> fn;  // per Fn symbol, per input row
  std::vector<CountBlock> cm;               // per combinator: |Q|*|Q| cells

  static CountTables zeros(const ModelStructure& model);

  int cm_cell(SymbolId f, SymbolId g) const { return f * num_symbols + g; }

  std::int64_t total_mass() const;
  bool operator==(const CountTables& o) const {
    return cn == o.cn && fn == o.fn && cm == o.cm;
  }
};

// Adds (sign=+1) or removes (sign=-1) one tree's draws. Throws
// std::logic_error on underflow, which can only come from mismatched
// add/remove bookkeeping.
void apply_tree(CountTables& tables, const ParseTree& tree, int sign);

CountTables extract_counts(const ModelStructure& model, const ParseTree& tree);

// Cellwise merge / unmerge of whole tables. remove_counts throws
// std::logic_error if any cell would underflow.
void add_counts(CountTables& global, const CountTables& delta);
void remove_counts(CountTables& global, const CountTables& delta);

}  // namespace cppso
