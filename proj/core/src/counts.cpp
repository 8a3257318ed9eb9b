#include "cppso/counts.hpp"

#include <stdexcept>

namespace cppso {

CountTables CountTables::zeros(const ModelStructure& model) {
  CountTables t;
  t.num_symbols = model.num_symbols;
  t.cn.resize(static_cast<size_t>(model.num_symbols));
  t.fn.resize(static_cast<size_t>(model.num_symbols));
  t.cm.resize(static_cast<size_t>(model.num_symbols));
  for (SymbolId q = 0; q < model.num_symbols; ++q) {
    switch (model.type(q)) {
      case SymbolType::Cn:
        t.cn[static_cast<size_t>(q)] = CountBlock(model.num_symbols);
        break;
      case SymbolType::Fn:
        t.fn[static_cast<size_t>(q)].assign(static_cast<size_t>(model.num_symbols),
                                            CountBlock(model.num_symbols));
        break;
      default:
        if (is_combinator(model.type(q)))
          t.cm[static_cast<size_t>(q)] = CountBlock(model.num_symbols * model.num_symbols);
        break;
    }
  }
  return t;
}

std::int64_t CountTables::total_mass() const {
  std::int64_t sum = 0;
  for (const auto& b : cn) sum += b.total();
  for (const auto& rows : fn)
    for (const auto& b : rows) sum += b.total();
  for (const auto& b : cm) sum += b.total();
  return sum;
}

void apply_tree(CountTables& tables, const ParseTree& tree, int sign) {
  for (const TreeNode& n : tree.nodes) {
    const auto q = static_cast<size_t>(n.symbol);
    if (n.output == kNoSymbol)
      throw std::logic_error("cannot count an unfinished tree");
    bool ok = true;
    if (q < tables.cn.size() && tables.cn[q].cells() > 0) {
      ok = sign > 0 ? (tables.cn[q].add(n.output), true) : tables.cn[q].remove(n.output);
    } else if (q < tables.fn.size() && !tables.fn[q].empty()) {
      auto& block = tables.fn[q][static_cast<size_t>(n.input)];
      ok = sign > 0 ? (block.add(n.output), true) : block.remove(n.output);
    } else if (q < tables.cm.size() && tables.cm[q].cells() > 0) {
      int cell = tables.cm_cell(n.f, n.g);
      ok = sign > 0 ? (tables.cm[q].add(cell), true) : tables.cm[q].remove(cell);
    }
    if (!ok) throw std::logic_error("count underflow while removing a tree");
  }
}

CountTables extract_counts(const ModelStructure& model, const ParseTree& tree) {
  CountTables t = CountTables::zeros(model);
  apply_tree(t, tree, +1);
  return t;
}

namespace {

void merge_block(CountBlock& into, const CountBlock& from, int sign) {
  for (std::int32_t cell : from.nonzero_cells()) {
    for (std::int32_t k = 0; k < from.count(cell); ++k) {
      if (sign > 0) {
        into.add(cell);
      } else if (!into.remove(cell)) {
        throw std::logic_error("count underflow while removing count tables");
      }
    }
  }
}

void merge(CountTables& global, const CountTables& delta, int sign) {
  if (global.num_symbols != delta.num_symbols)
    throw std::logic_error("count tables built for different models");
  for (size_t q = 0; q < global.cn.size(); ++q)
    merge_block(global.cn[q], delta.cn[q], sign);
  for (size_t q = 0; q < global.fn.size(); ++q)
    for (size_t i = 0; i < global.fn[q].size(); ++i)
      merge_block(global.fn[q][i], delta.fn[q][i], sign);
  for (size_t q = 0; q < global.cm.size(); ++q)
    merge_block(global.cm[q], delta.cm[q], sign);
}

}  // namespace

void add_counts(CountTables& global, const CountTables& delta) {
  merge(global, delta, +1);
}

void remove_counts(CountTables& global, const CountTables& delta) {
  merge(global, delta, -1);
}

}  // namespace cppso
