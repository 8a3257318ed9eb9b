#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cppso/model.hpp"
#include "cppso/types.hpp"

namespace cppso {

// One node of an execution trace. Nodes live in the owning ParseTree's arena;
// children are arena indices (-1 when absent). Combinator nodes keep their
// drawn pair (f, g) explicitly; the re-invocation child of S12/S21/P12/P21
// sits in child[2]. Arena order is execution order, which makes it both the
// print order and the draw-replay order.
struct TreeNode {
  SymbolId symbol = kNoSymbol;
  SymbolId input = kNoSymbol;
  SymbolId output = kNoSymbol;  // kNoSymbol while still executing
  SymbolId f = kNoSymbol;       // drawn children of a combinator node
  SymbolId g = kNoSymbol;
  std::array<std::int32_t, 3> child{-1, -1, -1};
};

struct ParseTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  bool empty() const { return nodes.empty(); }
  void clear() { nodes.clear(); }
  bool operator==(const ParseTree& other) const {
    if (nodes.size() != other.nodes.size()) return false;
    for (size_t i = 0; i < nodes.size(); ++i) {
      const TreeNode& a = nodes[i];
      const TreeNode& b = other.nodes[i];
      if (a.symbol != b.symbol || a.input != b.input || a.output != b.output ||
          a.f != b.f || a.g != b.g || a.child != b.child)
        return false;
    }
    return true;
  }
};

// Letters printed by the trace, in execution order.
std::string yield_of(const ParseTree& tree, const ModelStructure& model);

// Indented text rendering, one node per line:
//   symbol [Type] in->out        (plus the printed letter for Ob nodes)
std::string render(const ParseTree& tree, const ModelStructure& model);

// Structural fingerprint usable as a map key when tallying tree frequencies.
std::string tree_key(const ParseTree& tree);

}  // namespace cppso
