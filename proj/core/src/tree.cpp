#include "cppso/tree.hpp"

#include <cstring>
#include <sstream>

namespace cppso {

std::string yield_of(const ParseTree& tree, const ModelStructure& model) {
  // Arena order is execution order, so a flat scan gives the print order.
  std::string out;
  for (const TreeNode& n : tree.nodes) {
    if (model.type(n.symbol) == SymbolType::Ob)
      out.push_back(model.label_of[static_cast<size_t>(n.symbol)]);
  }
  return out;
}

namespace {

void render_node(const ParseTree& t, const ModelStructure& m, std::int32_t idx,
                 int depth, std::ostringstream& out) {
  const TreeNode& n = t.nodes[static_cast<size_t>(idx)];
  for (int d = 0; d < depth; ++d) out << "  ";
  out << m.name_of[static_cast<size_t>(n.symbol)] << " ["
      << to_string(m.type(n.symbol)) << "] "
      << m.name_of[static_cast<size_t>(n.input)];
  out << " -> ";
  if (n.output == kNoSymbol)
    out << "?";
  else
    out << m.name_of[static_cast<size_t>(n.output)];
  if (m.type(n.symbol) == SymbolType::Ob)
    out << "  prints '" << m.label_of[static_cast<size_t>(n.symbol)] << "'";
  out << "\n";
  for (std::int32_t c : n.child) {
    if (c >= 0) render_node(t, m, c, depth + 1, out);
  }
}

}  // namespace

std::string render(const ParseTree& tree, const ModelStructure& model) {
  if (tree.empty()) return "(empty)\n";
  std::ostringstream out;
  render_node(tree, model, 0, 0, out);
  return out.str();
}

std::string tree_key(const ParseTree& tree) {
  // Children indices are determined by the rest of the node data, so the
  // (symbol, input, f, g) quadruples in arena order identify the tree.
  std::string key;
  key.reserve(tree.nodes.size() * 8);
  for (const TreeNode& n : tree.nodes) {
    for (SymbolId v : {n.symbol, n.input, n.f, n.g}) {
      key.push_back(static_cast<char>(v & 0xff));
      key.push_back(static_cast<char>((v >> 8) & 0xff));
    }
  }
  return key;
}

}  // namespace cppso
