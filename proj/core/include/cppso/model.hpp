#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cppso/types.hpp"

namespace cppso {

// Symbol table of a model: which symbols exist, their types, the letters
// attached to Ob symbols, and the designated start symbol / start input.
// Weights live separately (WeightTables) so the same structure can carry
// fixed weights, priors, or posterior means.
struct ModelStructure {
  int num_symbols = 0;
  std::string alphabet;                // distinct letters
  std::vector<SymbolType> type_of;     // indexed by SymbolId
  std::vector<char> label_of;          // letter for Ob symbols, '\0' otherwise
  std::vector<std::string> name_of;    // stable human-readable names
  SymbolId q0 = kNoSymbol;             // start symbol
  SymbolId q1 = kNoSymbol;             // input fed to the start symbol

  SymbolType type(SymbolId q) const { return type_of[static_cast<size_t>(q)]; }
  bool valid_symbol(SymbolId q) const { return q >= 0 && q < num_symbols; }

  std::vector<SymbolId> symbols_of_type(SymbolType t) const;
  SymbolId ob_symbol(char letter) const;           // kNoSymbol if absent
  SymbolId by_name(std::string_view name) const;   // kNoSymbol if absent
};

// How many symbols of each type to allocate when building a structure.
struct TypeCount {
  SymbolType type;
  int count = 0;
};

// Names a symbol by (type, ordinal within that type block), usable before
// numbering is fixed; build_model resolves these for q0/q1.
struct TypedRef {
  SymbolType type;
  int index = 0;
};

// Deterministic numbering: the Ob block first, in alphabet order, then the
// remaining types grouped in declaration order of SymbolType. Ob symbols are
// named by their letter; other symbols get short type-derived names
// (id, c1, c2, f1, s2a, s12b, p21a, ...).
ModelStructure build_model(const std::vector<TypeCount>& type_counts,
                           std::string_view alphabet, TypedRef q0, TypedRef q1);

// Materialized weights. Keys are the symbol ids of the owning table:
// cn for Cn symbols (|Q|-vector over returned symbols), fn for Fn symbols
// (|Q|x|Q|, row = input, col = output), cm for combinator symbols
// (|Q|x|Q| joint over child pairs (f, g)).
struct WeightTables {
  std::map<SymbolId, Eigen::VectorXd> cn;
  std::map<SymbolId, Eigen::MatrixXd> fn;
  std::map<SymbolId, Eigen::MatrixXd> cm;
};

struct WeightIssue {
  std::string message;
  SymbolId symbol = kNoSymbol;
  int row = -1;
  int col = -1;
};

// Checks shapes, nonnegativity, cn sums == 1, cm total sums == 1, and fn row
// sums == 0 or 1 (a zero row means the function is undefined on that input
// and execution reaching it never terminates; Fig. 1(b)-style fixtures rely
// on this). Returns the first violation found, or nullopt when clean.
std::optional<WeightIssue> validate_weights(const ModelStructure& model,
                                            const WeightTables& weights);

// Per-cell Dirichlet concentrations, one table per learnable symbol, same
// shapes as WeightTables.
struct PriorSpec {
  std::map<SymbolId, Eigen::VectorXd> cn;
  std::map<SymbolId, Eigen::MatrixXd> fn;
  std::map<SymbolId, Eigen::MatrixXd> cm;
};

// Uniform concentration base_alpha in every cell. Throws std::invalid_argument
// if base_alpha <= 0.
PriorSpec standard_prior(const ModelStructure& model, double base_alpha);

// Pins one cell of a combinator's pair table to `value`.
struct CmCellInit {
  SymbolId q = kNoSymbol;  // combinator symbol
  SymbolId f = kNoSymbol;
  SymbolId g = kNoSymbol;
  double value = 0.0;
};

// Rewrites an Fn symbol's whole table: cell (i, j) becomes hit_value when i
// and j are both Ob symbols with relation(letter(i)) == letter(j), and
// miss_value everywhere else (non-Ob rows and columns included).
struct FnRelationInit {
  SymbolId q = kNoSymbol;  // fn symbol
  std::map<char, char> relation;
  double hit_value = 0.0;
  double miss_value = 0.0;
};

using InitDirective = std::variant<CmCellInit, FnRelationInit>;

// Returns a copy of `prior` with the directive applied. Throws
// std::invalid_argument when the directive targets a symbol of the wrong type
// or a value is not positive.
PriorSpec apply_special_init(const PriorSpec& prior, const ModelStructure& model,
                             const InitDirective& directive);

}  // namespace cppso
