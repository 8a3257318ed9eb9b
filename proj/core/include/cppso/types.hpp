#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cppso {

// Symbols are dense indices into the model's symbol list.
using SymbolId = int;
inline constexpr SymbolId kNoSymbol = -1;

// Node types. Ob..Fn are primitive; the rest are combinators. The enum order
// fixes the deterministic symbol numbering used by build_model.
enum class SymbolType : std::uint8_t {
  Ob,
  Id,
  Cn,
  Fn,
  S1,
  S2,
  S12,
  S21,
  P1,
  P2,
  P12,
  P21,
};

inline constexpr int kNumSymbolTypes = 12;

inline bool is_combinator(SymbolType t) {
  return t >= SymbolType::S1;
}

// S-family combinators feed the first child's output into the second child;
// P-family combinators feed the shared input instead.
inline bool is_sequential(SymbolType t) {
  switch (t) {
    case SymbolType::S1:
    case SymbolType::S2:
    case SymbolType::S12:
    case SymbolType::S21:
      return true;
    default:
      return false;
  }
}

// What a combinator returns once both children have run:
//   First  -> the first child's output k
//   Second -> the second child's output l
//   Apply12 -> invoke k on input l, return that
//   Apply21 -> invoke l on input k, return that
enum class CombinatorReturn : std::uint8_t { First, Second, Apply12, Apply21 };

inline CombinatorReturn combinator_return(SymbolType t) {
  switch (t) {
    case SymbolType::S1:
    case SymbolType::P1:
      return CombinatorReturn::First;
    case SymbolType::S2:
    case SymbolType::P2:
      return CombinatorReturn::Second;
    case SymbolType::S12:
    case SymbolType::P12:
      return CombinatorReturn::Apply12;
    case SymbolType::S21:
    case SymbolType::P21:
      return CombinatorReturn::Apply21;
    default:
      throw std::logic_error("combinator_return: not a combinator type");
  }
}

// Plain (non-observation) models restrict themselves to this subset.
inline bool is_plain_cpp_type(SymbolType t) {
  switch (t) {
    case SymbolType::Id:
    case SymbolType::Cn:
    case SymbolType::Fn:
    case SymbolType::S2:
    case SymbolType::P21:
      return true;
    default:
      return false;
  }
}

const char* to_string(SymbolType t);
SymbolType symbol_type_from_string(const std::string& s);

}  // namespace cppso
