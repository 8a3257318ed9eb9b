#include "cppso/types.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace cppso {

namespace {
constexpr std::array<const char*, 12> kTypeNames = {
    "Ob", "Id", "Cn", "Fn", "S1", "S2", "S12", "S21", "P1", "P2", "P12", "P21"};
}

const char* to_string(SymbolType t) {
  return kTypeNames[static_cast<size_t>(t)];
}

SymbolType symbol_type_from_string(const std::string& s) {
  for (size_t i = 0; i < kTypeNames.size(); ++i) {
    if (s == kTypeNames[i]) return static_cast<SymbolType>(i);
  }
  throw std::invalid_argument("unknown symbol type: " + s);
}

}  // namespace cppso
