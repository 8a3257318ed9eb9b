#include "cppso/model.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <set>
#include <stdexcept>

namespace cppso {

namespace {

constexpr double kSumTol = 1e-9;

std::string make_name(SymbolType t, int ordinal) {
  switch (t) {
    case SymbolType::Id:
      return ordinal == 0 ? "id" : "id" + std::to_string(ordinal + 1);
    case SymbolType::Cn:
      return "c" + std::to_string(ordinal + 1);
    case SymbolType::Fn:
      return "f" + std::to_string(ordinal + 1);
    default: {
      std::string base = to_string(t);
      for (auto& c : base) c = static_cast<char>(std::tolower(c));
      return base + static_cast<char>('a' + ordinal);
    }
  }
}

}  // namespace

std::vector<SymbolId> ModelStructure::symbols_of_type(SymbolType t) const {
  std::vector<SymbolId> out;
  for (SymbolId q = 0; q < num_symbols; ++q) {
    if (type_of[static_cast<size_t>(q)] == t) out.push_back(q);
  }
  return out;
}

SymbolId ModelStructure::ob_symbol(char letter) const {
  for (SymbolId q = 0; q < num_symbols; ++q) {
    if (type_of[static_cast<size_t>(q)] == SymbolType::Ob &&
        label_of[static_cast<size_t>(q)] == letter) {
      return q;
    }
  }
  return kNoSymbol;
}

SymbolId ModelStructure::by_name(std::string_view name) const {
  for (SymbolId q = 0; q < num_symbols; ++q) {
    if (name_of[static_cast<size_t>(q)] == name) return q;
  }
  return kNoSymbol;
}

ModelStructure build_model(const std::vector<TypeCount>& type_counts,
                           std::string_view alphabet, TypedRef q0, TypedRef q1) {
  std::array<int, 12> per_type{};
  for (const auto& tc : type_counts) {
    if (tc.count < 0) throw std::invalid_argument("negative symbol count");
    per_type[static_cast<size_t>(tc.type)] += tc.count;
  }
  {
    std::set<char> letters(alphabet.begin(), alphabet.end());
    if (letters.size() != alphabet.size())
      throw std::invalid_argument("alphabet letters must be distinct");
  }
  if (per_type[static_cast<size_t>(SymbolType::Ob)] !=
      static_cast<int>(alphabet.size())) {
    throw std::invalid_argument("need exactly one Ob symbol per alphabet letter");
  }

  ModelStructure m;
  m.alphabet = std::string(alphabet);
  for (int t = 0; t < 12; ++t) {
    auto type = static_cast<SymbolType>(t);
    for (int i = 0; i < per_type[static_cast<size_t>(t)]; ++i) {
      m.type_of.push_back(type);
      if (type == SymbolType::Ob) {
        m.label_of.push_back(m.alphabet[static_cast<size_t>(i)]);
        m.name_of.push_back(std::string(1, m.alphabet[static_cast<size_t>(i)]));
      } else {
        m.label_of.push_back('\0');
        m.name_of.push_back(make_name(type, i));
      }
    }
  }
  m.num_symbols = static_cast<int>(m.type_of.size());

  auto resolve = [&](TypedRef r, const char* what) -> SymbolId {
    int seen = 0;
    for (SymbolId q = 0; q < m.num_symbols; ++q) {
      if (m.type_of[static_cast<size_t>(q)] == r.type) {
        if (seen == r.index) return q;
        ++seen;
      }
    }
    throw std::invalid_argument(std::string(what) + " refers to a missing symbol");
  };
  m.q0 = resolve(q0, "q0");
  m.q1 = resolve(q1, "q1");
  return m;
}

namespace {

std::optional<WeightIssue> issue(std::string msg, SymbolId q, int row = -1,
                                 int col = -1) {
  return WeightIssue{std::move(msg), q, row, col};
}

template <typename Map>
std::optional<WeightIssue> check_coverage(const ModelStructure& m, const Map& tables,
                                          bool (*wants)(SymbolType), const char* kind) {
  for (SymbolId q = 0; q < m.num_symbols; ++q) {
    bool need = wants(m.type(q));
    bool have = tables.count(q) > 0;
    if (need && !have)
      return issue(std::string("missing ") + kind + " table for " + m.name_of[static_cast<size_t>(q)], q);
    if (!need && have)
      return issue(std::string("unexpected ") + kind + " table for " + m.name_of[static_cast<size_t>(q)], q);
  }
  return std::nullopt;
}

}  // namespace

std::optional<WeightIssue> validate_weights(const ModelStructure& model,
                                            const WeightTables& weights) {
  const int n = model.num_symbols;
  if (auto bad = check_coverage(model, weights.cn,
                                +[](SymbolType t) { return t == SymbolType::Cn; }, "cn"))
    return bad;
  if (auto bad = check_coverage(model, weights.fn,
                                +[](SymbolType t) { return t == SymbolType::Fn; }, "fn"))
    return bad;
  if (auto bad = check_coverage(model, weights.cm,
                                +[](SymbolType t) { return is_combinator(t); }, "cm"))
    return bad;

  for (const auto& [q, v] : weights.cn) {
    const auto& name = model.name_of[static_cast<size_t>(q)];
    if (v.size() != n) return issue("cn(" + name + ") has wrong length", q);
    for (int j = 0; j < n; ++j) {
      if (v[j] < 0.0) return issue("cn(" + name + ") negative entry", q, -1, j);
    }
    if (std::abs(v.sum() - 1.0) > kSumTol)
      return issue("cn(" + name + ") sum != 1", q);
  }
  for (const auto& [q, w] : weights.fn) {
    const auto& name = model.name_of[static_cast<size_t>(q)];
    if (w.rows() != n || w.cols() != n)
      return issue("fn(" + name + ") has wrong shape", q);
    for (int i = 0; i < n; ++i) {
      double row_sum = 0.0;
      for (int j = 0; j < n; ++j) {
        if (w(i, j) < 0.0) return issue("fn(" + name + ") negative entry", q, i, j);
        row_sum += w(i, j);
      }
      if (std::abs(row_sum) > kSumTol && std::abs(row_sum - 1.0) > kSumTol)
        return issue("fn(" + name + ") row sum not 0 or 1", q, i);
    }
  }
  for (const auto& [q, w] : weights.cm) {
    const auto& name = model.name_of[static_cast<size_t>(q)];
    if (w.rows() != n || w.cols() != n)
      return issue("cm(" + name + ") has wrong shape", q);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (w(i, j) < 0.0) return issue("cm(" + name + ") negative entry", q, i, j);
      }
    }
    if (std::abs(w.sum() - 1.0) > kSumTol)
      return issue("cm(" + name + ") total sum != 1", q);
  }
  return std::nullopt;
}

PriorSpec standard_prior(const ModelStructure& model, double base_alpha) {
  if (!(base_alpha > 0.0))
    throw std::invalid_argument("concentration must be positive");
  const int n = model.num_symbols;
  PriorSpec p;
  for (SymbolId q = 0; q < n; ++q) {
    switch (model.type(q)) {
      case SymbolType::Cn:
        p.cn[q] = Eigen::VectorXd::Constant(n, base_alpha);
        break;
      case SymbolType::Fn:
        p.fn[q] = Eigen::MatrixXd::Constant(n, n, base_alpha);
        break;
      default:
        if (is_combinator(model.type(q)))
          p.cm[q] = Eigen::MatrixXd::Constant(n, n, base_alpha);
        break;
    }
  }
  return p;
}

PriorSpec apply_special_init(const PriorSpec& prior, const ModelStructure& model,
                             const InitDirective& directive) {
  PriorSpec out = prior;
  std::visit(
      [&](const auto& d) {
        using D = std::decay_t<decltype(d)>;
        if (!model.valid_symbol(d.q))
          throw std::invalid_argument("init directive targets unknown symbol");
        if constexpr (std::is_same_v<D, CmCellInit>) {
          if (!is_combinator(model.type(d.q)))
            throw std::invalid_argument("pair-cell init requires a combinator symbol");
          if (!model.valid_symbol(d.f) || !model.valid_symbol(d.g))
            throw std::invalid_argument("pair-cell init child out of range");
          if (!(d.value > 0.0))
            throw std::invalid_argument("concentration must be positive");
          out.cm.at(d.q)(d.f, d.g) = d.value;
        } else {
          static_assert(std::is_same_v<D, FnRelationInit>);
          if (model.type(d.q) != SymbolType::Fn)
            throw std::invalid_argument("relation init requires an Fn symbol");
          if (!(d.hit_value > 0.0) || !(d.miss_value > 0.0))
            throw std::invalid_argument("concentration must be positive");
          auto& w = out.fn.at(d.q);
          w.setConstant(d.miss_value);
          for (const auto& [from, to] : d.relation) {
            SymbolId i = model.ob_symbol(from);
            SymbolId j = model.ob_symbol(to);
            if (i != kNoSymbol && j != kNoSymbol) w(i, j) = d.hit_value;
          }
        }
      },
      directive);
  return out;
}

}  // namespace cppso
