#include "cppso/fixtures.hpp"

#include <vector>

#include "cppso/rng.hpp"

namespace cppso {

WeightTables weight_skeleton(const ModelStructure& model) {
  const int n = model.num_symbols;
  WeightTables w;
  for (SymbolId q = 0; q < n; ++q) {
    switch (model.type(q)) {
      case SymbolType::Cn:
        w.cn[q] = Eigen::VectorXd::Zero(n);
        break;
      case SymbolType::Fn:
        w.fn[q] = Eigen::MatrixXd::Zero(n, n);
        break;
      default:
        if (is_combinator(model.type(q))) w.cm[q] = Eigen::MatrixXd::Zero(n, n);
        break;
    }
  }
  return w;
}

Fixture fig1_fixture() {
  // Symbols (in numbering order):
  //   Id:  id *1 T F 1 2 3 4     (data values are Id nodes: they pass through)
  //   Cn:  cT cF
  //   Fn:  and or prev next =1 +
  //   S2:  +1 +2 +3
  //   P21: *2 *3
  ModelStructure m = build_model(
      {{SymbolType::Id, 8},
       {SymbolType::Cn, 2},
       {SymbolType::Fn, 6},
       {SymbolType::S2, 3},
       {SymbolType::P21, 2}},
      "", TypedRef{SymbolType::Id, 0}, TypedRef{SymbolType::Id, 0});
  const std::vector<std::string> names = {
      "id", "*1", "T", "F", "1", "2", "3", "4", "cT", "cF", "and",
      "or", "prev", "next", "=1", "+", "+1", "+2", "+3", "*2", "*3"};
  m.name_of = names;

  enum : SymbolId {
    kId = 0, kStar1, kT, kF, k1, k2, k3, k4, kCT, kCF, kAnd,
    kOr, kPrev, kNext, kEq1, kPlus, kP1, kP2, kP3, kStar2, kStar3
  };

  WeightTables w = weight_skeleton(m);
  w.cn[kCT][kT] = 1.0;
  w.cn[kCF][kF] = 1.0;

  // and(T) = id, and(F) = cF; or(T) = cT, or(F) = id.
  w.fn[kAnd](kT, kId) = 1.0;
  w.fn[kAnd](kF, kCF) = 1.0;
  w.fn[kOr](kT, kCT) = 1.0;
  w.fn[kOr](kF, kId) = 1.0;
  // prev / next shift within 1..4; the edges (prev 1, next 4) stay undefined.
  w.fn[kPrev](k2, k1) = 1.0;
  w.fn[kPrev](k3, k2) = 1.0;
  w.fn[kPrev](k4, k3) = 1.0;
  w.fn[kNext](k1, k2) = 1.0;
  w.fn[kNext](k2, k3) = 1.0;
  w.fn[kNext](k3, k4) = 1.0;
  // =1 answers whether its input is 1.
  w.fn[kEq1](k1, kT) = 1.0;
  w.fn[kEq1](k2, kF) = 1.0;
  w.fn[kEq1](k3, kF) = 1.0;
  w.fn[kEq1](k4, kF) = 1.0;
  // + maps a number n to the adder +n.
  w.fn[kPlus](k1, kP1) = 1.0;
  w.fn[kPlus](k2, kP2) = 1.0;
  w.fn[kPlus](k3, kP3) = 1.0;

  // +1 = id then next; +2 = +1 then next; +3 = +2 then next.
  w.cm[kP1](kId, kNext) = 1.0;
  w.cm[kP2](kP1, kNext) = 1.0;
  w.cm[kP3](kP2, kNext) = 1.0;
  // *2(x) = (+x)(*1(x)) = 2x; *3(x) = (+x)(*2(x)) = 3x.
  w.cm[kStar2](kStar1, kPlus) = 1.0;
  w.cm[kStar3](kStar2, kPlus) = 1.0;

  return Fixture{std::move(m), std::move(w)};
}

Fixture aba_fixture() {
  // Ob 0..9 digits, id, two Cn draws (A and B), then:
  //   n1 = S12(c1, id)  — draw A, print it, return it
  //   n2 = S12(c2, id)  — draw B, print it, return it
  //   n4 = P21(n2, id)  — print B, then re-print this node's input
  //   root = S2(n1, n4) — print A, feed A into n4: prints "BA"
  ModelStructure m = build_model(
      {{SymbolType::Ob, 10},
       {SymbolType::Id, 1},
       {SymbolType::Cn, 2},
       {SymbolType::S2, 1},
       {SymbolType::S12, 2},
       {SymbolType::P21, 1}},
      "0123456789", TypedRef{SymbolType::S2, 0}, TypedRef{SymbolType::Id, 0});

  const SymbolId id = 10, c1 = 11, c2 = 12, root = 13, n1 = 14, n2 = 15, n4 = 16;
  WeightTables w = weight_skeleton(m);
  for (SymbolId d = 0; d < 10; ++d) {
    w.cn[c1][d] = 0.1;
    w.cn[c2][d] = 0.1;
  }
  w.cm[n1](c1, id) = 1.0;
  w.cm[n2](c2, id) = 1.0;
  w.cm[n4](n2, id) = 1.0;
  w.cm[root](n1, n4) = 1.0;
  return Fixture{std::move(m), std::move(w)};
}

Fixture aba_mini_fixture() {
  // Two letters; root = S2(n1, n1) prints two independent uniform letters.
  ModelStructure m = build_model(
      {{SymbolType::Ob, 2},
       {SymbolType::Id, 1},
       {SymbolType::Cn, 1},
       {SymbolType::S2, 1},
       {SymbolType::S12, 1}},
      "12", TypedRef{SymbolType::S2, 0}, TypedRef{SymbolType::Id, 0});
  const SymbolId id = 2, c1 = 3, root = 4, n1 = 5;
  WeightTables w = weight_skeleton(m);
  w.cn[c1][0] = 0.5;
  w.cn[c1][1] = 0.5;
  w.cm[n1](c1, id) = 1.0;
  w.cm[root](n1, n1) = 1.0;
  return Fixture{std::move(m), std::move(w)};
}

Fixture counting_fixture() {
  // Prints a start digit from {2,3,4}, then counts down to 1, printing each
  // value. The dispatcher `disp` consults `sel`: at 1 it selects id (stop),
  // otherwise the recursive node `rec`, which decrements-and-prints via
  // `step` and then re-dispatches.
  ModelStructure m = build_model(
      {{SymbolType::Ob, 4},
       {SymbolType::Id, 1},
       {SymbolType::Cn, 1},
       {SymbolType::Fn, 2},
       {SymbolType::S2, 3},
       {SymbolType::S12, 2},
       {SymbolType::P12, 1}},
      "1234", TypedRef{SymbolType::S2, 2}, TypedRef{SymbolType::Id, 0});
  const std::vector<std::string> names = {"1",    "2",   "3",    "4",   "id",
                                          "c",    "prev", "sel",  "step", "rec",
                                          "root", "app",  "init", "disp"};
  m.name_of = names;

  enum : SymbolId {
    kD1 = 0, kD2, kD3, kD4, kIdS, kC, kPrev, kSel, kStep, kRec,
    kRoot, kApp, kInit, kDisp
  };

  WeightTables w = weight_skeleton(m);
  for (SymbolId d : {kD2, kD3, kD4}) w.cn[kC][d] = 1.0 / 3.0;
  w.fn[kPrev](kD2, kD1) = 1.0;
  w.fn[kPrev](kD3, kD2) = 1.0;
  w.fn[kPrev](kD4, kD3) = 1.0;
  w.fn[kSel](kD1, kIdS) = 1.0;
  w.fn[kSel](kD2, kRec) = 1.0;
  w.fn[kSel](kD3, kRec) = 1.0;
  w.fn[kSel](kD4, kRec) = 1.0;
  w.cm[kApp](kIdS, kIdS) = 1.0;    // S12: re-invoke the input digit -> prints it
  w.cm[kInit](kC, kIdS) = 1.0;     // S12: draw start digit, print it, return it
  w.cm[kStep](kPrev, kApp) = 1.0;  // S2: decrement, then print the new value
  w.cm[kDisp](kSel, kIdS) = 1.0;   // P12: select continuation, apply to input
  w.cm[kRec](kStep, kDisp) = 1.0;  // S2: one step, then dispatch again
  w.cm[kRoot](kInit, kDisp) = 1.0;
  return Fixture{std::move(m), std::move(w)};
}

ModelStructure cpf_model() {
  return build_model(
      {{SymbolType::Ob, 1},
       {SymbolType::Id, 1},
       {SymbolType::Cn, 1},
       {SymbolType::S2, 1}},
      "a", TypedRef{SymbolType::S2, 0}, TypedRef{SymbolType::Id, 0});
}

ModelStructure learning_model() {
  return build_model(
      {{SymbolType::Ob, 10},
       {SymbolType::Id, 1},
       {SymbolType::Cn, 2},
       {SymbolType::Fn, 2},
       {SymbolType::S2, 3},
       {SymbolType::S12, 3}},
      "0123456789", TypedRef{SymbolType::S2, 0}, TypedRef{SymbolType::S2, 0});
}

Fixture random_plain_cpp(std::uint64_t seed) {
  ModelStructure m = build_model(
      {{SymbolType::Id, 1},
       {SymbolType::Cn, 1},
       {SymbolType::Fn, 1},
       {SymbolType::S2, 2},
       {SymbolType::P21, 1}},
      "", TypedRef{SymbolType::Id, 0}, TypedRef{SymbolType::Id, 0});
  const int n = m.num_symbols;
  RngStream rng = KeyChain(seed).with(0x6d6f64656cull).stream();
  auto fill = [&](double* data, int count) {
    double sum = 0.0;
    for (int c = 0; c < count; ++c) {
      data[c] = 0.05 + rng.next_double();
      sum += data[c];
    }
    for (int c = 0; c < count; ++c) data[c] /= sum;
  };

  WeightTables w = weight_skeleton(m);
  for (auto& [q, v] : w.cn) fill(v.data(), n);
  for (auto& [q, mat] : w.fn) {
    Eigen::VectorXd row(n);
    for (int i = 0; i < n; ++i) {
      fill(row.data(), n);
      mat.row(i) = row;
    }
  }
  for (auto& [q, mat] : w.cm) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> flat(n, n);
    fill(flat.data(), n * n);
    mat = flat;
  }
  return Fixture{std::move(m), std::move(w)};
}

}  // namespace cppso
