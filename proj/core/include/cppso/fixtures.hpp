#pragma once

#include <cstdint>

#include "cppso/model.hpp"

namespace cppso {

struct Fixture {
  ModelStructure model;
  WeightTables weights;
};

// Correctly shaped all-zero tables for each learnable symbol of the model;
// handy to fill in by hand.
WeightTables weight_skeleton(const ModelStructure& model);

// The 21-symbol logic/arithmetic demo: Booleans with and/or, numbers 1..4
// with +1/+2/+3 built by chaining next, and doubling/tripling (*2, *3) built
// from higher-order addition. All weights are 0/1, so evaluation is
// deterministic where defined; prev/next escape the 1..4 range into dead
// rows, losing mass (e.g. *2 applied to 3).
Fixture fig1_fixture();

// Ten-digit generator whose every output is "ABA" with A, B independent
// uniform digits; each concrete string has probability 1/100.
Fixture aba_fixture();

// Two-letter cousin of the above printing "AB": four strings, each 1/4.
Fixture aba_mini_fixture();

// Counting-down generator: prints a uniform start digit from {2,3,4}, then
// decrements and prints until reaching 1 ("321"-style runs, each 1/3).
Fixture counting_fixture();

// Smallest interesting observation model (alphabet "a", one Ob, Id, Cn and
// an S2 root), intended for collapsed-posterior tests; no weights.
ModelStructure cpf_model();

// The learnable structure used by the experiment harness: 10 digit Ob
// symbols, 1 Id, 2 Cn, 2 Fn, 3 S2, 3 S12; start symbol and start input are
// both the first S2 node.
ModelStructure learning_model();

// Random 6-symbol plain model ({Id, Cn, Fn, S2 x2, P21}) with stochastic
// weight tables; its recursive structure leaves non-termination mass, so the
// exact semantics is strictly sub-stochastic.
Fixture random_plain_cpp(std::uint64_t seed);

}  // namespace cppso
