#include <set>
#include <string>

#include "cppso/fixtures.hpp"
#include "cppso/machine.hpp"
#include "cppso/rng.hpp"
#include "cppso/sampler.hpp"
#include "cppso/semantics.hpp"
#include "cppso/source.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cppso;

TEST_CASE("constant symbols ignore their input") {
  Fixture f = fig1_fixture();
  SourceRef src{&f.weights};
  SymbolId cF = f.model.by_name("cF"), F = f.model.by_name("F");
  for (SymbolId i = 0; i < f.model.num_symbols; ++i) {
    RngStream rng = KeyChain(3).with(static_cast<std::uint64_t>(i)).stream();
    ExecOutcome o = sample(src, f.model, cF, i, Budget{}, rng);
    REQUIRE(o.status == ExecStatus::Returned);
    CHECK(o.output == F);
  }
}

TEST_CASE("pass-through consumes a single call") {
  Fixture f = fig1_fixture();
  Machine m;
  m.reset(f.model, SourceRef{&f.weights}, f.model.by_name("id"), 7, Budget{});
  RngStream rng = KeyChain(1).stream();
  REQUIRE(m.run(&rng) == RunEvent::Finished);
  CHECK(m.output() == 7);
  CHECK(m.calls_used() == 1);
}

TEST_CASE("tripling one always lands on three") {
  Fixture f = fig1_fixture();
  SourceRef src{&f.weights};
  SymbolId star3 = f.model.by_name("*3");
  SymbolId one = f.model.by_name("1"), three = f.model.by_name("3");
  for (std::uint64_t s = 0; s < 10000; ++s) {
    RngStream rng = KeyChain(s).with(1).stream();
    ExecOutcome o = sample(src, f.model, star3, one, Budget{}, rng);
    REQUIRE(o.status == ExecStatus::Returned);
    REQUIRE(o.output == three);
  }
}

TEST_CASE("running off the number line never terminates") {
  Fixture f = fig1_fixture();
  SourceRef src{&f.weights};
  RngStream rng = KeyChain(2).stream();
  ExecOutcome o = sample(src, f.model, f.model.by_name("*2"), f.model.by_name("3"),
                         Budget{}, rng);
  CHECK(o.status == ExecStatus::BudgetExceeded);
}

TEST_CASE("call budgets cut executions short") {
  Fixture f = counting_fixture();
  SourceRef src{&f.weights};
  RngStream rng = KeyChain(4).stream();
  Budget tight;
  tight.max_calls = 3;
  ExecOutcome o = generate(src, f.model, tight, rng);
  CHECK(o.status == ExecStatus::BudgetExceeded);
}

TEST_CASE("letter symbols print and pass their input through") {
  ModelStructure m = build_model({{SymbolType::Ob, 1}}, "a", TypedRef{SymbolType::Ob, 0},
                                 TypedRef{SymbolType::Ob, 0});
  WeightTables w;
  RngStream rng = KeyChain(1).stream();
  ExecOutcome o = generate(SourceRef{&w}, m, Budget{}, rng);
  REQUIRE(o.status == ExecStatus::Returned);
  CHECK(o.printed == "a");
  CHECK(o.output == m.q1);
}

TEST_CASE("a chained pair prints both letters and returns the first result") {
  ModelStructure m = build_model({{SymbolType::Ob, 2}, {SymbolType::S1, 1}}, "ab",
                                 TypedRef{SymbolType::S1, 0}, TypedRef{SymbolType::Ob, 0});
  WeightTables w = weight_skeleton(m);
  w.cm[2](0, 1) = 1.0;  // first child prints 'a', second prints 'b'
  RngStream rng = KeyChain(1).stream();
  ExecOutcome o = generate(SourceRef{&w}, m, Budget{}, rng);
  REQUIRE(o.status == ExecStatus::Returned);
  CHECK(o.printed == "ab");
  CHECK(o.output == m.q1);  // the first child handed back its own input
}

TEST_CASE("count-down runs always descend to one") {
  Fixture f = counting_fixture();
  SourceRef src{&f.weights};
  std::set<std::string> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    RngStream rng = KeyChain(s).with(8).stream();
    ExecOutcome o = generate(src, f.model, Budget{}, rng);
    REQUIRE(o.status == ExecStatus::Returned);
    REQUIRE(!o.printed.empty());
    CHECK(o.printed.back() == '1');
    for (size_t k = 0; k + 1 < o.printed.size(); ++k)
      CHECK(o.printed[k] == o.printed[k + 1] + 1);
    seen.insert(o.printed);
  }
  CHECK(seen == std::set<std::string>{"21", "321", "4321"});
}

TEST_CASE("executions are pure functions of their stream") {
  Fixture f = aba_fixture();
  SourceRef src{&f.weights};
  RngStream r1 = KeyChain(5).with(6).stream();
  RngStream r2 = KeyChain(5).with(6).stream();
  ExecOutcome a = generate(src, f.model, Budget{}, r1);
  ExecOutcome b = generate(src, f.model, Budget{}, r2);
  CHECK(a.printed == b.printed);
  CHECK(a.output == b.output);
  CHECK(a.trace == b.trace);
}

TEST_CASE("replaying a trace reproduces the run exactly") {
  Fixture f = aba_fixture();
  SourceRef src{&f.weights};
  for (std::uint64_t s = 0; s < 50; ++s) {
    RngStream rng = KeyChain(s).with(3).stream();
    ExecOutcome o = generate(src, f.model, Budget{}, rng);
    REQUIRE(o.status == ExecStatus::Returned);

    Machine m;
    m.reset(f.model, src, f.model.q0, f.model.q1, Budget{});
    m.set_replay(&o.trace);
    RunEvent ev;
    while ((ev = m.run(nullptr)) == RunEvent::Printed) {
    }
    REQUIRE(ev == RunEvent::Finished);
    CHECK(m.printed() == o.printed);
    CHECK(m.output() == o.output);
    CHECK(m.tree() == o.trace);
  }
}

TEST_CASE("plain and printing entry points agree on print-free models") {
  Fixture f = fig1_fixture();
  SourceRef src{&f.weights};
  for (SymbolId q = 0; q < f.model.num_symbols; ++q) {
    for (SymbolId i = 0; i < f.model.num_symbols; ++i) {
      RngStream r1 = KeyChain(9).with(q).with(i).stream();
      RngStream r2 = KeyChain(9).with(q).with(i).stream();
      Budget b;
      b.max_calls = 60;
      ExecOutcome a = sample(src, f.model, q, i, b, r1);
      ExecOutcome p = sample_and_print(src, f.model, q, i, b, r2);
      CHECK(a.status == p.status);
      CHECK(a.output == p.output);
      CHECK(p.printed.empty());
    }
  }
}

TEST_CASE("collapsed predictives are proper distributions") {
  ModelStructure m = learning_model();
  PriorSpec spec = standard_prior(m, 0.1);
  PredictivePrior prior = PredictivePrior::compile(m, spec);
  CountTables counts = CountTables::zeros(m);
  SymbolId c1 = m.by_name("c1"), f1 = m.by_name("f1"), s2a = m.by_name("s2a");

  CHECK(predictive_cn(counts, prior, c1).sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(predictive_fn_row(counts, prior, f1, 3).sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(predictive_cm(counts, prior, s2a).sum() == doctest::Approx(1.0).epsilon(1e-12));
  // uniform at zero counts
  CHECK(predictive_cn(counts, prior, c1)[0] == doctest::Approx(1.0 / 21).epsilon(1e-12));

  counts.cn[c1].add(4);
  counts.cn[c1].add(4);
  Eigen::VectorXd v = predictive_cn(counts, prior, c1);
  CHECK(v.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v[4] == doctest::Approx(2.1 / 4.1).epsilon(1e-12));
}

TEST_CASE("an externally driven run follows the fed choices") {
  ModelStructure m = cpf_model();
  PriorSpec spec = standard_prior(m, 0.5);
  PredictivePrior prior = PredictivePrior::compile(m, spec);
  CountTables zero = CountTables::zeros(m);
  SourceRef src{CollapsedRef{&zero, &prior, true}};

  Machine mach;
  mach.reset(m, src, m.q0, m.q1, Budget{});
  mach.set_external(true);
  REQUIRE(mach.run(nullptr) == RunEvent::NeedDraw);
  CHECK(mach.pending().kind == DrawKind::Cm);
  std::vector<std::pair<std::int32_t, double>> dist;
  mach.pending_distribution(dist);
  double total = 0.0;
  for (auto& [cell, p] : dist) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dist.size() == 16);  // every child pair of a four-symbol model

  // drive the pair (letter, pass-through): print then finish
  mach.feed(0 * m.num_symbols + 1);
  RunEvent ev = mach.run(nullptr);
  REQUIRE(ev == RunEvent::Printed);
  CHECK(mach.printed() == "a");
  ev = mach.run(nullptr);
  CHECK(ev == RunEvent::Finished);
}
