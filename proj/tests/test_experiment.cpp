#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "cppso/experiment.hpp"
#include "cppso/fixtures.hpp"
#include "cppso/serialize.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"

using namespace cppso;
namespace fs = std::filesystem;

namespace {

// A curriculum run small enough for unit tests: 6 sentences, 4 epochs.
ExperimentConfig tiny_config(std::uint64_t seed = 5) {
  ExperimentConfig cfg = preset(ExperimentId::A1);
  cfg.name = "tiny";
  cfg.schedule.dataset_size = 6;
  cfg.schedule.phases[0].epochs = 4;
  cfg.epochs = 4;
  cfg.chains = 2;
  cfg.pg.particles = 160;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("presets pin the published run settings") {
  ExperimentConfig a1 = preset(ExperimentId::A1);
  CHECK(a1.name == "A1");
  CHECK(a1.chains == 10);
  CHECK(a1.pg.particles == 100);
  CHECK(a1.epochs == 100);
  CHECK(a1.schedule.dataset_size == 100);
  REQUIRE(a1.schedule.phases.size() == 1);
  CHECK(a1.schedule.phases[0].pattern == PatternTag::ABA);
  CHECK(a1.model.num_symbols == 21);
  // warm start: combinator s12a prefers (c1, id), everything else uniform 0.1
  SymbolId s12a = a1.model.by_name("s12a");
  CHECK(a1.prior.cm.at(s12a)(a1.model.by_name("c1"), a1.model.by_name("id")) == 100.0);
  CHECK(a1.prior.cm.at(s12a)(a1.model.by_name("id"), a1.model.by_name("c1")) == 0.1);
  CHECK(a1.prior.cn.at(a1.model.by_name("c1"))(0) == 0.1);

  for (ExperimentId id : {ExperimentId::A2, ExperimentId::A3, ExperimentId::A6,
                          ExperimentId::A7}) {
    ExperimentConfig c = preset(id);
    CHECK(c.pg.particles == 400);
    CHECK(c.epochs == 150);
    REQUIRE(c.schedule.phases.size() == 3);
    CHECK(c.schedule.phases[1].replace_per_epoch == 2);
  }
  for (ExperimentId id : {ExperimentId::A4, ExperimentId::A5}) {
    ExperimentConfig c = preset(id);
    CHECK(c.epochs == 250);
    REQUIRE(c.schedule.phases.size() == 5);
  }

  // A6 seeds the f relation into f1's table
  ExperimentConfig a6 = preset(ExperimentId::A6);
  SymbolId f1 = a6.model.by_name("f1");
  SymbolId o1 = a6.model.ob_symbol('1');
  SymbolId o2 = a6.model.ob_symbol('2');
  CHECK(a6.prior.fn.at(f1)(o1, o2) == 100.0);
  CHECK(a6.prior.fn.at(f1)(o2, o1) == 0.1);
  Verdicts v6 = compute_verdicts(a6.model, CountTables::zeros(a6.model),
                                 PredictivePrior::compile(a6.model, a6.prior));
  CHECK(v6.fn_passing_f == std::vector<SymbolId>{f1});
  CHECK(v6.fn_passing_g.empty());
  CHECK(!v6.composition);

  // A7 additionally wires s2b toward (f1, f1), giving composition up front
  ExperimentConfig a7 = preset(ExperimentId::A7);
  SymbolId s2b = a7.model.by_name("s2b");
  CHECK(a7.prior.cm.at(s2b)(a7.model.by_name("f1"), a7.model.by_name("f1")) == 100.0);
  Verdicts v7 = compute_verdicts(a7.model, CountTables::zeros(a7.model),
                                 PredictivePrior::compile(a7.model, a7.prior));
  CHECK(v7.composition);

  // A2..A5 start with no relation knowledge at all
  ExperimentConfig a2 = preset(ExperimentId::A2);
  Verdicts v2 = compute_verdicts(a2.model, CountTables::zeros(a2.model),
                                 PredictivePrior::compile(a2.model, a2.prior));
  CHECK(v2.fn_passing_f.empty());
  CHECK(v2.fn_passing_g.empty());
  CHECK(!v2.composition);
}

TEST_CASE("snapshot epochs default to phase boundaries") {
  CHECK(default_snapshot_epochs(preset(ExperimentId::A1).schedule) ==
        std::vector<int>{1, 100});
  CHECK(default_snapshot_epochs(preset(ExperimentId::A2).schedule) ==
        std::vector<int>{1, 51, 101, 150});
  CHECK(default_snapshot_epochs(preset(ExperimentId::A4).schedule) ==
        std::vector<int>{1, 51, 101, 151, 201, 250});
}

TEST_CASE("json configs override preset fields") {
  std::string text = R"({
    "experiment": "A1",
    "name": "little",
    "chains": 3,
    "seed": 99,
    "epochs": 7,
    "particles": 25,
    "schedule": {"dataset_size": 9,
                 "phases": [{"epochs": 12, "pattern": "ABf", "replace": 0}]},
    "pg": {"max_restarts": 4, "urn": true}
  })";
  ExperimentConfig cfg = config_from_json(text);
  CHECK(cfg.name == "little");
  CHECK(cfg.chains == 3);
  CHECK(cfg.seed == 99);
  CHECK(cfg.epochs == 7);
  CHECK(cfg.pg.particles == 25);
  CHECK(cfg.pg.max_restarts == 4);
  CHECK(cfg.schedule.dataset_size == 9);
  CHECK(cfg.schedule.phases.size() == 1);
  CHECK(cfg.schedule.phases[0].pattern == PatternTag::ABf);
  // untouched preset fields survive
  CHECK(cfg.model.num_symbols == 21);
  CHECK(cfg.prior.cm.at(cfg.model.by_name("s12a"))(cfg.model.by_name("c1"),
                                                   cfg.model.by_name("id")) == 100.0);

  CHECK_THROWS_AS(config_from_json("{\"experiment\": \"A9\"}"), std::exception);
  CHECK_THROWS_AS(config_from_json("not json"), std::exception);
}

TEST_CASE("json configs can define a model and prior from scratch") {
  std::string text = R"({
    "name": "scratch",
    "model": {
      "alphabet": "01",
      "symbols": [
        {"id": 0, "name": "0", "type": "Ob", "label": "0"},
        {"id": 1, "name": "1", "type": "Ob", "label": "1"},
        {"id": 2, "name": "id", "type": "Id"},
        {"id": 3, "name": "c1", "type": "Cn"},
        {"id": 4, "name": "s2a", "type": "S2"}
      ],
      "q0": 4,
      "q1": 2
    },
    "alpha": 0.5,
    "init": [{"type": "cm_cell", "q": "s2a", "f": "c1", "g": "id", "value": 9.0}],
    "schedule": {"dataset_size": 4,
                 "phases": [{"epochs": 2, "pattern": "ABA", "replace": 0}]},
    "chains": 1,
    "particles": 10,
    "seed": 3
  })";
  ExperimentConfig cfg = config_from_json(text);
  CHECK(cfg.model.num_symbols == 5);
  CHECK(cfg.model.alphabet == "01");
  CHECK(cfg.model.type(cfg.model.q0) == SymbolType::S2);
  CHECK(cfg.prior.cm.at(cfg.model.by_name("s2a"))(cfg.model.by_name("c1"),
                                                  cfg.model.by_name("id")) == 9.0);
  CHECK(cfg.prior.cn.at(cfg.model.by_name("c1"))(0) == 0.5);
  CHECK(cfg.epochs == 2);
}

TEST_CASE("verdicts need strict argmaxes") {
  ModelStructure m = learning_model();
  CountTables counts = CountTables::zeros(m);
  PriorSpec spec = standard_prior(m, 0.1);

  // two equally-good output cells -> tie -> fail
  SymbolId f1 = m.by_name("f1");
  for (char c = '0'; c <= '9'; ++c) {
    spec.fn.at(f1)(m.ob_symbol(c), m.ob_symbol(rel_f(c))) = 50.0;
    spec.fn.at(f1)(m.ob_symbol(c), m.by_name("id")) = 50.0;
  }
  Verdicts v = compute_verdicts(m, counts, PredictivePrior::compile(m, spec));
  CHECK(v.fn_passing_f.empty());

  // breaking the tie by any margin passes
  for (char c = '0'; c <= '9'; ++c)
    spec.fn.at(f1)(m.ob_symbol(c), m.ob_symbol(rel_f(c))) = 50.5;
  v = compute_verdicts(m, counts, PredictivePrior::compile(m, spec));
  CHECK(v.fn_passing_f == std::vector<SymbolId>{f1});

  // one wrong letter spoils the whole relation
  spec.fn.at(f1)(m.ob_symbol('7'), m.ob_symbol('3')) = 80.0;
  v = compute_verdicts(m, counts, PredictivePrior::compile(m, spec));
  CHECK(v.fn_passing_f.empty());
}

TEST_CASE("composition verdict scans every combinator against every passing fn") {
  ModelStructure m = learning_model();
  CountTables counts = CountTables::zeros(m);
  PriorSpec spec = standard_prior(m, 0.1);
  std::map<char, char> fmap;
  for (char c = '0'; c <= '9'; ++c) fmap[c] = rel_f(c);
  spec = apply_special_init(spec, m, FnRelationInit{m.by_name("f2"), fmap, 100.0, 0.1});
  // f-table on f2, composition cell on a *different* combinator than the usual one
  spec = apply_special_init(
      spec, m, CmCellInit{m.by_name("s2c"), m.by_name("f2"), m.by_name("f2"), 100.0});
  Verdicts v = compute_verdicts(m, counts, PredictivePrior::compile(m, spec));
  CHECK(v.fn_passing_f == std::vector<SymbolId>{m.by_name("f2")});
  CHECK(v.fn_passing_g.empty());
  CHECK(v.composition);  // any combinator pairing any f-passing fn with itself

  // an fn capturing only the composite relation cannot witness composition
  PriorSpec gspec = standard_prior(m, 0.1);
  std::map<char, char> gmap;
  for (char c = '0'; c <= '9'; ++c) gmap[c] = rel_g(c);
  gspec = apply_special_init(gspec, m, FnRelationInit{m.by_name("f2"), gmap, 100.0, 0.1});
  gspec = apply_special_init(
      gspec, m, CmCellInit{m.by_name("s2c"), m.by_name("f2"), m.by_name("f2"), 100.0});
  Verdicts gv = compute_verdicts(m, counts, PredictivePrior::compile(m, gspec));
  CHECK(gv.fn_passing_g == std::vector<SymbolId>{m.by_name("f2")});
  CHECK(!gv.composition);
}

TEST_CASE("curves csv lays out one row per chain-epoch") {
  ExperimentConfig cfg = tiny_config();
  RunReport rep = run_experiment(cfg);
  std::string csv = curves_csv(rep);
  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "chain,epoch,raw_nll,smoothed_nll");
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 3);
  }
  CHECK(rows == 2 * 4);

  // numbers survive a text round trip exactly
  std::istringstream again(csv);
  std::getline(again, line);  // header
  int chain, epoch;
  char comma;
  double raw, sm;
  std::getline(again, line);
  std::istringstream row(line);
  row >> chain >> comma >> epoch >> comma >> raw >> comma >> sm;
  CHECK(chain == 0);
  CHECK(epoch == 1);
  CHECK(raw == rep.curves[0][0].raw_nll);
  CHECK(sm == rep.curves[0][0].smoothed_nll);
}

TEST_CASE("experiment artifacts are complete and reproducible") {
  testutil::TempDir dir;
  ExperimentConfig cfg = tiny_config();
  cfg.out_dir = dir.path();
  RunReport rep = run_experiment(cfg);
  REQUIRE(rep.chains.size() == 2);
  for (const ChainReport& c : rep.chains) {
    CHECK(!c.failed);
    CHECK(c.seconds > 0.0);
    CHECK(std::isfinite(c.final_raw_nll));
    // paths in the report are leaves under the output directory
    CHECK(fs::exists(dir.path() + "/" + c.snapshot_path));
    CHECK(fs::exists(dir.path() + "/" + c.weights_path));
    for (const std::string& p : c.tree_paths) CHECK(fs::exists(dir.path() + "/" + p));
  }
  REQUIRE(fs::exists(dir.path() + "/curves.csv"));
  REQUIRE(fs::exists(dir.path() + "/report.json"));
  REQUIRE(fs::exists(dir.path() + "/timings.txt"));

  std::string csv1 = read_text_file(dir.path() + "/curves.csv");
  std::string json1 = read_text_file(dir.path() + "/report.json");
  CHECK(csv1 == curves_csv(rep));

  // the json parses and excludes anything timing-dependent
  nlohmann::json parsed = nlohmann::json::parse(json1);
  CHECK(parsed.at("name") == "tiny");
  CHECK(parsed.at("chains").size() == 2);
  CHECK(json1.find("seconds") == std::string::npos);

  // a rerun into a fresh directory produces byte-identical artifacts
  testutil::TempDir dir2;
  ExperimentConfig cfg2 = tiny_config();
  cfg2.out_dir = dir2.path();
  run_experiment(cfg2);
  CHECK(read_text_file(dir2.path() + "/curves.csv") == csv1);
  CHECK(read_text_file(dir2.path() + "/report.json") == json1);
  CHECK(read_text_file(dir.path() + "/" + rep.chains[0].snapshot_path) ==
        read_text_file(dir2.path() + "/chain0_snapshot.json"));

  // snapshots reload into chains whose books balance
  ChainState chain =
      snapshot_from_json(read_text_file(dir.path() + "/" + rep.chains[1].snapshot_path));
  CHECK(chain.epoch == 4);
  CHECK(counts_consistent(chain));
  CHECK(chain.data.size() == 6);
}

TEST_CASE("worker count does not change results") {
  ExperimentConfig cfg = tiny_config(11);
  cfg.chains = 3;
  RunReport serial = run_experiment(cfg);

  ::setenv("CPPSO_WORKERS", "3", 1);
  RunReport parallel = run_experiment(cfg);
  ::unsetenv("CPPSO_WORKERS");

  CHECK(curves_csv(serial) == curves_csv(parallel));
  CHECK(report_json(serial) == report_json(parallel));
}

TEST_CASE("zero-epoch runs emit just the csv header") {
  ExperimentConfig cfg = tiny_config();
  cfg.epochs = 0;
  cfg.schedule.phases[0].epochs = 0;
  RunReport rep = run_experiment(cfg);
  CHECK(curves_csv(rep) == "chain,epoch,raw_nll,smoothed_nll\n");
}

TEST_CASE("a chain that cannot parse is reported, not fatal") {
  ExperimentConfig cfg = tiny_config();
  cfg.chains = 2;
  cfg.pg.budget.max_calls = 2;  // nothing length 3 fits in two calls
  cfg.pg.max_restarts = 1;
  RunReport rep = run_experiment(cfg);
  REQUIRE(rep.chains.size() == 2);
  for (const ChainReport& c : rep.chains) {
    CHECK(c.failed);
    CHECK(c.error.find("unparseable") != std::string::npos);
  }
  // failed chains contribute no rows but the report still serializes
  CHECK(curves_csv(rep) == "chain,epoch,raw_nll,smoothed_nll\n");
  CHECK(report_json(rep).find("unparseable") != std::string::npos);
}

TEST_CASE("inspection reads a chain without disturbing it") {
  ExperimentConfig cfg = tiny_config();
  ChainState chain = run_chain(cfg.model, cfg.prior, cfg.schedule, cfg.epochs,
                               cfg.pg, cfg.seed);
  CountTables before = chain.counts;
  Inspection ins = inspect(chain);
  CHECK(chain.counts == before);
  CHECK(ins.tree_renderings.size() == 6);
  for (const std::string& r : ins.tree_renderings) CHECK(!r.empty());
  WeightTables w = weights_from_json(ins.weights_json);
  CHECK(!validate_weights(chain.model, w).has_value());
  // an A1-sized run learns no relation tables
  CHECK(ins.verdicts.fn_passing_f.empty());
}

TEST_CASE("heldout scoring separates seen from impossible") {
  ExperimentConfig cfg = tiny_config();
  ChainState chain = run_chain(cfg.model, cfg.prior, cfg.schedule, cfg.epochs,
                               cfg.pg, cfg.seed);
  PGConfig eval = chain.pg;
  eval.max_restarts = 0;
  std::string seen = chain.data[0].x;
  std::vector<HeldoutEntry> entries = heldout_eval(chain, {seen}, eval, 17);
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].x == seen);
  CHECK(entries[0].parsed);
  CHECK(std::isfinite(entries[0].nll));
  CHECK(entries[0].nll > 0.0);
  CHECK(entries[0].attempts == 1);

  CHECK(heldout_eval(chain, {}, eval, 17).empty());

  // a starved budget cannot parse anything
  PGConfig starved = eval;
  starved.budget.max_calls = 2;
  starved.max_restarts = 2;
  std::vector<HeldoutEntry> dead = heldout_eval(chain, {seen}, starved, 17);
  REQUIRE(dead.size() == 1);
  CHECK(!dead[0].parsed);
  CHECK(std::isinf(dead[0].nll));
  CHECK(dead[0].attempts == 3);

  // same seed, same numbers
  std::vector<HeldoutEntry> again = heldout_eval(chain, {seen}, eval, 17);
  CHECK(again[0].nll == entries[0].nll);
}

TEST_CASE("third-letter argmax scoring runs all hundred pairs") {
  ExperimentConfig cfg = tiny_config();
  cfg.schedule.dataset_size = 20;
  cfg.epochs = 6;
  cfg.schedule.phases[0].epochs = 6;
  ChainState chain = run_chain(cfg.model, cfg.prior, cfg.schedule, cfg.epochs,
                               cfg.pg, cfg.seed);
  int hits = aba_argmax_matches(chain, 3, 23);
  CHECK(hits >= 0);
  CHECK(hits <= 100);
  CHECK(aba_argmax_matches(chain, 3, 23) == hits);
}

TEST_CASE("a curriculum-trained chain memorizes which letters begin sentences") {
  // Train on repetition sentences whose first letter only ranges over 0..6,
  // then compare held-out scores: strings opening with an unseen letter should
  // look far less likely even though the pattern is identical.
  ModelStructure m = learning_model();
  PriorSpec prior = standard_prior(m, 0.1);
  prior = apply_special_init(prior, m,
                             CmCellInit{m.by_name("s12a"), m.by_name("c1"),
                                        m.by_name("id"), 100.0});
  PGConfig pg;
  pg.particles = 160;
  RngStream rng = KeyChain(41).with(rng_tag::kDataset).stream();
  std::vector<std::string> data =
      gen_dataset(PatternTag::ABA, 40, rng, "0123456");
  ChainState chain = init_chain(m, prior, pg, std::move(data), 41);
  for (int e = 0; e < 8; ++e) gibbs_sweep(chain);
  REQUIRE(counts_consistent(chain));

  PGConfig eval = pg;
  eval.max_restarts = 3;
  std::vector<HeldoutEntry> res =
      heldout_eval(chain, {"353", "252", "959", "858"}, eval, 77);
  REQUIRE(res.size() == 4);
  double seen_nll = (res[0].nll + res[1].nll) / 2.0;
  double unseen_nll = (res[2].nll + res[3].nll) / 2.0;
  CHECK(res[0].parsed);
  CHECK(res[1].parsed);
  // unseen openings are either unparseable or much more surprising
  CHECK(unseen_nll > seen_nll + 0.3);
}
