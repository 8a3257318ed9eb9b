#include <stdexcept>

#include "cppso/experiment.hpp"
#include "cppso/fixtures.hpp"
#include "cppso/inference.hpp"
#include "cppso/rng.hpp"
#include "cppso/sampler.hpp"
#include "cppso/serialize.hpp"
#include "cppso/tree.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cppso;

namespace {

ChainState small_trained_chain(int epochs = 3) {
  ModelStructure m = learning_model();
  PriorSpec prior = standard_prior(m, 0.1);
  prior = apply_special_init(prior, m,
                             CmCellInit{m.by_name("s12a"), m.by_name("c1"),
                                        m.by_name("id"), 100.0});
  PGConfig pg;
  pg.particles = 160;  // cold-counts bootstraps on this model need a wide net
  RngStream rng = KeyChain(77).with(1).stream();
  ChainState chain = init_chain(m, prior, pg, gen_dataset(PatternTag::ABA, 12, rng), 77);
  for (int e = 0; e < epochs; ++e) gibbs_sweep(chain);
  return chain;
}

}  // namespace

TEST_CASE("model survives a round trip byte for byte") {
  for (const ModelStructure& m : {fig1_fixture().model, learning_model(),
                                  counting_fixture().model}) {
    std::string doc = model_to_json(m);
    ModelStructure back = model_from_json(doc);
    CHECK(back.num_symbols == m.num_symbols);
    CHECK(back.alphabet == m.alphabet);
    CHECK(back.type_of == m.type_of);
    CHECK(back.label_of == m.label_of);
    CHECK(back.name_of == m.name_of);
    CHECK(back.q0 == m.q0);
    CHECK(back.q1 == m.q1);
    CHECK(model_to_json(back) == doc);
  }
}

TEST_CASE("prior and weight tables survive round trips") {
  ModelStructure m = learning_model();
  PriorSpec p = standard_prior(m, 0.1);
  p = apply_special_init(p, m, CmCellInit{m.by_name("s2b"), m.by_name("f1"),
                                          m.by_name("f1"), 100.0});
  std::string doc = prior_to_json(p);
  PriorSpec back = prior_from_json(doc);
  CHECK(prior_to_json(back) == doc);
  CHECK(back.cm.at(m.by_name("s2b"))(m.by_name("f1"), m.by_name("f1")) == 100.0);

  WeightTables w = fig1_fixture().weights;
  std::string wdoc = weights_to_json(w);
  WeightTables wback = weights_from_json(wdoc);
  CHECK(weights_to_json(wback) == wdoc);
  CHECK(!validate_weights(fig1_fixture().model, wback).has_value());
}

TEST_CASE("trees round trip preserving structure and rendering") {
  for (const Fixture& f : {aba_fixture(), counting_fixture()}) {
    for (std::uint64_t s = 0; s < 25; ++s) {
      RngStream rng = KeyChain(s).with(2).stream();
      ExecOutcome o = generate(SourceRef{&f.weights}, f.model, Budget{}, rng);
      std::string doc = tree_to_json(o.trace, f.model);
      ParseTree back = tree_from_json(doc, f.model);
      CHECK(back == o.trace);
      CHECK(tree_key(back) == tree_key(o.trace));
      CHECK(render(back, f.model) == render(o.trace, f.model));
      CHECK(tree_to_json(back, f.model) == doc);
    }
  }
}

TEST_CASE("tree parsing validates symbol types") {
  Fixture f = aba_fixture();
  RngStream rng = KeyChain(5).with(2).stream();
  ExecOutcome o = generate(SourceRef{&f.weights}, f.model, Budget{}, rng);
  std::string doc = tree_to_json(o.trace, f.model);
  // claim some letter node is an Fn node; the model knows better
  const std::string ob_tag = "\"type\":\"Ob\"";
  auto at = doc.find(ob_tag);
  REQUIRE(at != std::string::npos);
  std::string broken = doc;
  broken.replace(at, ob_tag.size(), "\"type\":\"Fn\"");
  CHECK_THROWS_AS(tree_from_json(broken, f.model), std::runtime_error);
  CHECK_THROWS_AS(tree_from_json("{not json", f.model), std::runtime_error);
}

TEST_CASE("count tables round trip") {
  ChainState chain = small_trained_chain();
  std::string doc = counts_to_json(chain.counts);
  CountTables back = counts_from_json(doc, chain.model);
  CHECK(back == chain.counts);
  CHECK(counts_to_json(back) == doc);
}

TEST_CASE("chain snapshots restore the full training state") {
  ChainState chain = small_trained_chain();
  chain.pg.resampling = ResamplingScheme::Systematic;
  std::string doc = snapshot_to_json(chain);
  ChainState back = snapshot_from_json(doc);
  CHECK(back.epoch == chain.epoch);
  CHECK(back.seed == chain.seed);
  CHECK(back.counts == chain.counts);
  CHECK(back.pg.particles == chain.pg.particles);
  CHECK(back.pg.resampling == ResamplingScheme::Systematic);
  REQUIRE(back.data.size() == chain.data.size());
  for (size_t i = 0; i < chain.data.size(); ++i) {
    CHECK(back.data[i].x == chain.data[i].x);
    CHECK(tree_key(back.data[i].tree) == tree_key(chain.data[i].tree));
  }
  REQUIRE(back.history.size() == chain.history.size());
  for (size_t i = 0; i < chain.history.size(); ++i) {
    CHECK(back.history[i].raw_nll == chain.history[i].raw_nll);
    CHECK(back.history[i].smoothed_nll == chain.history[i].smoothed_nll);
  }
  CHECK(snapshot_to_json(back) == doc);
  CHECK(counts_consistent(back));

  // resumed chains continue identically to never-serialized ones
  EpochMetrics a = gibbs_sweep(chain);
  EpochMetrics b = gibbs_sweep(back);
  CHECK(a.raw_nll == b.raw_nll);
  CHECK(a.per_datum_log_z == b.per_datum_log_z);
}

TEST_CASE("snapshots with inconsistent counts are rejected") {
  ChainState chain = small_trained_chain();
  std::string doc = snapshot_to_json(chain);
  // strip tree counts by swapping in an empty count section
  CountTables zero = CountTables::zeros(chain.model);
  std::string zeros = counts_to_json(zero);
  std::string counts = counts_to_json(chain.counts);
  auto at = doc.find(counts);
  REQUIRE(at != std::string::npos);
  std::string broken = doc.substr(0, at) + zeros + doc.substr(at + counts.size());
  CHECK_THROWS(snapshot_from_json(broken));
}

TEST_CASE("text files round trip") {
  testutil::TempDir dir;
  std::string body = "line one\nline two\n";
  write_text_file(dir.file("t.txt"), body);
  CHECK(read_text_file(dir.file("t.txt")) == body);
  CHECK_THROWS_AS(read_text_file(dir.file("missing.txt")), std::runtime_error);
}
