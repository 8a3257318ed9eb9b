#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cppso/datasets.hpp"
#include "cppso/experiment.hpp"
#include "cppso/fixtures.hpp"
#include "cppso/inference.hpp"
#include "cppso/sampler.hpp"
#include "cppso/semantics.hpp"
#include "cppso/serialize.hpp"

namespace {

using namespace cppso;
using nlohmann::json;

PatternTag pattern_arg(const std::string& s) {
  for (PatternTag t : {PatternTag::ABA, PatternTag::ABf, PatternTag::ABAf, PatternTag::ABg,
                       PatternTag::ABAf_gf}) {
    if (s == to_string(t)) return t;
  }
  throw CLI::ValidationError("--pattern", "unknown pattern: " + s);
}

Fixture builtin_fixture(const std::string& name) {
  if (name == "fig1") return fig1_fixture();
  if (name == "aba") return aba_fixture();
  if (name == "aba_mini") return aba_mini_fixture();
  if (name == "counting") return counting_fixture();
  if (name.rfind("random:", 0) == 0) return random_plain_cpp(std::stoull(name.substr(7)));
  throw CLI::ValidationError("--builtin",
                             "unknown builtin (fig1|aba|aba_mini|counting|random:SEED): " + name);
}

// A model file bundles {"model": ..., "weights": ...}.
Fixture load_model_file(const std::string& path) {
  const json j = json::parse(read_text_file(path));
  Fixture f;
  f.model = model_from_json(j.at("model").dump());
  f.weights = weights_from_json(j.at("weights").dump());
  return f;
}

Fixture resolve_fixture(const std::string& model_path, const std::string& builtin) {
  if (!builtin.empty()) return builtin_fixture(builtin);
  if (!model_path.empty()) return load_model_file(model_path);
  throw CLI::RequiredError("--model or --builtin");
}

std::string fixture_to_json(const Fixture& f) {
  json j;
  j["model"] = json::parse(model_to_json(f.model));
  j["weights"] = json::parse(weights_to_json(f.weights));
  return j.dump();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
  } else {
    write_text_file(out_path, text);
  }
}

std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::string schedule_json(const CurriculumSchedule& s) {
  json j;
  j["dataset_size"] = s.dataset_size;
  json phases = json::array();
  for (const CurriculumPhase& p : s.phases) {
    json e;
    e["epochs"] = p.epochs;
    e["pattern"] = to_string(p.pattern);
    e["replace"] = p.replace_per_epoch;
    phases.push_back(std::move(e));
  }
  j["phases"] = std::move(phases);
  return j.dump(2) + "\n";
}

void add_generate(CLI::App& app) {
  auto* cmd = app.add_subcommand("generate", "Emit a dataset or a curriculum schedule");
  auto pattern = std::make_shared<std::string>("ABA");
  auto count = std::make_shared<int>(100);
  auto seed = std::make_shared<std::uint64_t>(1);
  auto a_choices = std::make_shared<std::string>();
  auto schedule_of = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--pattern", *pattern, "ABA|ABf|ABAf|ABg|ABAf_gf");
  cmd->add_option("--count", *count, "number of sentences");
  cmd->add_option("--seed", *seed, "rng seed");
  cmd->add_option("--a-choices", *a_choices, "restrict A to these digits (e.g. 0123456)");
  cmd->add_option("--schedule", *schedule_of, "emit the schedule of this experiment as JSON");
  cmd->add_option("--out", *out, "output file (default stdout)");
  cmd->callback([=]() {
    if (!schedule_of->empty()) {
      emit(schedule_json(schedule_for(experiment_from_string(*schedule_of))), *out);
      return;
    }
    RngStream rng = KeyChain(*seed).with(rng_tag::kDataset).stream();
    std::string text;
    for (const std::string& x : gen_dataset(pattern_arg(*pattern), *count, rng, *a_choices)) {
      text += x;
      text += '\n';
    }
    emit(text, *out);
  });
}

void add_train(CLI::App& app) {
  auto* cmd = app.add_subcommand("train", "Run a training experiment");
  auto experiment = std::make_shared<std::string>();
  auto config_path = std::make_shared<std::string>();
  auto chains = std::make_shared<int>(-1);
  auto epochs = std::make_shared<int>(-1);
  auto particles = std::make_shared<int>(-1);
  auto seed = std::make_shared<std::int64_t>(-1);
  auto out = std::make_shared<std::string>();
  cmd->add_option("--experiment", *experiment, "preset id A1..A7");
  cmd->add_option("--config", *config_path, "custom config JSON file");
  cmd->add_option("--chains", *chains, "number of chains");
  cmd->add_option("--epochs", *epochs, "override epoch count");
  cmd->add_option("--particles", *particles, "override particle count");
  cmd->add_option("--seed", *seed, "base seed (chain k uses seed + k)");
  cmd->add_option("--out", *out, "artifact directory")->required();
  cmd->callback([=]() {
    ExperimentConfig cfg;
    if (!config_path->empty()) {
      cfg = config_from_json(read_text_file(*config_path));
    } else if (!experiment->empty()) {
      cfg = preset(experiment_from_string(*experiment));
    } else {
      throw CLI::RequiredError("--experiment or --config");
    }
    if (*chains >= 0) cfg.chains = *chains;
    if (*epochs >= 0) cfg.epochs = *epochs;
    if (*particles > 0) cfg.pg.particles = *particles;
    if (*seed >= 0) cfg.seed = static_cast<std::uint64_t>(*seed);
    cfg.out_dir = *out;
    const RunReport report = run_experiment(cfg);
    int failed = 0;
    for (const ChainReport& c : report.chains) {
      std::cout << "chain " << c.chain << " seed " << c.seed;
      if (c.failed) {
        std::cout << "  FAILED: " << c.error << "\n";
        ++failed;
        continue;
      }
      std::cout << "  nll " << c.epoch1_smoothed_nll << " -> " << c.final_smoothed_nll
                << "  f:" << c.verdicts.fn_passing_f.size()
                << " g:" << c.verdicts.fn_passing_g.size()
                << " compose:" << (c.verdicts.composition ? "yes" : "no") << "  "
                << c.seconds << "s\n";
    }
    std::cout << report.name << ": " << (report.chains.size() - failed) << "/"
              << report.chains.size() << " chains finished in " << report.total_seconds
              << "s; artifacts in " << *out << "\n";
    if (failed == static_cast<int>(report.chains.size())) {
      throw CLI::RuntimeError(1);
    }
  });
}

void add_eval(CLI::App& app) {
  auto* cmd = app.add_subcommand("eval", "Score held-out strings against a chain snapshot");
  auto snapshot_path = std::make_shared<std::string>();
  auto test_path = std::make_shared<std::string>();
  auto seed = std::make_shared<std::uint64_t>(1);
  auto particles = std::make_shared<int>(-1);
  auto out = std::make_shared<std::string>();
  cmd->add_option("--snapshot", *snapshot_path, "chain snapshot JSON")->required();
  cmd->add_option("--test", *test_path, "newline-delimited test strings")->required();
  cmd->add_option("--seed", *seed, "rng seed");
  cmd->add_option("--particles", *particles, "override particle count");
  cmd->add_option("--out", *out, "output file (default stdout)");
  cmd->callback([=]() {
    const ChainState chain = snapshot_from_json(read_text_file(*snapshot_path));
    PGConfig pg = chain.pg;
    if (*particles > 0) pg.particles = *particles;
    json rows = json::array();
    for (const HeldoutEntry& e : heldout_eval(chain, read_lines(*test_path), pg, *seed)) {
      json r;
      r["x"] = e.x;
      r["parsed"] = e.parsed;
      r["attempts"] = e.attempts;
      if (e.parsed) r["nll"] = e.nll;  // infinity has no JSON number; omit when unparsed
      rows.push_back(std::move(r));
    }
    emit(rows.dump(2) + "\n", *out);
  });
}

void add_inspect(CLI::App& app) {
  auto* cmd = app.add_subcommand("inspect", "Report a snapshot's weights, verdicts and trees");
  auto snapshot_path = std::make_shared<std::string>();
  auto weights_out = std::make_shared<std::string>();
  auto trees = std::make_shared<bool>(false);
  cmd->add_option("--snapshot", *snapshot_path, "chain snapshot JSON")->required();
  cmd->add_option("--weights-out", *weights_out, "write posterior-mean weights here");
  cmd->add_flag("--trees", *trees, "print every datum's current parse tree");
  cmd->callback([=]() {
    const ChainState chain = snapshot_from_json(read_text_file(*snapshot_path));
    const Inspection ins = inspect(chain);
    std::cout << "epoch " << chain.epoch << ", " << chain.data.size() << " data, "
              << chain.counts.total_mass() << " draws counted\n";
    auto names = [&](const std::vector<SymbolId>& qs) {
      std::string s;
      for (SymbolId q : qs) {
        if (!s.empty()) s += ",";
        s += chain.model.name_of[static_cast<size_t>(q)];
      }
      return s.empty() ? std::string("-") : s;
    };
    std::cout << "relation f(x)=(x+1)%10 captured by: " << names(ins.verdicts.fn_passing_f)
              << "\n";
    std::cout << "relation g(x)=(x+2)%10 captured by: " << names(ins.verdicts.fn_passing_g)
              << "\n";
    std::cout << "composition f.f on a combinator: "
              << (ins.verdicts.composition ? "yes" : "no") << "\n";
    if (!weights_out->empty()) {
      write_text_file(*weights_out, ins.weights_json);
      std::cout << "posterior-mean weights written to " << *weights_out << "\n";
    }
    if (*trees) {
      for (const std::string& t : ins.tree_renderings) std::cout << "\n" << t;
    }
  });
}

void add_oracle(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "oracle", "Exhaustively score one observation string, or dump the exact semantics");
  auto model_path = std::make_shared<std::string>();
  auto builtin = std::make_shared<std::string>();
  auto target = std::make_shared<std::string>();
  auto depth = std::make_shared<int>(500);
  auto floor = std::make_shared<double>(0.0);
  auto with_trees = std::make_shared<bool>(false);
  auto semantics = std::make_shared<bool>(false);
  auto out = std::make_shared<std::string>();
  cmd->add_option("--model", *model_path, "model file ({model, weights})");
  cmd->add_option("--builtin", *builtin, "fig1|aba|aba_mini|counting|random:SEED");
  cmd->add_option("--string", *target, "observation string");
  cmd->add_option("--depth", *depth, "call budget per branch");
  cmd->add_option("--floor", *floor, "prune branches below this mass");
  cmd->add_flag("--trees", *with_trees, "collect matching trees");
  cmd->add_flag("--semantics", *semantics,
                "emit the exact return-probability tables instead (plain models)");
  cmd->add_option("--out", *out, "output file (default stdout)");
  cmd->callback([=]() {
    const Fixture f = resolve_fixture(*model_path, *builtin);
    if (*semantics) {
      emit(semantics_to_json(evaluate_semantics(f.model, f.weights), f.model) + "\n", *out);
      return;
    }
    if (target->empty()) throw CLI::RequiredError("--string (or --semantics)");
    OracleOptions opts;
    opts.max_calls = *depth;
    opts.mass_floor = *floor;
    opts.collect_trees = *with_trees;
    const OracleResult r = observation_oracle(f.model, SourceRef{&f.weights}, *target, opts);
    emit(oracle_to_json(r, f.model) + "\n", *out);
  });
}

void add_sample(CLI::App& app) {
  auto* cmd = app.add_subcommand("sample", "Draw observations from a model");
  auto model_path = std::make_shared<std::string>();
  auto builtin = std::make_shared<std::string>();
  auto count = std::make_shared<int>(10);
  auto seed = std::make_shared<std::uint64_t>(1);
  auto budget = std::make_shared<int>(500);
  auto dump = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--model", *model_path, "model file ({model, weights})");
  cmd->add_option("--builtin", *builtin, "fig1|aba|aba_mini|counting|random:SEED");
  cmd->add_option("--count", *count, "number of draws");
  cmd->add_option("--seed", *seed, "rng seed");
  cmd->add_option("--budget", *budget, "call budget per draw");
  cmd->add_option("--dump-model", *dump, "also write the model file here");
  cmd->add_option("--out", *out, "output file (default stdout)");
  cmd->callback([=]() {
    const Fixture f = resolve_fixture(*model_path, *builtin);
    if (!dump->empty()) write_text_file(*dump, fixture_to_json(f));
    Budget b;
    b.max_calls = *budget;
    std::string text;
    for (int i = 0; i < *count; ++i) {
      RngStream rng = KeyChain(*seed).with(rng_tag::kEval).with(static_cast<std::uint64_t>(i))
                          .stream();
      const ExecOutcome o = generate(SourceRef{&f.weights}, f.model, b, rng);
      if (o.status == ExecStatus::Returned) {
        text += o.printed;
      } else {
        text += "<no-termination>";
      }
      text += '\n';
    }
    emit(text, *out);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Connectionist probabilistic program toolkit"};
  app.require_subcommand(1);
  add_generate(app);
  add_train(app);
  add_eval(app);
  add_inspect(app);
  add_oracle(app);
  add_sample(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
