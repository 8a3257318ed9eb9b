#include "cppso/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace cppso {

namespace {

constexpr std::uint8_t kRunning = 0;
constexpr std::uint8_t kDone = 1;
constexpr std::uint8_t kDead = 2;

// Weight of a particle at its checkpoint: alive iff its output is still a
// prefix of x (Printed) or exactly x (Finished). Only the newest letter needs
// checking on Printed; earlier ones passed at earlier checkpoints.
std::uint8_t classify(const Machine& m, RunEvent ev, const std::string& x) {
  switch (ev) {
    case RunEvent::Printed: {
      const std::string& p = m.printed();
      if (p.size() > x.size() || p.back() != x[p.size() - 1]) return kDead;
      return kRunning;
    }
    case RunEvent::Finished:
      return m.printed() == x ? kDone : kDead;
    case RunEvent::DeadEnd:
    case RunEvent::BudgetExceeded:
      return kDead;
    case RunEvent::NeedDraw:
      break;
  }
  throw std::logic_error("particle paused for an external draw");
}

// Chooses an ancestor slot for every slot. All survivors carry equal weight,
// so multinomial resampling is a uniform pick among them. With a reference
// particle, slot 0 is pinned to itself.
void fill_assignment(FilterScratch& s, int M, bool has_ref, ResamplingScheme scheme,
                     RngStream& rs) {
  const int surv = static_cast<int>(s.survivors.size());
  s.assignment.resize(static_cast<size_t>(M));
  const int start = has_ref ? 1 : 0;
  if (has_ref) s.assignment[0] = 0;
  switch (scheme) {
    case ResamplingScheme::Multinomial:
      for (int i = start; i < M; ++i) {
        s.assignment[static_cast<size_t>(i)] =
            s.survivors[rs.next_below(static_cast<std::uint32_t>(surv))];
      }
      break;
    case ResamplingScheme::Systematic: {
      const int n = M - start;
      const double u = rs.next_double();
      for (int m = 0; m < n; ++m) {
        const double pos = (m + u) / n;
        const int j = std::min(static_cast<int>(pos * surv), surv - 1);
        s.assignment[static_cast<size_t>(start + m)] = s.survivors[static_cast<size_t>(j)];
      }
      break;
    }
    case ResamplingScheme::KeepSurvivors: {
      for (int i : s.survivors) s.assignment[static_cast<size_t>(i)] = i;
      int k = 0;
      for (int i = start; i < M; ++i) {
        if (s.state[static_cast<size_t>(i)] == kDead) {
          s.assignment[static_cast<size_t>(i)] = s.survivors[static_cast<size_t>(k++ % surv)];
        }
      }
      break;
    }
  }
}

// Rebuilds the pool along the assignment. Clones of the replaying reference
// drop replay mode and continue with fresh randomness.
void apply_assignment(FilterScratch& s, int M, bool has_ref) {
  s.next.resize(static_cast<size_t>(M));
  s.state_next.resize(static_cast<size_t>(M));
  for (int i = 0; i < M; ++i) {
    const int a = s.assignment[static_cast<size_t>(i)];
    s.next[static_cast<size_t>(i)] = s.pool[static_cast<size_t>(a)];
    s.state_next[static_cast<size_t>(i)] = s.state[static_cast<size_t>(a)];
    if (has_ref && a == 0 && i != 0) s.next[static_cast<size_t>(i)].set_replay(nullptr);
  }
  std::swap(s.pool, s.next);
  std::swap(s.state, s.state_next);
}

}  // namespace

FilterResult particle_filter(const std::string& x, const ModelStructure& model,
                             const CountTables& base, const PredictivePrior& prior,
                             const PGConfig& cfg, const KeyChain& key,
                             const ParseTree* reference, FilterScratch* scratch) {
  const int M = cfg.particles;
  if (M < 2) throw std::invalid_argument("particle filter needs at least two particles");
  const bool has_ref = reference != nullptr;
  if (has_ref && reference->empty()) {
    throw std::invalid_argument("reference tree is empty");
  }

  FilterScratch local;
  FilterScratch& s = scratch != nullptr ? *scratch : local;
  s.pool.resize(static_cast<size_t>(M));

  const CollapsedRef source{&base, &prior, cfg.urn_within_filter};
  const int attempts_allowed = 1 + std::max(0, cfg.max_restarts);

  for (int attempt = 0; attempt < attempts_allowed; ++attempt) {
    const KeyChain akey = key.with(rng_tag::kFilter).with(static_cast<std::uint64_t>(attempt));
    s.state.assign(static_cast<size_t>(M), kRunning);
    for (int i = 0; i < M; ++i) {
      s.pool[static_cast<size_t>(i)].reset(model, SourceRef{source}, model.q0, model.q1,
                                           cfg.budget);
    }
    if (has_ref) s.pool[0].set_replay(reference);

    double log_z = 0.0;
    bool all_dead = false;
    for (int round = 0;; ++round) {
      for (int i = 0; i < M; ++i) {
        auto& st = s.state[static_cast<size_t>(i)];
        if (st != kRunning) continue;
        RngStream rs = akey.with(rng_tag::kParticle)
                           .with(static_cast<std::uint64_t>(round))
                           .with(static_cast<std::uint64_t>(i))
                           .stream();
        Machine& m = s.pool[static_cast<size_t>(i)];
        st = classify(m, m.run(&rs), x);
      }

      s.survivors.clear();
      bool any_running = false;
      for (int i = 0; i < M; ++i) {
        const auto st = s.state[static_cast<size_t>(i)];
        if (st == kDead) continue;
        s.survivors.push_back(i);
        if (st == kRunning) any_running = true;
      }
      const int surv = static_cast<int>(s.survivors.size());
      log_z += std::log(static_cast<double>(surv) / M);
      if (surv == 0) {
        all_dead = true;
        break;
      }
      if (!any_running) break;
      if (surv < M) {
        RngStream rs =
            akey.with(rng_tag::kResample).with(static_cast<std::uint64_t>(round)).stream();
        fill_assignment(s, M, has_ref, cfg.resampling, rs);
        apply_assignment(s, M, has_ref);
      }
    }

    if (all_dead) {
      // The replayed reference survives every checkpoint by construction.
      if (has_ref) throw std::logic_error("reference particle died in the conditional filter");
      continue;
    }

    RngStream pick = akey.with(rng_tag::kPick).stream();
    const int winner =
        s.survivors[pick.next_below(static_cast<std::uint32_t>(s.survivors.size()))];
    FilterResult r;
    r.tree = s.pool[static_cast<size_t>(winner)].take_tree();
    r.log_z = log_z;
    r.attempts = attempt + 1;
    return r;
  }
  throw std::runtime_error("unparseable datum: \"" + x + "\"");
}

ChainState init_chain(const ModelStructure& model, const PriorSpec& prior,
                      const PGConfig& pg, std::vector<std::string> data,
                      std::uint64_t seed) {
  ChainState chain;
  chain.model = model;
  chain.prior_spec = prior;
  chain.prior = PredictivePrior::compile(model, prior);
  chain.pg = pg;
  chain.data.reserve(data.size());
  for (auto& x : data) chain.data.push_back(DatumSlot{std::move(x), {}});
  chain.counts = CountTables::zeros(model);
  chain.seed = seed;
  return chain;
}

void replace_datum(ChainState& chain, int slot, std::string x) {
  auto& d = chain.data.at(static_cast<size_t>(slot));
  if (!d.tree.empty()) {
    apply_tree(chain.counts, d.tree, -1);
    d.tree.clear();
  }
  d.x = std::move(x);
}

EpochMetrics gibbs_sweep(ChainState& chain) {
  chain.epoch += 1;
  EpochMetrics m;
  m.epoch = chain.epoch;
  m.per_datum_log_z.reserve(chain.data.size());
  double total = 0.0;
  for (size_t slot = 0; slot < chain.data.size(); ++slot) {
    DatumSlot& d = chain.data[slot];
    const ParseTree* ref = nullptr;
    if (!d.tree.empty()) {
      apply_tree(chain.counts, d.tree, -1);
      ref = &d.tree;
    }
    const KeyChain key = KeyChain(chain.seed)
                             .with(rng_tag::kChain)
                             .with(static_cast<std::uint64_t>(chain.epoch))
                             .with(static_cast<std::uint64_t>(slot));
    FilterResult r = particle_filter(d.x, chain.model, chain.counts, chain.prior, chain.pg,
                                     key, ref, &chain.scratch);
    d.tree = std::move(r.tree);
    apply_tree(chain.counts, d.tree, +1);
    m.per_datum_log_z.push_back(r.log_z);
    total += -r.log_z / static_cast<double>(d.x.size());
  }

  m.raw_nll = chain.data.empty() ? 0.0 : total / static_cast<double>(chain.data.size());
  m.smoothed_nll = chain.history.empty()
                       ? m.raw_nll
                       : 0.9 * chain.history.back().smoothed_nll + 0.1 * m.raw_nll;
  chain.history.push_back(m);
  return m;
}

bool counts_consistent(const ChainState& chain) {
  CountTables rebuilt = CountTables::zeros(chain.model);
  for (const DatumSlot& d : chain.data) {
    if (!d.tree.empty()) apply_tree(rebuilt, d.tree, +1);
  }
  return rebuilt == chain.counts;
}

ChainState run_chain(const ModelStructure& model, const PriorSpec& prior,
                     const CurriculumSchedule& schedule, int epochs, const PGConfig& pg,
                     std::uint64_t seed, const EpochCallback& on_epoch) {
  CurriculumRunner runner(schedule, KeyChain(seed));
  ChainState chain = init_chain(model, prior, pg, runner.initial_dataset(), seed);
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    for (const SlotChange& c : runner.changes_for_epoch(epoch)) {
      replace_datum(chain, c.slot, c.x);
    }
    const EpochMetrics m = gibbs_sweep(chain);
    if (!counts_consistent(chain)) {
      throw std::logic_error("count tables diverged from the trees after a sweep");
    }
    if (on_epoch) on_epoch(chain, m);
  }
  return chain;
}

double heldout_log_prob(const std::string& x, const ModelStructure& model,
                        const CountTables& counts, const PredictivePrior& prior,
                        const PGConfig& cfg, const KeyChain& key, int n_runs) {
  if (n_runs < 1) throw std::invalid_argument("held-out evaluation needs at least one run");
  PGConfig one_shot = cfg;
  one_shot.max_restarts = 0;  // a failed parse scores Z = 0, keeping the mean unbiased
  FilterScratch scratch;
  double sum_z = 0.0;
  for (int r = 0; r < n_runs; ++r) {
    try {
      const FilterResult res =
          particle_filter(x, model, counts, prior, one_shot,
                          key.with(rng_tag::kEval).with(static_cast<std::uint64_t>(r)),
                          nullptr, &scratch);
      sum_z += std::exp(res.log_z);
    } catch (const std::runtime_error&) {
    }
  }
  if (sum_z <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(sum_z / n_runs);
}

std::vector<RelationVerdict> relation_check(const ModelStructure& model,
                                            const CountTables& counts,
                                            const PredictivePrior& prior,
                                            const std::map<char, char>& relation) {
  std::vector<RelationVerdict> out;
  for (SymbolId q : model.symbols_of_type(SymbolType::Fn)) {
    RelationVerdict v;
    v.fn_symbol = q;
    v.pass = true;
    for (const auto& [from, to] : relation) {
      const SymbolId i = model.ob_symbol(from);
      const SymbolId j = model.ob_symbol(to);
      if (i == kNoSymbol || j == kNoSymbol) {
        v.pass = false;
        break;
      }
      const Eigen::VectorXd row = predictive_fn_row(counts, prior, q, i);
      bool strict = true;
      for (int c = 0; c < row.size() && strict; ++c) {
        if (c != j && row[c] >= row[j]) strict = false;
      }
      if (!strict) {
        v.pass = false;
        break;
      }
    }
    out.push_back(v);
  }
  return out;
}

bool composition_check(const ModelStructure& model, const CountTables& counts,
                       const PredictivePrior& prior, SymbolId f_node) {
  if (!model.valid_symbol(f_node)) throw std::invalid_argument("composition_check: bad symbol");
  for (SymbolId q = 0; q < model.num_symbols; ++q) {
    if (!is_combinator(model.type(q))) continue;
    const Eigen::MatrixXd cm = predictive_cm(counts, prior, q);
    const double target = cm(f_node, f_node);
    bool strict = true;
    for (int a = 0; a < cm.rows() && strict; ++a) {
      for (int b = 0; b < cm.cols(); ++b) {
        if (a == f_node && b == f_node) continue;
        if (cm(a, b) >= target) {
          strict = false;
          break;
        }
      }
    }
    if (strict) return true;
  }
  return false;
}

std::vector<double> smooth_series(const std::vector<double>& raw, double rate) {
  std::vector<double> out;
  out.reserve(raw.size());
  double s = 0.0;
  for (size_t t = 0; t < raw.size(); ++t) {
    s = t == 0 ? raw[t] : rate * s + (1.0 - rate) * raw[t];
    out.push_back(s);
  }
  return out;
}

}  // namespace cppso
