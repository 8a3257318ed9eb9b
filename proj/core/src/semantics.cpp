#include "cppso/semantics.hpp"

#include <cmath>
#include <stdexcept>

#include "cppso/machine.hpp"
#include "cppso/sampler.hpp"

namespace cppso {

namespace {

// sum_g W[f,g] M_g, then sum_f M_f (that), shared by every S2 symbol.
Eigen::MatrixXd s2_update(const SemanticsTable& table, const Eigen::MatrixXd& w, int n) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd inner(n, n);
  for (int f = 0; f < n; ++f) {
    inner.setZero();
    bool any = false;
    for (int g = 0; g < n; ++g) {
      if (w(f, g) != 0.0) {
        inner += w(f, g) * table.table[static_cast<size_t>(g)];
        any = true;
      }
    }
    if (any) out += table.table[static_cast<size_t>(f)] * inner;
  }
  return out;
}

// out(i,j) = sum_{f,g,k,l} W(f,g) M_f(i,k) M_g(i,l) M_l(k,j), computed row by
// row: with A_i(y,c) = M_y(i,c), P_i = A_i^T W A_i gives the joint weight on
// (k, l), and row i of the result is sum_l P_i(:,l)^T M_l.
Eigen::MatrixXd p21_update(const SemanticsTable& table, const Eigen::MatrixXd& w, int n) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd a(n, n), p(n, n);
  for (int i = 0; i < n; ++i) {
    for (int y = 0; y < n; ++y) a.row(y) = table.table[static_cast<size_t>(y)].row(i);
    p.noalias() = a.transpose() * w * a;
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    for (int l = 0; l < n; ++l) {
      if (p.col(l).isZero(0.0)) continue;
      row.noalias() += p.col(l).transpose() * table.table[static_cast<size_t>(l)];
    }
    out.row(i) = row;
  }
  return out;
}

}  // namespace

Eigen::MatrixXd compose_step(const SemanticsTable& table, const ModelStructure& model,
                             const WeightTables& weights, SymbolId q) {
  const int n = model.num_symbols;
  switch (model.type(q)) {
    case SymbolType::S2:
      return s2_update(table, weights.cm.at(q), n);
    case SymbolType::P21:
      return p21_update(table, weights.cm.at(q), n);
    default:
      throw std::invalid_argument("compose_step wants an S2 or P21 symbol");
  }
}

SemanticsTable evaluate_semantics(const ModelStructure& model,
                                  const WeightTables& weights, SemanticsOptions opts) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  for (SymbolId q = 0; q < model.num_symbols; ++q) {
    if (!is_plain_cpp_type(model.type(q)))
      throw std::invalid_argument("exact semantics covers only Id/Cn/Fn/S2/P21 models");
  }
  if (auto bad = validate_weights(model, weights))
    throw std::invalid_argument("invalid weights: " + bad->message);

  const int n = model.num_symbols;
  SemanticsTable t;
  t.table.assign(static_cast<size_t>(n), Eigen::MatrixXd::Zero(n, n));

  // Primitive symbols are fixed points from the first round.
  for (SymbolId q = 0; q < n; ++q) {
    switch (model.type(q)) {
      case SymbolType::Id:
        t.table[static_cast<size_t>(q)] = Eigen::MatrixXd::Identity(n, n);
        break;
      case SymbolType::Cn:
        t.table[static_cast<size_t>(q)] = weights.cn.at(q).transpose().replicate(n, 1);
        break;
      case SymbolType::Fn:
        t.table[static_cast<size_t>(q)] = weights.fn.at(q);
        break;
      default:
        break;
    }
  }

  for (t.iterations = 1; t.iterations <= opts.max_iter; ++t.iterations) {
    double residual = 0.0;
    for (SymbolId q = 0; q < n; ++q) {
      if (!is_combinator(model.type(q))) continue;
      Eigen::MatrixXd next = compose_step(t, model, weights, q);
      residual = std::max(residual,
                          (next - t.table[static_cast<size_t>(q)]).cwiseAbs().maxCoeff());
      t.table[static_cast<size_t>(q)] = std::move(next);
    }
    t.max_residual = residual;
    if (residual < opts.tol) {
      t.converged = true;
      break;
    }
  }
  return t;
}

OracleResult observation_oracle(const ModelStructure& model, const SourceRef& source,
                                std::string_view x, OracleOptions opts) {
  for (char c : x) {
    if (model.ob_symbol(c) == kNoSymbol)
      throw std::invalid_argument("observation contains a letter outside the alphabet");
  }

  OracleResult result;
  result.max_calls = opts.max_calls;

  struct Branch {
    Machine m;
    double mass;
  };
  std::vector<Branch> work;
  {
    Branch root;
    Budget budget;
    budget.max_calls = opts.max_calls;
    root.m.reset(model, source, model.q0, model.q1, budget);
    root.m.set_external(true);
    root.mass = 1.0;
    work.push_back(std::move(root));
  }

  std::vector<std::pair<std::int32_t, double>> dist;
  while (!work.empty()) {
    Branch b = std::move(work.back());
    work.pop_back();
    for (bool alive = true; alive;) {
      switch (b.m.run()) {
        case RunEvent::Printed: {
          const std::string& p = b.m.printed();
          if (p.size() > x.size() || p.back() != x[p.size() - 1]) alive = false;
          break;
        }
        case RunEvent::Finished:
          if (b.m.printed() == x) {
            result.matched_mass += b.mass;
            if (opts.collect_trees)
              result.trees.push_back(WeightedTree{b.m.tree(), b.mass});
          }
          alive = false;
          break;
        case RunEvent::BudgetExceeded:
          result.truncated_mass += b.mass;
          alive = false;
          break;
        case RunEvent::DeadEnd:
          alive = false;
          break;
        case RunEvent::NeedDraw: {
          b.m.pending_distribution(dist);
          if (dist.empty()) {
            alive = false;
            break;
          }
          for (size_t vi = 0; vi + 1 < dist.size(); ++vi) {
            const double mass = b.mass * dist[vi].second;
            if (mass < opts.mass_floor) {
              result.truncated_mass += mass;
              continue;
            }
            Branch child{b.m, mass};
            child.m.feed(dist[vi].first);
            work.push_back(std::move(child));
          }
          const double mass = b.mass * dist.back().second;
          if (mass < opts.mass_floor) {
            result.truncated_mass += mass;
            alive = false;
            break;
          }
          b.mass = mass;
          b.m.feed(dist.back().first);
          break;
        }
      }
    }
  }
  return result;
}

SamplerCheckReport semantics_vs_sampler_check(const ModelStructure& model,
                                              const WeightTables& weights, SymbolId q,
                                              SymbolId i, int n_samples,
                                              std::uint64_t seed) {
  SemanticsTable exact = evaluate_semantics(model, weights);
  const Eigen::MatrixXd& mq = exact.table[static_cast<size_t>(q)];
  const int n = model.num_symbols;

  std::vector<std::int64_t> hits(static_cast<size_t>(n), 0);
  std::int64_t nonterm = 0;
  RngStream rng = KeyChain(seed).with(static_cast<std::uint64_t>(q)).with(static_cast<std::uint64_t>(i)).stream();
  SourceRef source{&weights};
  for (int s = 0; s < n_samples; ++s) {
    ExecOutcome out = sample(source, model, q, i, Budget{}, rng);
    if (out.status == ExecStatus::Returned)
      ++hits[static_cast<size_t>(out.output)];
    else
      ++nonterm;
  }

  SamplerCheckReport report;
  report.n_samples = n_samples;
  auto check = [&](SymbolId j, double expected, double observed) {
    expected = std::min(1.0, std::max(0.0, expected));
    const double se = std::sqrt(expected * (1.0 - expected) / n_samples);
    const double tol = 4.0 * se;
    if (std::abs(observed - expected) > tol) {
      report.ok = false;
      report.failures.push_back(CellCheck{j, expected, observed, tol});
    }
  };
  for (SymbolId j = 0; j < n; ++j)
    check(j, mq(i, j), static_cast<double>(hits[static_cast<size_t>(j)]) / n_samples);
  check(kNoSymbol, 1.0 - mq.row(i).sum(), static_cast<double>(nonterm) / n_samples);
  return report;
}

}  // namespace cppso
