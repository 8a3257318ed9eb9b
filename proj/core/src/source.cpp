#include "cppso/source.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cppso {

namespace {

PriorBlock compile_block(const double* vals, int n) {
  PriorBlock b;
  b.n_cells = n;
  // The base is the modal value, so typical priors (uniform plus a few raised
  // cells) compile to a handful of overrides.
  std::vector<double> sorted(vals, vals + n);
  std::sort(sorted.begin(), sorted.end());
  double best = sorted[0];
  int best_run = 1, run = 1;
  for (int i = 1; i < n; ++i) {
    run = (sorted[static_cast<size_t>(i)] == sorted[static_cast<size_t>(i) - 1]) ? run + 1 : 1;
    if (run > best_run) {
      best_run = run;
      best = sorted[static_cast<size_t>(i)];
    }
  }
  b.base = best;
  b.total = 0.0;
  for (int c = 0; c < n; ++c) {
    b.total += vals[c];
    if (vals[c] != best) {
      b.overrides.emplace_back(c, vals[c]);
      if (vals[c] < best) b.additive = false;
    }
  }
  return b;
}

}  // namespace

PredictivePrior PredictivePrior::compile(const ModelStructure& model,
                                         const PriorSpec& spec) {
  const int n = model.num_symbols;
  PredictivePrior p;
  p.num_symbols = n;
  p.cn.resize(static_cast<size_t>(n));
  p.fn.resize(static_cast<size_t>(n));
  p.cm.resize(static_cast<size_t>(n));
  for (const auto& [q, v] : spec.cn) {
    if (v.size() != n) throw std::invalid_argument("prior table shape mismatch");
    p.cn[static_cast<size_t>(q)] = compile_block(v.data(), n);
  }
  for (const auto& [q, w] : spec.fn) {
    if (w.rows() != n || w.cols() != n)
      throw std::invalid_argument("prior table shape mismatch");
    auto& rows = p.fn[static_cast<size_t>(q)];
    rows.resize(static_cast<size_t>(n));
    Eigen::VectorXd row(n);
    for (int i = 0; i < n; ++i) {
      row = w.row(i);
      rows[static_cast<size_t>(i)] = compile_block(row.data(), n);
    }
  }
  for (const auto& [q, w] : spec.cm) {
    if (w.rows() != n || w.cols() != n)
      throw std::invalid_argument("prior table shape mismatch");
    // Flattened as f * n + g: row-major over (f, g).
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> flat = w;
    p.cm[static_cast<size_t>(q)] = compile_block(flat.data(), n * n);
  }
  return p;
}

Eigen::VectorXd predictive_cn(const CountTables& counts, const PredictivePrior& prior,
                              SymbolId q) {
  const auto& pb = prior.cn[static_cast<size_t>(q)];
  const auto& cb = counts.cn[static_cast<size_t>(q)];
  const int n = pb.n_cells;
  Eigen::VectorXd out(n);
  for (int c = 0; c < n; ++c) out[c] = pb.cell(c) + cb.count(c);
  out /= pb.total + cb.total();
  return out;
}

Eigen::VectorXd predictive_fn_row(const CountTables& counts, const PredictivePrior& prior,
                                  SymbolId q, SymbolId input) {
  const auto& pb = prior.fn[static_cast<size_t>(q)][static_cast<size_t>(input)];
  const auto& cb = counts.fn[static_cast<size_t>(q)][static_cast<size_t>(input)];
  const int n = pb.n_cells;
  Eigen::VectorXd out(n);
  for (int c = 0; c < n; ++c) out[c] = pb.cell(c) + cb.count(c);
  out /= pb.total + cb.total();
  return out;
}

Eigen::MatrixXd predictive_cm(const CountTables& counts, const PredictivePrior& prior,
                              SymbolId q) {
  const auto& pb = prior.cm[static_cast<size_t>(q)];
  const auto& cb = counts.cm[static_cast<size_t>(q)];
  const int n = prior.num_symbols;
  Eigen::MatrixXd out(n, n);
  for (int f = 0; f < n; ++f)
    for (int g = 0; g < n; ++g) out(f, g) = pb.cell(f * n + g) + cb.count(f * n + g);
  out /= pb.total + cb.total();
  return out;
}

WeightTables posterior_mean_weights(const ModelStructure& model,
                                    const CountTables& counts,
                                    const PredictivePrior& prior) {
  WeightTables w;
  for (SymbolId q = 0; q < model.num_symbols; ++q) {
    switch (model.type(q)) {
      case SymbolType::Cn:
        w.cn[q] = predictive_cn(counts, prior, q);
        break;
      case SymbolType::Fn: {
        Eigen::MatrixXd m(model.num_symbols, model.num_symbols);
        for (SymbolId i = 0; i < model.num_symbols; ++i)
          m.row(i) = predictive_fn_row(counts, prior, q, i);
        w.fn[q] = m;
        break;
      }
      default:
        if (is_combinator(model.type(q))) w.cm[q] = predictive_cm(counts, prior, q);
        break;
    }
  }
  return w;
}

double trace_log_prob(const ModelStructure& model, const CountTables& base,
                      const PredictivePrior& prior, const ParseTree& tree, bool urn) {
  std::vector<DrawRec> delta;
  auto delta_stats = [&](DrawKind kind, std::int16_t q, std::int16_t row,
                         std::int16_t va, std::int16_t vb, int& cell_hits,
                         int& ctx_hits) {
    cell_hits = ctx_hits = 0;
    for (const DrawRec& d : delta) {
      if (d.kind != kind || d.q != q) continue;
      if (kind == DrawKind::Fn && d.a != row) continue;
      ++ctx_hits;
      if (kind == DrawKind::Cn && d.a == va) ++cell_hits;
      if (kind == DrawKind::Fn && d.b == vb) ++cell_hits;
      if (kind == DrawKind::Cm && d.a == va && d.b == vb) ++cell_hits;
    }
  };

  double log_p = 0.0;
  const int n = model.num_symbols;
  for (const TreeNode& node : tree.nodes) {
    const SymbolType t = model.type(node.symbol);
    DrawKind kind;
    double a_cell, a_total;
    int base_cell, base_total;
    std::int16_t q = static_cast<std::int16_t>(node.symbol);
    std::int16_t ra = 0, rb = 0;
    if (t == SymbolType::Cn) {
      kind = DrawKind::Cn;
      ra = static_cast<std::int16_t>(node.output);
      const auto& pb = prior.cn[static_cast<size_t>(node.symbol)];
      const auto& cb = base.cn[static_cast<size_t>(node.symbol)];
      a_cell = pb.cell(node.output);
      a_total = pb.total;
      base_cell = cb.count(node.output);
      base_total = cb.total();
    } else if (t == SymbolType::Fn) {
      kind = DrawKind::Fn;
      ra = static_cast<std::int16_t>(node.input);
      rb = static_cast<std::int16_t>(node.output);
      const auto& pb = prior.fn[static_cast<size_t>(node.symbol)][static_cast<size_t>(node.input)];
      const auto& cb = base.fn[static_cast<size_t>(node.symbol)][static_cast<size_t>(node.input)];
      a_cell = pb.cell(node.output);
      a_total = pb.total;
      base_cell = cb.count(node.output);
      base_total = cb.total();
    } else if (is_combinator(t)) {
      kind = DrawKind::Cm;
      ra = static_cast<std::int16_t>(node.f);
      rb = static_cast<std::int16_t>(node.g);
      const auto& pb = prior.cm[static_cast<size_t>(node.symbol)];
      const auto& cb = base.cm[static_cast<size_t>(node.symbol)];
      a_cell = pb.cell(node.f * n + node.g);
      a_total = pb.total;
      base_cell = cb.count(node.f * n + node.g);
      base_total = cb.total();
    } else {
      continue;  // Id / Ob nodes make no draw
    }
    int cell_hits = 0, ctx_hits = 0;
    if (urn) {
      std::int16_t row = (kind == DrawKind::Fn) ? ra : 0;
      delta_stats(kind, q, row, ra, rb, cell_hits, ctx_hits);
    }
    log_p += std::log((a_cell + base_cell + cell_hits) /
                      (a_total + base_total + ctx_hits));
    if (urn) delta.push_back(DrawRec{kind, q, ra, rb});
  }
  return log_p;
}

}  // namespace cppso
