#include "cppso/machine.hpp"

#include <cmath>
#include <stdexcept>

namespace cppso {

void Machine::reset(const ModelStructure& model, const SourceRef& source, SymbolId q,
                    SymbolId i, Budget budget) {
  if (budget.max_calls < 1) throw std::invalid_argument("budget needs at least one call");
  model_ = &model;
  weights_ = nullptr;
  base_ = nullptr;
  prior_ = nullptr;
  urn_ = true;
  if (const auto* w = std::get_if<const WeightTables*>(&source)) {
    weights_ = *w;
  } else {
    const auto& c = std::get<CollapsedRef>(source);
    base_ = c.base;
    prior_ = c.prior;
    urn_ = c.urn;
  }
  replay_ = nullptr;
  external_ = false;
  budget_ = budget;
  calls_left_ = budget.max_calls;
  tree_.clear();
  stack_.clear();
  draws_.clear();
  printed_.clear();
  finished_ = false;
  has_pending_ = false;
  has_fed_ = false;
  push_node(q, i, -1, 0);
}

bool Machine::push_node(SymbolId symbol, SymbolId input, std::int32_t parent, int slot) {
  if (calls_left_ <= 0) return false;
  --calls_left_;
  auto idx = static_cast<std::int32_t>(tree_.nodes.size());
  TreeNode n;
  n.symbol = symbol;
  n.input = input;
  tree_.nodes.push_back(n);
  if (parent >= 0) tree_.nodes[static_cast<size_t>(parent)].child[static_cast<size_t>(slot)] = idx;
  stack_.push_back(Frame{idx, 0});
  return true;
}

void Machine::record(DrawKind kind, std::int16_t q, std::int16_t a, std::int16_t b) {
  draws_.push_back(DrawRec{kind, q, a, b});
}

int Machine::delta_count(DrawKind kind, SymbolId q, SymbolId row, std::int32_t cell) const {
  int hits = 0;
  for (const DrawRec& d : draws_) {
    if (d.kind != kind || d.q != q) continue;
    switch (kind) {
      case DrawKind::Cn:
        if (d.a == cell) ++hits;
        break;
      case DrawKind::Fn:
        if (d.a == row && d.b == cell) ++hits;
        break;
      case DrawKind::Cm:
        if (d.a * model_->num_symbols + d.b == cell) ++hits;
        break;
    }
  }
  return hits;
}

int Machine::delta_total(DrawKind kind, SymbolId q, SymbolId row) const {
  int hits = 0;
  for (const DrawRec& d : draws_) {
    if (d.kind == kind && d.q == q && (kind != DrawKind::Fn || d.a == row)) ++hits;
  }
  return hits;
}

namespace {

// Walks a dense probability row; returns -1 when the row has no mass.
int draw_dense(const double* w, int n, double u) {
  double sum = 0.0;
  for (int c = 0; c < n; ++c) sum += w[c];
  if (sum <= 0.0) return -1;
  u *= sum;
  for (int c = 0; c < n; ++c) {
    if (w[c] > 0.0) {
      if (u < w[c]) return c;
      u -= w[c];
    }
  }
  for (int c = n - 1; c >= 0; --c) {
    if (w[c] > 0.0) return c;
  }
  return -1;
}

}  // namespace

int Machine::draw_collapsed(const PriorBlock& pb, const CountBlock& cb, DrawKind kind,
                            SymbolId q, SymbolId row, RngStream& rng) {
  const int dt = urn_ ? delta_total(kind, q, row) : 0;
  const double total = pb.total + cb.total() + dt;
  double u = rng.next_double() * total;

  // Segment 1: the prior concentrations.
  if (pb.additive) {
    const double unif = pb.base * pb.n_cells;
    if (u < unif) {
      int c = static_cast<int>(u / pb.base);
      return c < pb.n_cells ? c : pb.n_cells - 1;
    }
    u -= unif;
    for (const auto& [c, v] : pb.overrides) {
      const double extra = v - pb.base;
      if (u < extra) return c;
      u -= extra;
    }
  } else {
    if (u < pb.total) {
      for (int c = 0; c < pb.n_cells; ++c) {
        const double v = pb.cell(c);
        if (u < v) return c;
        u -= v;
      }
      return pb.n_cells - 1;
    }
    u -= pb.total;
  }

  // Segment 2: the base counts, walked over occupied cells only.
  if (u < static_cast<double>(cb.total())) {
    for (std::int32_t c : cb.nonzero_cells()) {
      const double w = cb.count(c);
      if (u < w) return c;
      u -= w;
    }
    if (!cb.nonzero_cells().empty()) return cb.nonzero_cells().back();
  } else {
    u -= static_cast<double>(cb.total());
  }

  // Segment 3: this execution's own earlier draws (urn updating), unit mass
  // each.
  if (dt > 0) {
    int idx = static_cast<int>(u);
    int last = -1;
    for (const DrawRec& d : draws_) {
      if (d.kind != kind || d.q != q || (kind == DrawKind::Fn && d.a != row)) continue;
      int cell;
      switch (kind) {
        case DrawKind::Cn:
          cell = d.a;
          break;
        case DrawKind::Fn:
          cell = d.b;
          break;
        default:
          cell = d.a * model_->num_symbols + d.b;
          break;
      }
      if (idx == 0) return cell;
      --idx;
      last = cell;
    }
    if (last >= 0) return last;
  }
  // Numerical slack can spill past the final segment; fall back to the prior.
  return pb.additive ? 0 : pb.n_cells - 1;
}

bool Machine::draw_cn(SymbolId q, RngStream& rng, SymbolId& out) {
  if (weights_) {
    const auto& v = weights_->cn.at(q);
    int c = draw_dense(v.data(), static_cast<int>(v.size()), rng.next_double());
    if (c < 0) return false;
    out = c;
    return true;
  }
  out = draw_collapsed(prior_->cn[static_cast<size_t>(q)], base_->cn[static_cast<size_t>(q)],
                       DrawKind::Cn, q, 0, rng);
  return true;
}

bool Machine::draw_fn(SymbolId q, SymbolId input, RngStream& rng, SymbolId& out) {
  if (weights_) {
    const auto& m = weights_->fn.at(q);
    Eigen::VectorXd row = m.row(input);
    int c = draw_dense(row.data(), static_cast<int>(row.size()), rng.next_double());
    if (c < 0) return false;
    out = c;
    return true;
  }
  out = draw_collapsed(prior_->fn[static_cast<size_t>(q)][static_cast<size_t>(input)],
                       base_->fn[static_cast<size_t>(q)][static_cast<size_t>(input)],
                       DrawKind::Fn, q, input, rng);
  return true;
}

bool Machine::draw_cm(SymbolId q, RngStream& rng, SymbolId& f, SymbolId& g) {
  const int n = model_->num_symbols;
  int cell;
  if (weights_) {
    const auto& m = weights_->cm.at(q);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> flat = m;
    cell = draw_dense(flat.data(), n * n, rng.next_double());
    if (cell < 0) return false;
  } else {
    cell = draw_collapsed(prior_->cm[static_cast<size_t>(q)], base_->cm[static_cast<size_t>(q)],
                          DrawKind::Cm, q, 0, rng);
  }
  f = cell / n;
  g = cell % n;
  return true;
}

bool Machine::next_value(const PendingDraw& ctx, std::int32_t node_idx, RngStream* rng,
                         std::int32_t& value, RunEvent& fail) {
  if (has_fed_) {
    value = fed_value_;
    has_fed_ = false;
    return true;
  }
  if (replay_) {
    if (static_cast<size_t>(node_idx) >= replay_->nodes.size())
      throw std::logic_error("replay reference exhausted");
    const TreeNode& ref = replay_->nodes[static_cast<size_t>(node_idx)];
    value = ctx.kind == DrawKind::Cm ? ref.f * model_->num_symbols + ref.g : ref.output;
    return true;
  }
  if (external_) {
    pending_ = ctx;
    has_pending_ = true;
    fail = RunEvent::NeedDraw;
    return false;
  }
  if (!rng) throw std::logic_error("internal draws need an rng stream");
  bool ok;
  SymbolId a = kNoSymbol, b = kNoSymbol;
  switch (ctx.kind) {
    case DrawKind::Cn:
      ok = draw_cn(ctx.q, *rng, a);
      value = a;
      break;
    case DrawKind::Fn:
      ok = draw_fn(ctx.q, ctx.row, *rng, a);
      value = a;
      break;
    case DrawKind::Cm:
      ok = draw_cm(ctx.q, *rng, a, b);
      value = a * model_->num_symbols + b;
      break;
  }
  if (!ok) {
    fail = RunEvent::DeadEnd;
    return false;
  }
  return true;
}

void Machine::feed(std::int32_t value) {
  if (!has_pending_) throw std::logic_error("no pending draw to feed");
  fed_value_ = value;
  has_fed_ = true;
  has_pending_ = false;
}

RunEvent Machine::run(RngStream* rng) {
  if (finished_) return RunEvent::Finished;
  while (!stack_.empty()) {
    const std::int32_t node_idx = stack_.back().node;
    const int stage = stack_.back().stage;
    const SymbolId sym = tree_.nodes[static_cast<size_t>(node_idx)].symbol;
    const SymbolType t = model_->type(sym);

    switch (t) {
      case SymbolType::Ob: {
        TreeNode& n = tree_.nodes[static_cast<size_t>(node_idx)];
        n.output = n.input;
        printed_.push_back(model_->label_of[static_cast<size_t>(sym)]);
        stack_.pop_back();
        if (static_cast<int>(printed_.size()) > budget_.max_prints)
          return RunEvent::BudgetExceeded;
        if (stack_.empty()) finished_ = true;
        return finished_ ? RunEvent::Finished : RunEvent::Printed;
      }
      case SymbolType::Id: {
        TreeNode& n = tree_.nodes[static_cast<size_t>(node_idx)];
        n.output = n.input;
        stack_.pop_back();
        break;
      }
      case SymbolType::Cn: {
        std::int32_t value;
        RunEvent fail;
        if (!next_value(PendingDraw{DrawKind::Cn, sym, kNoSymbol}, node_idx, rng, value, fail))
          return fail;
        record(DrawKind::Cn, static_cast<std::int16_t>(sym),
               static_cast<std::int16_t>(value), 0);
        tree_.nodes[static_cast<size_t>(node_idx)].output = value;
        stack_.pop_back();
        break;
      }
      case SymbolType::Fn: {
        const SymbolId input = tree_.nodes[static_cast<size_t>(node_idx)].input;
        std::int32_t value;
        RunEvent fail;
        if (!next_value(PendingDraw{DrawKind::Fn, sym, input}, node_idx, rng, value, fail))
          return fail;
        record(DrawKind::Fn, static_cast<std::int16_t>(sym),
               static_cast<std::int16_t>(input), static_cast<std::int16_t>(value));
        tree_.nodes[static_cast<size_t>(node_idx)].output = value;
        stack_.pop_back();
        break;
      }
      default: {  // combinators
        switch (stage) {
          case 0: {
            std::int32_t value;
            RunEvent fail;
            if (!next_value(PendingDraw{DrawKind::Cm, sym, kNoSymbol}, node_idx, rng, value, fail))
              return fail;
            const SymbolId f = value / model_->num_symbols;
            const SymbolId g = value % model_->num_symbols;
            record(DrawKind::Cm, static_cast<std::int16_t>(sym),
                   static_cast<std::int16_t>(f), static_cast<std::int16_t>(g));
            tree_.nodes[static_cast<size_t>(node_idx)].f = f;
            tree_.nodes[static_cast<size_t>(node_idx)].g = g;
            stack_.back().stage = 1;
            if (!push_node(f, tree_.nodes[static_cast<size_t>(node_idx)].input, node_idx, 0))
              return RunEvent::BudgetExceeded;
            break;
          }
          case 1: {
            const TreeNode& n = tree_.nodes[static_cast<size_t>(node_idx)];
            const SymbolId k = tree_.nodes[static_cast<size_t>(n.child[0])].output;
            const SymbolId second_input = is_sequential(t) ? k : n.input;
            const SymbolId g = n.g;
            stack_.back().stage = 2;
            if (!push_node(g, second_input, node_idx, 1))
              return RunEvent::BudgetExceeded;
            break;
          }
          case 2: {
            const TreeNode& n = tree_.nodes[static_cast<size_t>(node_idx)];
            const SymbolId k = tree_.nodes[static_cast<size_t>(n.child[0])].output;
            const SymbolId l = tree_.nodes[static_cast<size_t>(n.child[1])].output;
            switch (combinator_return(t)) {
              case CombinatorReturn::First:
                tree_.nodes[static_cast<size_t>(node_idx)].output = k;
                stack_.pop_back();
                break;
              case CombinatorReturn::Second:
                tree_.nodes[static_cast<size_t>(node_idx)].output = l;
                stack_.pop_back();
                break;
              case CombinatorReturn::Apply12:
                stack_.back().stage = 3;
                if (!push_node(k, l, node_idx, 2)) return RunEvent::BudgetExceeded;
                break;
              case CombinatorReturn::Apply21:
                stack_.back().stage = 3;
                if (!push_node(l, k, node_idx, 2)) return RunEvent::BudgetExceeded;
                break;
            }
            break;
          }
          default: {
            const TreeNode& n = tree_.nodes[static_cast<size_t>(node_idx)];
            tree_.nodes[static_cast<size_t>(node_idx)].output =
                tree_.nodes[static_cast<size_t>(n.child[2])].output;
            stack_.pop_back();
            break;
          }
        }
        break;
      }
    }
  }
  finished_ = true;
  return RunEvent::Finished;
}

void Machine::pending_distribution(std::vector<std::pair<std::int32_t, double>>& out) const {
  out.clear();
  if (!has_pending_) throw std::logic_error("no pending draw");
  const int n = model_->num_symbols;
  const PendingDraw& p = pending_;

  if (weights_) {
    auto emit_dense = [&](const double* w, int cells) {
      double sum = 0.0;
      for (int c = 0; c < cells; ++c) sum += w[c];
      if (sum <= 0.0) return;
      for (int c = 0; c < cells; ++c) {
        if (w[c] > 0.0) out.emplace_back(c, w[c] / sum);
      }
    };
    switch (p.kind) {
      case DrawKind::Cn:
        emit_dense(weights_->cn.at(p.q).data(), n);
        break;
      case DrawKind::Fn: {
        Eigen::VectorXd row = weights_->fn.at(p.q).row(p.row);
        emit_dense(row.data(), n);
        break;
      }
      case DrawKind::Cm: {
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> flat =
            weights_->cm.at(p.q);
        emit_dense(flat.data(), n * n);
        break;
      }
    }
    return;
  }

  const PriorBlock* pb;
  const CountBlock* cb;
  SymbolId row = 0;
  switch (p.kind) {
    case DrawKind::Cn:
      pb = &prior_->cn[static_cast<size_t>(p.q)];
      cb = &base_->cn[static_cast<size_t>(p.q)];
      break;
    case DrawKind::Fn:
      pb = &prior_->fn[static_cast<size_t>(p.q)][static_cast<size_t>(p.row)];
      cb = &base_->fn[static_cast<size_t>(p.q)][static_cast<size_t>(p.row)];
      row = p.row;
      break;
    default:
      pb = &prior_->cm[static_cast<size_t>(p.q)];
      cb = &base_->cm[static_cast<size_t>(p.q)];
      break;
  }
  const int dt = urn_ ? delta_total(p.kind, p.q, row) : 0;
  const double total = pb->total + cb->total() + dt;
  for (int c = 0; c < pb->n_cells; ++c) {
    double mass = pb->cell(c) + cb->count(c);
    if (urn_ && dt > 0) mass += delta_count(p.kind, p.q, row, c);
    if (mass > 0.0) out.emplace_back(c, mass / total);
  }
}

}  // namespace cppso
