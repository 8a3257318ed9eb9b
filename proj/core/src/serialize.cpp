#include "cppso/serialize.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cppso {

using nlohmann::json;

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  Eigen::Index i = 0;
  for (const json& x : a) v[i++] = x.get<double>();
  return v;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd mat_from_json(const json& rows) {
  const auto nr = static_cast<Eigen::Index>(rows.size());
  if (nr == 0) return Eigen::MatrixXd(0, 0);
  const auto nc = static_cast<Eigen::Index>(rows.at(0).size());
  Eigen::MatrixXd m(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r) {
    const json& row = rows.at(static_cast<size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != nc)
      throw std::runtime_error("ragged matrix in JSON");
    for (Eigen::Index c = 0; c < nc; ++c) m(r, c) = row.at(static_cast<size_t>(c)).get<double>();
  }
  return m;
}

// PriorSpec and WeightTables share member names and shapes.
template <typename Tables>
json tables_to_json_impl(const Tables& t) {
  json j;
  json cn = json::object();
  for (const auto& [q, v] : t.cn) cn[std::to_string(q)] = vec_to_json(v);
  json fn = json::object();
  for (const auto& [q, m] : t.fn) fn[std::to_string(q)] = mat_to_json(m);
  json cm = json::object();
  for (const auto& [q, m] : t.cm) cm[std::to_string(q)] = mat_to_json(m);
  j["cn"] = std::move(cn);
  j["fn"] = std::move(fn);
  j["cm"] = std::move(cm);
  return j;
}

template <typename Tables>
Tables tables_from_json_impl(const json& j) {
  Tables t;
  for (const auto& [k, v] : j.at("cn").items()) t.cn[std::stoi(k)] = vec_from_json(v);
  for (const auto& [k, v] : j.at("fn").items()) t.fn[std::stoi(k)] = mat_from_json(v);
  for (const auto& [k, v] : j.at("cm").items()) t.cm[std::stoi(k)] = mat_from_json(v);
  return t;
}

json node_to_json(const ParseTree& t, const ModelStructure& m, std::int32_t idx) {
  const TreeNode& n = t.nodes.at(static_cast<size_t>(idx));
  json j;
  j["symbol"] = n.symbol;
  j["type"] = to_string(m.type(n.symbol));
  j["input"] = n.input;
  j["output"] = n.output;
  if (m.type(n.symbol) == SymbolType::Ob)
    j["label"] = std::string(1, m.label_of[static_cast<size_t>(n.symbol)]);
  if (is_combinator(m.type(n.symbol))) {
    j["f"] = n.f;
    j["g"] = n.g;
  }
  json ch = json::array();
  for (std::int32_t c : n.child) {
    if (c >= 0) ch.push_back(node_to_json(t, m, c));
  }
  j["children"] = std::move(ch);
  return j;
}

void node_from_json(const json& j, ParseTree& t, const ModelStructure& m,
                    std::int32_t parent, int slot) {
  const auto idx = static_cast<std::int32_t>(t.nodes.size());
  TreeNode n;
  n.symbol = j.at("symbol").get<SymbolId>();
  if (n.symbol < 0 || n.symbol >= m.num_symbols)
    throw std::runtime_error("tree node symbol out of range");
  if (j.at("type").get<std::string>() != to_string(m.type(n.symbol)))
    throw std::runtime_error("tree node type does not match the model");
  n.input = j.at("input").get<SymbolId>();
  n.output = j.at("output").get<SymbolId>();
  if (j.contains("f")) n.f = j.at("f").get<SymbolId>();
  if (j.contains("g")) n.g = j.at("g").get<SymbolId>();
  t.nodes.push_back(n);
  if (parent >= 0) t.nodes[static_cast<size_t>(parent)].child[static_cast<size_t>(slot)] = idx;
  const json& ch = j.contains("children") ? j.at("children") : json::array();
  if (ch.size() > 3) throw std::runtime_error("tree node with more than three children");
  int s = 0;
  for (const json& c : ch) node_from_json(c, t, m, idx, s++);
  TreeNode& built = t.nodes[static_cast<size_t>(idx)];
  if (is_combinator(m.type(built.symbol))) {
    if (built.f == kNoSymbol && built.child[0] >= 0)
      built.f = t.nodes[static_cast<size_t>(built.child[0])].symbol;
    if (built.g == kNoSymbol && built.child[1] >= 0)
      built.g = t.nodes[static_cast<size_t>(built.child[1])].symbol;
  }
}

const char* scheme_to_string(ResamplingScheme s) {
  switch (s) {
    case ResamplingScheme::Multinomial:
      return "multinomial";
    case ResamplingScheme::Systematic:
      return "systematic";
    case ResamplingScheme::KeepSurvivors:
      return "keep_survivors";
  }
  return "?";
}

ResamplingScheme scheme_from_string(const std::string& s) {
  if (s == "multinomial") return ResamplingScheme::Multinomial;
  if (s == "systematic") return ResamplingScheme::Systematic;
  if (s == "keep_survivors") return ResamplingScheme::KeepSurvivors;
  throw std::runtime_error("unknown resampling scheme: " + s);
}

json pg_to_json_obj(const PGConfig& pg) {
  json j;
  j["particles"] = pg.particles;
  j["max_calls"] = pg.budget.max_calls;
  j["max_prints"] = pg.budget.max_prints;
  j["max_restarts"] = pg.max_restarts;
  j["resampling"] = scheme_to_string(pg.resampling);
  j["urn"] = pg.urn_within_filter;
  return j;
}

PGConfig pg_from_json_obj(const json& j) {
  PGConfig pg;
  pg.particles = j.at("particles").get<int>();
  pg.budget.max_calls = j.at("max_calls").get<int>();
  pg.budget.max_prints = j.value("max_prints", std::numeric_limits<int>::max());
  pg.max_restarts = j.at("max_restarts").get<int>();
  pg.resampling = scheme_from_string(j.value("resampling", "multinomial"));
  pg.urn_within_filter = j.value("urn", true);
  return pg;
}

json model_to_json_obj(const ModelStructure& m) {
  json j;
  j["alphabet"] = m.alphabet;
  json symbols = json::array();
  for (SymbolId q = 0; q < m.num_symbols; ++q) {
    json s;
    s["id"] = q;
    s["name"] = m.name_of[static_cast<size_t>(q)];
    s["type"] = to_string(m.type(q));
    if (m.type(q) == SymbolType::Ob)
      s["label"] = std::string(1, m.label_of[static_cast<size_t>(q)]);
    symbols.push_back(std::move(s));
  }
  j["symbols"] = std::move(symbols);
  j["q0"] = m.q0;
  j["q1"] = m.q1;
  return j;
}

ModelStructure model_from_json_obj(const json& j) {
  ModelStructure m;
  m.alphabet = j.at("alphabet").get<std::string>();
  const json& symbols = j.at("symbols");
  m.num_symbols = static_cast<int>(symbols.size());
  m.type_of.resize(static_cast<size_t>(m.num_symbols));
  m.label_of.assign(static_cast<size_t>(m.num_symbols), '\0');
  m.name_of.resize(static_cast<size_t>(m.num_symbols));
  int at = 0;
  for (const json& s : symbols) {
    if (s.at("id").get<int>() != at)
      throw std::runtime_error("model symbols must be listed in id order");
    const auto t = symbol_type_from_string(s.at("type").get<std::string>());
    m.type_of[static_cast<size_t>(at)] = t;
    m.name_of[static_cast<size_t>(at)] = s.at("name").get<std::string>();
    if (t == SymbolType::Ob) {
      const auto label = s.at("label").get<std::string>();
      if (label.size() != 1) throw std::runtime_error("Ob label must be one letter");
      m.label_of[static_cast<size_t>(at)] = label[0];
    }
    ++at;
  }
  m.q0 = j.at("q0").get<SymbolId>();
  m.q1 = j.at("q1").get<SymbolId>();
  if (!m.valid_symbol(m.q0) || !m.valid_symbol(m.q1))
    throw std::runtime_error("q0/q1 out of range");
  return m;
}

json counts_to_json_obj(const CountTables& counts) {
  json j;
  json cn = json::array();
  for (int q = 0; q < counts.num_symbols; ++q) {
    const CountBlock& b = counts.cn[static_cast<size_t>(q)];
    if (b.cells() == 0) continue;
    auto cells = b.nonzero_cells();
    std::sort(cells.begin(), cells.end());
    for (std::int32_t cell : cells) cn.push_back(json::array({q, cell, b.count(cell)}));
  }
  json fn = json::array();
  for (int q = 0; q < counts.num_symbols; ++q) {
    const auto& rows = counts.fn[static_cast<size_t>(q)];
    for (size_t i = 0; i < rows.size(); ++i) {
      const CountBlock& b = rows[i];
      if (b.cells() == 0) continue;
      auto cells = b.nonzero_cells();
      std::sort(cells.begin(), cells.end());
      for (std::int32_t cell : cells)
        fn.push_back(json::array({q, static_cast<int>(i), cell, b.count(cell)}));
    }
  }
  json cm = json::array();
  for (int q = 0; q < counts.num_symbols; ++q) {
    const CountBlock& b = counts.cm[static_cast<size_t>(q)];
    if (b.cells() == 0) continue;
    auto cells = b.nonzero_cells();
    std::sort(cells.begin(), cells.end());
    for (std::int32_t cell : cells) {
      cm.push_back(json::array(
          {q, cell / counts.num_symbols, cell % counts.num_symbols, b.count(cell)}));
    }
  }
  j["cn"] = std::move(cn);
  j["fn"] = std::move(fn);
  j["cm"] = std::move(cm);
  return j;
}

CountTables counts_from_json_obj(const json& j, const ModelStructure& model) {
  CountTables counts = CountTables::zeros(model);
  for (const json& e : j.at("cn")) {
    const int q = e.at(0).get<int>();
    CountBlock& b = counts.cn.at(static_cast<size_t>(q));
    if (b.cells() == 0) throw std::runtime_error("cn counts on a non-Cn symbol");
    for (int k = 0; k < e.at(2).get<int>(); ++k) b.add(e.at(1).get<int>());
  }
  for (const json& e : j.at("fn")) {
    const int q = e.at(0).get<int>();
    auto& rows = counts.fn.at(static_cast<size_t>(q));
    if (rows.empty()) throw std::runtime_error("fn counts on a non-Fn symbol");
    CountBlock& b = rows.at(static_cast<size_t>(e.at(1).get<int>()));
    for (int k = 0; k < e.at(3).get<int>(); ++k) b.add(e.at(2).get<int>());
  }
  for (const json& e : j.at("cm")) {
    const int q = e.at(0).get<int>();
    CountBlock& b = counts.cm.at(static_cast<size_t>(q));
    if (b.cells() == 0) throw std::runtime_error("cm counts on a non-combinator symbol");
    const int cell = counts.cm_cell(e.at(1).get<int>(), e.at(2).get<int>());
    for (int k = 0; k < e.at(3).get<int>(); ++k) b.add(cell);
  }
  return counts;
}

json parse_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error("malformed JSON");
  return j;
}

}  // namespace

std::string model_to_json(const ModelStructure& model) {
  return model_to_json_obj(model).dump();
}

ModelStructure model_from_json(const std::string& text) {
  return model_from_json_obj(parse_text(text));
}

std::string prior_to_json(const PriorSpec& prior) {
  return tables_to_json_impl(prior).dump();
}

PriorSpec prior_from_json(const std::string& text) {
  return tables_from_json_impl<PriorSpec>(parse_text(text));
}

std::string weights_to_json(const WeightTables& weights) {
  return tables_to_json_impl(weights).dump();
}

WeightTables weights_from_json(const std::string& text) {
  return tables_from_json_impl<WeightTables>(parse_text(text));
}

std::string tree_to_json(const ParseTree& tree, const ModelStructure& model) {
  if (tree.empty()) return "null";
  return node_to_json(tree, model, 0).dump();
}

ParseTree tree_from_json(const std::string& text, const ModelStructure& model) {
  const json j = parse_text(text);
  ParseTree t;
  if (j.is_null()) return t;
  node_from_json(j, t, model, -1, 0);
  return t;
}

std::string counts_to_json(const CountTables& counts) {
  return counts_to_json_obj(counts).dump();
}

CountTables counts_from_json(const std::string& text, const ModelStructure& model) {
  return counts_from_json_obj(parse_text(text), model);
}

std::string semantics_to_json(const SemanticsTable& table, const ModelStructure& model) {
  json j;
  j["converged"] = table.converged;
  j["iterations"] = table.iterations;
  j["max_residual"] = table.max_residual;
  json t = json::object();
  for (SymbolId q = 0; q < model.num_symbols; ++q)
    t[std::to_string(q)] = mat_to_json(table.table[static_cast<size_t>(q)]);
  j["table"] = std::move(t);
  return j.dump();
}

std::string oracle_to_json(const OracleResult& result, const ModelStructure& model) {
  json j;
  j["matched_mass"] = result.matched_mass;
  j["truncated_mass"] = result.truncated_mass;
  j["max_calls"] = result.max_calls;
  json trees = json::array();
  for (const WeightedTree& wt : result.trees) {
    json e;
    e["mass"] = wt.mass;
    e["tree"] = wt.tree.empty() ? json() : node_to_json(wt.tree, model, 0);
    trees.push_back(std::move(e));
  }
  j["trees"] = std::move(trees);
  return j.dump();
}

std::string snapshot_to_json(const ChainState& chain) {
  json j;
  j["version"] = 1;
  j["seed"] = chain.seed;
  j["epoch"] = chain.epoch;
  j["model"] = model_to_json_obj(chain.model);
  j["prior"] = tables_to_json_impl(chain.prior_spec);
  j["pg"] = pg_to_json_obj(chain.pg);
  json data = json::array();
  for (const DatumSlot& d : chain.data) {
    json e;
    e["x"] = d.x;
    e["tree"] = d.tree.empty() ? json() : node_to_json(d.tree, chain.model, 0);
    data.push_back(std::move(e));
  }
  j["data"] = std::move(data);
  j["counts"] = counts_to_json_obj(chain.counts);
  json history = json::array();
  for (const EpochMetrics& m : chain.history) {
    json e;
    e["epoch"] = m.epoch;
    e["raw_nll"] = m.raw_nll;
    e["smoothed_nll"] = m.smoothed_nll;
    e["log_z"] = m.per_datum_log_z;
    history.push_back(std::move(e));
  }
  j["history"] = std::move(history);
  return j.dump();
}

ChainState snapshot_from_json(const std::string& text) {
  const json j = parse_text(text);
  if (j.at("version").get<int>() != 1) throw std::runtime_error("unknown snapshot version");
  ChainState chain;
  chain.seed = j.at("seed").get<std::uint64_t>();
  chain.epoch = j.at("epoch").get<int>();
  chain.model = model_from_json_obj(j.at("model"));
  chain.prior_spec = tables_from_json_impl<PriorSpec>(j.at("prior"));
  chain.prior = PredictivePrior::compile(chain.model, chain.prior_spec);
  chain.pg = pg_from_json_obj(j.at("pg"));
  for (const json& e : j.at("data")) {
    DatumSlot d;
    d.x = e.at("x").get<std::string>();
    if (!e.at("tree").is_null()) node_from_json(e.at("tree"), d.tree, chain.model, -1, 0);
    chain.data.push_back(std::move(d));
  }
  chain.counts = counts_from_json_obj(j.at("counts"), chain.model);
  if (!counts_consistent(chain))
    throw std::runtime_error("snapshot counts do not match its trees");
  for (const json& e : j.at("history")) {
    EpochMetrics m;
    m.epoch = e.at("epoch").get<int>();
    m.raw_nll = e.at("raw_nll").get<double>();
    m.smoothed_nll = e.at("smoothed_nll").get<double>();
    m.per_datum_log_z = e.value("log_z", std::vector<double>{});
    chain.history.push_back(std::move(m));
  }
  return chain;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace cppso
