#include "surropub/bayes_net.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "surropub/rng.hpp"

namespace surropub {

BayesNet::BayesNet(SchemaPtr schema) : schema_(std::move(schema)) {
  if (!schema_) throw Error("BayesNet requires a schema");
}

void BayesNet::add_node(std::size_t variable, std::vector<std::size_t> parents,
                        std::vector<std::vector<double>> cpt) {
  if (variable >= schema_->variable_count()) throw Error("BayesNet: variable out of range");
  for (std::size_t p : parents) {
    if (std::find(order_.begin(), order_.end(), p) == order_.end())
      throw Error("BayesNet: parent '" + schema_->variable(p).name +
                  "' must be added before its child");
  }
  order_.push_back(variable);
  parents_.push_back(std::move(parents));
  cpts_.push_back(std::move(cpt));
}

std::size_t BayesNet::config_count(std::size_t pos) const {
  std::size_t n = 1;
  for (std::size_t p : parents_.at(pos)) n *= schema_->variable(p).cardinality();
  return n;
}

std::size_t BayesNet::config_index(std::size_t pos, const Record& partial) const {
  std::size_t idx = 0;
  for (std::size_t p : parents_.at(pos))
    idx = idx * schema_->variable(p).cardinality() + partial.cells[p];
  return idx;
}

std::vector<std::vector<std::size_t>> BayesNet::parents_by_variable() const {
  std::vector<std::vector<std::size_t>> out(schema_->variable_count());
  for (std::size_t pos = 0; pos < order_.size(); ++pos) out[order_[pos]] = parents_[pos];
  return out;
}

void BayesNet::validate() const {
  if (order_.size() != schema_->variable_count())
    throw Error("BayesNet does not cover every schema variable");
  for (std::size_t pos = 0; pos < order_.size(); ++pos) {
    const std::size_t k = schema_->variable(order_[pos]).cardinality();
    if (cpts_[pos].size() != config_count(pos))
      throw Error("BayesNet: CPT of '" + schema_->variable(order_[pos]).name +
                  "' must have one row per parent configuration");
    for (const auto& row : cpts_[pos]) {
      if (row.size() != k) throw Error("BayesNet: CPT row has wrong width");
      double sum = 0.0;
      for (double w : row) {
        if (w < 0.0) throw Error("BayesNet: negative CPT entry");
        sum += w;
      }
      if (std::fabs(sum - 1.0) > 1e-9) throw Error("BayesNet: CPT row does not sum to 1");
    }
  }
}

std::string BayesNet::serialize() const {
  nlohmann::json doc;
  doc["nodes"] = nlohmann::json::array();
  for (std::size_t pos = 0; pos < order_.size(); ++pos) {
    nlohmann::json node;
    node["variable"] = schema_->variable(order_[pos]).name;
    auto parents = nlohmann::json::array();
    for (std::size_t p : parents_[pos]) parents.push_back(schema_->variable(p).name);
    node["parents"] = std::move(parents);
    node["cpt"] = cpts_[pos];  // rows in mixed-radix parent-config order
    doc["nodes"].push_back(std::move(node));
  }
  return doc.dump(2);
}

BayesNet BayesNet::deserialize(SchemaPtr schema, const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  BayesNet net(schema);
  for (const auto& node : doc.at("nodes")) {
    const std::size_t var = schema->require(node.at("variable").get<std::string>());
    std::vector<std::size_t> parents;
    for (const auto& p : node.at("parents"))
      parents.push_back(schema->require(p.get<std::string>()));
    auto cpt = node.at("cpt").get<std::vector<std::vector<double>>>();
    net.add_node(var, std::move(parents), std::move(cpt));
  }
  net.validate();
  return net;
}

Dataset gen_uniform(SchemaPtr schema, const GenSpec& spec) {
  if (spec.target_m < 1) throw Error("target_m must be at least 1");
  Dataset out(schema, DatasetRole::Surrogate);
  out.reserve(spec.target_m);
  const auto& vars = schema->variables();
  for (std::size_t i = 0; i < spec.target_m; ++i) {
    auto eng = rng::make_engine(spec.seed, i);
    Record rec;
    rec.cells.resize(vars.size());
    for (std::size_t c = 0; c < vars.size(); ++c)
      rec.cells[c] = static_cast<std::uint16_t>(rng::uniform_below(eng, vars[c].cardinality()));
    out.add(std::move(rec));
  }
  return out;
}

namespace {

std::vector<double> rounded_column_distribution(const Dataset& data, std::size_t col) {
  const std::size_t k = data.schema().variable(col).cardinality();
  std::vector<double> freq(k, 0.0);
  for (const auto& rec : data.records()) freq[rec.cells[col]] += 1.0;
  const double n = static_cast<double>(data.size());
  double sum = 0.0;
  for (auto& f : freq) {
    f = std::round(f / n * 100.0) / 100.0;  // half away from zero
    sum += f;
  }
  if (sum <= 0.0)
    throw Error("gen_univariate: every probability of column '" +
                data.schema().variable(col).name + "' rounded to zero");
  for (auto& f : freq) f /= sum;
  return freq;
}

}  // namespace

Dataset gen_univariate(const Dataset& private_data, const GenSpec& spec) {
  if (private_data.empty()) throw Error("gen_univariate requires a non-empty dataset");
  if (spec.target_m < 1) throw Error("target_m must be at least 1");
  const auto schema = private_data.schema_ptr();
  const std::size_t d = schema->variable_count();

  std::vector<std::vector<double>> dist(d);
  for (std::size_t c = 0; c < d; ++c) dist[c] = rounded_column_distribution(private_data, c);

  Dataset out(schema, DatasetRole::Surrogate);
  out.reserve(spec.target_m);
  for (std::size_t i = 0; i < spec.target_m; ++i) {
    auto eng = rng::make_engine(spec.seed, i);
    Record rec;
    rec.cells.resize(d);
    for (std::size_t c = 0; c < d; ++c)
      rec.cells[c] = static_cast<std::uint16_t>(rng::discrete(eng, dist[c]));
    out.add(std::move(rec));
  }
  return out;
}

BayesNet build_random_bn(SchemaPtr schema, std::size_t d_max, double alpha,
                         std::uint64_t seed) {
  if (!(alpha > 0.0)) throw Error("Dirichlet concentration must be positive");
  const std::size_t d = schema->variable_count();
  auto eng = rng::make_engine(seed);

  std::vector<std::size_t> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  rng::shuffle(eng, perm);

  BayesNet net(schema);
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t cap = std::min(d_max, i);
    const std::size_t size = static_cast<std::size_t>(rng::uniform_below(eng, cap + 1));

    // Uniform subset of the earlier nodes with the drawn size.
    std::vector<std::size_t> candidates(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(i));
    rng::shuffle(eng, candidates);
    std::vector<std::size_t> parents(candidates.begin(),
                                     candidates.begin() + static_cast<std::ptrdiff_t>(size));
    std::sort(parents.begin(), parents.end());

    std::size_t configs = 1;
    for (std::size_t p : parents) configs *= schema->variable(p).cardinality();
    const std::size_t k = schema->variable(perm[i]).cardinality();
    std::vector<std::vector<double>> cpt(configs);
    for (auto& row : cpt) row = rng::dirichlet(eng, k, alpha);

    net.add_node(perm[i], std::move(parents), std::move(cpt));
  }
  net.validate();
  return net;
}

Dataset sample_bn(const BayesNet& net, const GenSpec& spec) {
  if (spec.target_m < 1) throw Error("target_m must be at least 1");
  net.validate();
  const auto schema = net.schema_ptr();
  Dataset out(schema, DatasetRole::Surrogate);
  out.reserve(spec.target_m);
  for (std::size_t i = 0; i < spec.target_m; ++i) {
    auto eng = rng::make_engine(spec.seed, i);
    Record rec;
    rec.cells.resize(schema->variable_count());
    for (std::size_t pos = 0; pos < net.node_count(); ++pos) {
      const auto& row = net.cpt_at(pos)[net.config_index(pos, rec)];
      rec.cells[net.variable_at(pos)] =
          static_cast<std::uint16_t>(rng::discrete(eng, row));
    }
    out.add(std::move(rec));
  }
  return out;
}

}  // namespace surropub
