#include "surropub/dp/synthesizer.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace surropub::dp {

void PrivBayesParams::check() const {
  if (!(theta > 0.0)) throw Error("privbayes theta must be positive");
  if (!(epsilon_split > 0.0) || !(epsilon_split < 1.0))
    throw Error("privbayes epsilon_split must be in (0, 1)");
}

std::string PrivBayesParams::id() const {
  std::ostringstream out;
  out << "theta" << theta << "_split" << epsilon_split;
  return out.str();
}

double mutual_info(const Dataset& data, std::size_t variable,
                   std::span<const std::size_t> parents) {
  if (parents.empty()) return 0.0;
  if (data.empty()) throw Error("mutual_info: empty dataset");
  const Schema& schema = data.schema();

  std::size_t configs = 1;
  for (std::size_t p : parents) configs *= schema.variable(p).cardinality();
  const std::size_t kx = schema.variable(variable).cardinality();

  std::vector<double> joint(configs * kx, 0.0), px(kx, 0.0), ppi(configs, 0.0);
  for (const auto& rec : data.records()) {
    std::size_t config = 0;
    for (std::size_t p : parents)
      config = config * schema.variable(p).cardinality() + rec.cells[p];
    joint[config * kx + rec.cells[variable]] += 1.0;
    px[rec.cells[variable]] += 1.0;
    ppi[config] += 1.0;
  }
  const double n = static_cast<double>(data.size());
  double mi = 0.0;
  for (std::size_t c = 0; c < configs; ++c) {
    for (std::size_t x = 0; x < kx; ++x) {
      const double pxy = joint[c * kx + x] / n;
      if (pxy <= 0.0) continue;
      mi += pxy * std::log2(pxy * n * n / (px[x] * ppi[c]));
    }
  }
  return std::max(0.0, mi);
}

double mi_sensitivity_bits(std::size_t n, std::size_t kx, std::size_t kpi) {
  if (n < 2) return 1.0;
  const double nd = static_cast<double>(n);
  if (std::min(kx, kpi) <= 2)
    return std::log2(nd) / nd + (nd - 1.0) / nd * std::log2(nd / (nd - 1.0));
  return 2.0 / nd * std::log2((nd + 1.0) / 2.0) +
         (nd - 1.0) / nd * std::log2((nd + 1.0) / (nd - 1.0));
}

std::size_t exp_mech_select(std::span<const double> scores, double epsilon,
                            double sensitivity, rng::Engine& eng) {
  if (scores.empty()) throw Error("exp_mech_select: no candidates");
  if (!(sensitivity > 0.0)) throw Error("exp_mech_select: sensitivity must be positive");
  const double best = *std::max_element(scores.begin(), scores.end());
  std::vector<double> weights(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    weights[i] = std::exp(epsilon * (scores[i] - best) / (2.0 * sensitivity));
  return rng::discrete(eng, weights);
}

std::string BudgetLedger::serialize() const {
  nlohmann::json doc = {{"epsilon_total", epsilon_total},
                        {"epsilon_structure", epsilon_structure},
                        {"epsilon_params", epsilon_params},
                        {"delta", delta}};
  doc["entries"] = nlohmann::json::array();
  for (const auto& e : entries)
    doc["entries"].push_back({{"label", e.label},
                              {"epsilon_share", e.epsilon_share},
                              {"laplace_scale", e.laplace_scale}});
  return doc.dump(2);
}

namespace {

/// All subsets of `pool` with size <= cap, in deterministic order
/// (size-major, then lexicographic).
std::vector<std::vector<std::size_t>> bounded_subsets(const std::vector<std::size_t>& pool,
                                                      std::size_t cap) {
  std::vector<std::vector<std::size_t>> out;
  out.push_back({});
  for (std::size_t size = 1; size <= std::min(cap, pool.size()); ++size) {
    std::vector<std::size_t> pick(size);
    for (std::size_t i = 0; i < size; ++i) pick[i] = i;
    bool more = true;
    while (more) {
      std::vector<std::size_t> subset(size);
      for (std::size_t i = 0; i < size; ++i) subset[i] = pool[pick[i]];
      out.push_back(std::move(subset));
      more = false;
      std::size_t i = size;
      while (i-- > 0) {
        if (pick[i] + (size - i) < pool.size()) {
          ++pick[i];
          for (std::size_t j = i + 1; j < size; ++j) pick[j] = pick[j - 1] + 1;
          more = true;
          break;
        }
      }
    }
  }
  return out;
}

std::size_t subset_config_count(const Schema& schema, const std::vector<std::size_t>& subset) {
  std::size_t cells = 1;
  for (std::size_t p : subset) cells *= schema.variable(p).cardinality();
  return cells;
}

}  // namespace

std::size_t privbayes_k_max(const Schema& schema, std::size_t n, double epsilon_params,
                            double theta) {
  const std::size_t d = schema.variable_count();
  std::vector<std::size_t> cards;
  cards.reserve(d);
  for (const auto& v : schema.variables()) cards.push_back(v.cardinality());
  std::sort(cards.rbegin(), cards.rend());

  // cells(k): biggest CPT over any node with k parents is the product of the
  // k+1 largest cardinalities.
  const auto cells = [&](std::size_t k) {
    double product = 1.0;
    for (std::size_t i = 0; i <= k && i < cards.size(); ++i)
      product *= static_cast<double>(cards[i]);
    return product;
  };

  // cells(k) grows with k, so the SNR is non-increasing: scan until it drops.
  std::size_t k_max = 0;
  for (std::size_t k = 0; k < d; ++k) {
    const double snr = static_cast<double>(n) * epsilon_params /
                       (2.0 * static_cast<double>(d) * cells(k));
    if (snr < theta) break;
    k_max = k;
  }
  return std::min(k_max, d - 1);
}

PrivBayesModel::PrivBayesModel(BayesNet net, BudgetLedger ledger, std::size_t k_max)
    : net_(std::move(net)), ledger_(std::move(ledger)), k_max_(k_max) {}

Dataset PrivBayesModel::sample(std::size_t m, std::uint64_t seed) const {
  return sample_bn(net_, {m, seed});
}

std::string PrivBayesModel::serialize() const {
  nlohmann::json doc;
  doc["mechanism"] = mechanism();
  doc["k_max"] = k_max_;
  doc["net"] = nlohmann::json::parse(net_.serialize());
  doc["ledger"] = nlohmann::json::parse(ledger_.serialize());
  return doc.dump(2);
}

PrivBayesModel privbayes_fit(const Dataset& data, const PrivacyBudget& budget,
                             const PrivBayesParams& params, std::uint64_t seed) {
  budget.check();
  params.check();
  if (budget.delta != 0.0) throw Error("privbayes_fit requires a pure budget (delta = 0)");
  if (data.empty()) throw Error("privbayes_fit: empty dataset");

  const auto schema = data.schema_ptr();
  const std::size_t d = schema->variable_count();
  const std::size_t n = data.size();

  BudgetLedger ledger;
  ledger.epsilon_total = budget.epsilon;
  ledger.epsilon_structure = params.epsilon_split * budget.epsilon;
  ledger.epsilon_params = budget.epsilon - ledger.epsilon_structure;
  ledger.delta = 0.0;

  const std::size_t k_max =
      privbayes_k_max(*schema, n, ledger.epsilon_params, params.theta);

  auto eng = rng::make_engine(seed, /*stream=*/20);
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  rng::shuffle(eng, order);

  const std::size_t selections = d > 1 ? d - 1 : 1;
  const double eps_per_selection = ledger.epsilon_structure / static_cast<double>(selections);
  const double laplace_scale = 2.0 * static_cast<double>(d) / ledger.epsilon_params;
  const double eps_per_table = ledger.epsilon_params / static_cast<double>(d);

  BayesNet net(schema);
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t var = order[i];
    const std::vector<std::size_t> pool(order.begin(),
                                        order.begin() + static_cast<std::ptrdiff_t>(i));
    std::vector<std::size_t> parents;

    if (i > 0) {
      const auto candidates = bounded_subsets(pool, std::min(k_max, i));
      std::vector<double> scores(candidates.size());
      double sensitivity = 0.0;
      const std::size_t kx = schema->variable(var).cardinality();
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        scores[c] = mutual_info(data, var, candidates[c]);
        sensitivity = std::max(
            sensitivity,
            mi_sensitivity_bits(n, kx, subset_config_count(*schema, candidates[c])));
      }
      const std::size_t pick = exp_mech_select(scores, eps_per_selection, sensitivity, eng);
      parents = candidates[pick];
      std::sort(parents.begin(), parents.end());
      ledger.entries.push_back({"structure:" + schema->variable(var).name,
                                eps_per_selection, 0.0});
    }

    // Noisy CPT: joint counts over (parent config, value), Laplace on every
    // cell, clamp, renormalize; uniform fallback for all-zero rows.
    std::size_t configs = 1;
    for (std::size_t p : parents) configs *= schema->variable(p).cardinality();
    const std::size_t kx = schema->variable(var).cardinality();
    std::vector<std::vector<double>> cpt(configs, std::vector<double>(kx, 0.0));
    for (const auto& rec : data.records()) {
      std::size_t config = 0;
      for (std::size_t p : parents)
        config = config * schema->variable(p).cardinality() + rec.cells[p];
      cpt[config][rec.cells[var]] += 1.0;
    }
    for (auto& row : cpt) {
      double sum = 0.0;
      for (auto& cell : row) {
        cell += rng::laplace(eng, laplace_scale);
        cell = std::max(0.0, cell);
        sum += cell;
      }
      if (sum <= 0.0) {
        for (auto& cell : row) cell = 1.0 / static_cast<double>(kx);
      } else {
        for (auto& cell : row) cell /= sum;
      }
    }
    ledger.entries.push_back({"params:" + schema->variable(var).name, eps_per_table,
                              laplace_scale});
    net.add_node(var, std::move(parents), std::move(cpt));
  }
  net.validate();
  return PrivBayesModel(std::move(net), std::move(ledger), k_max);
}

NoisyMarginalsModel::NoisyMarginalsModel(SchemaPtr schema,
                                         std::vector<std::vector<double>> columns,
                                         BudgetLedger ledger)
    : schema_(std::move(schema)), columns_(std::move(columns)), ledger_(std::move(ledger)) {}

Dataset NoisyMarginalsModel::sample(std::size_t m, std::uint64_t seed) const {
  if (m < 1) throw Error("target_m must be at least 1");
  Dataset out(schema_, DatasetRole::Surrogate);
  out.reserve(m);
  const std::size_t d = schema_->variable_count();
  for (std::size_t i = 0; i < m; ++i) {
    auto eng = rng::make_engine(seed, i);
    Record rec;
    rec.cells.resize(d);
    for (std::size_t c = 0; c < d; ++c)
      rec.cells[c] = static_cast<std::uint16_t>(rng::discrete(eng, columns_[c]));
    out.add(std::move(rec));
  }
  return out;
}

std::string NoisyMarginalsModel::serialize() const {
  nlohmann::json doc;
  doc["mechanism"] = mechanism();
  doc["columns"] = columns_;
  doc["ledger"] = nlohmann::json::parse(ledger_.serialize());
  return doc.dump(2);
}

NoisyMarginalsModel noisy_marginals_fit(const Dataset& data, const PrivacyBudget& budget,
                                        std::uint64_t seed) {
  budget.check();
  if (budget.delta != 0.0)
    throw Error("noisy_marginals_fit requires a pure budget (delta = 0)");
  if (data.empty()) throw Error("noisy_marginals_fit: empty dataset");

  const auto schema = data.schema_ptr();
  const std::size_t d = schema->variable_count();
  const double laplace_scale = 2.0 * static_cast<double>(d) / budget.epsilon;

  BudgetLedger ledger;
  ledger.epsilon_total = budget.epsilon;
  ledger.epsilon_structure = 0.0;
  ledger.epsilon_params = budget.epsilon;
  ledger.delta = 0.0;

  auto eng = rng::make_engine(seed, /*stream=*/21);
  std::vector<std::vector<double>> columns(d);
  for (std::size_t c = 0; c < d; ++c) {
    const std::size_t k = schema->variable(c).cardinality();
    std::vector<double> hist(k, 0.0);
    for (const auto& rec : data.records()) hist[rec.cells[c]] += 1.0;
    double sum = 0.0;
    for (auto& cell : hist) {
      cell += rng::laplace(eng, laplace_scale);
      cell = std::max(0.0, cell);
      sum += cell;
    }
    if (sum <= 0.0) {
      for (auto& cell : hist) cell = 1.0 / static_cast<double>(k);
    } else {
      for (auto& cell : hist) cell /= sum;
    }
    columns[c] = std::move(hist);
    ledger.entries.push_back({"histogram:" + schema->variable(c).name,
                              budget.epsilon / static_cast<double>(d), laplace_scale});
  }
  return NoisyMarginalsModel(schema, std::move(columns), std::move(ledger));
}

Dataset synth_sample(const FittedSynthesizer& model, std::size_t m, std::uint64_t seed) {
  if (m < 1) throw Error("synth_sample: m must be at least 1");
  return model.sample(m, seed);
}

}  // namespace surropub::dp
