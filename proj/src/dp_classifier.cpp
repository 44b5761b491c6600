#include "surropub/dp/classifier.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "surropub/rng.hpp"

namespace surropub::dp {

std::string PretrainParams::id() const {
  std::ostringstream out;
  out << "pre_e" << pre_num_epochs << "_b" << pre_batch_size << "_lr" << pre_lr;
  return out.str();
}

std::string DpSgdParams::id() const {
  std::ostringstream out;
  out << "dp_e" << dp_num_epochs << "_b" << dp_batch_size << "_lr" << dp_lr;
  return out.str();
}

FeatureLayout FeatureLayout::build(const Schema& schema, std::size_t target) {
  const auto& spec = schema.variable(target);
  if (spec.cardinality() != 2)
    throw Error("classifier target '" + spec.name + "' must be binary, has " +
                std::to_string(spec.cardinality()) + " values");
  FeatureLayout layout;
  layout.target = target;
  layout.offsets.assign(schema.variable_count(), -1);
  for (std::size_t v = 0; v < schema.variable_count(); ++v) {
    if (v == target) continue;
    layout.offsets[v] = static_cast<std::ptrdiff_t>(layout.dims);
    layout.dims += schema.variable(v).cardinality();
  }
  if (layout.dims == 0) throw Error("classifier needs at least one feature variable");
  return layout;
}

void FeatureLayout::active_indices(const Record& record, std::vector<std::size_t>& out) const {
  out.clear();
  for (std::size_t v = 0; v < offsets.size(); ++v) {
    if (offsets[v] < 0) continue;
    out.push_back(static_cast<std::size_t>(offsets[v]) + record.cells[v]);
  }
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

int label_of(const FeatureLayout& layout, const Record& record) {
  return record.cells[layout.target];
}

void check_two_classes(const FeatureLayout& layout, const Dataset& data,
                       const char* what) {
  bool seen[2] = {false, false};
  for (const auto& rec : data.records()) seen[label_of(layout, rec)] = true;
  if (!seen[0] || !seen[1])
    throw Error(std::string(what) + ": only one target class is present");
}

}  // namespace

double ModelState::score(const Record& record) const {
  double z = bias;
  for (std::size_t v = 0; v < layout.offsets.size(); ++v) {
    if (layout.offsets[v] < 0) continue;
    z += weights[static_cast<std::size_t>(layout.offsets[v]) + record.cells[v]];
  }
  return sigmoid(z);
}

std::string ModelState::serialize() const {
  nlohmann::json doc;
  doc["weights"] = weights;
  doc["bias"] = bias;
  doc["provenance"] = provenance;
  if (budget) {
    doc["budget"] = {{"epsilon", budget->epsilon},
                     {"delta", budget->delta},
                     {"sigma", budget->sigma},
                     {"clip_norm", budget->clip_norm},
                     {"steps", budget->steps}};
  }
  return doc.dump(2);
}

ModelState make_model(const Schema& schema, std::string_view target) {
  ModelState model;
  model.layout = FeatureLayout::build(schema, schema.require(target));
  model.weights.assign(model.layout.dims, 0.0);
  model.bias = 0.0;
  return model;
}

ModelState pretrain(ModelState model, const Dataset& public_train,
                    const PretrainParams& params, std::uint64_t seed) {
  if (params.pre_num_epochs < 1 || params.pre_batch_size < 1 || !(params.pre_lr > 0.0))
    throw Error("pretrain: epochs, batch size and learning rate must be positive");
  if (public_train.empty()) throw Error("pretrain: empty training data");
  check_two_classes(model.layout, public_train, "pretrain");

  const std::size_t n = public_train.size();
  auto eng = rng::make_engine(seed, /*stream=*/10);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> idx;
  std::vector<double> grad(model.weights.size(), 0.0);

  for (int epoch = 0; epoch < params.pre_num_epochs; ++epoch) {
    rng::shuffle(eng, perm);
    for (std::size_t start = 0; start < n; start += params.pre_batch_size) {
      const std::size_t end = std::min(n, start + params.pre_batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      double grad_bias = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const Record& rec = public_train.record(perm[i]);
        const double err = model.score(rec) - label_of(model.layout, rec);
        model.layout.active_indices(rec, idx);
        for (std::size_t j : idx) grad[j] += err;
        grad_bias += err;
      }
      const double scale = params.pre_lr / static_cast<double>(end - start);
      for (std::size_t j = 0; j < grad.size(); ++j) model.weights[j] -= scale * grad[j];
      model.bias -= scale * grad_bias;
    }
  }
  model.provenance.push_back("pretrained: " + std::string(to_string(public_train.role())) +
                             " n=" + std::to_string(n) + " " + params.id());
  return model;
}

double zcdp_epsilon(double rho, double delta) {
  if (!(rho > 0.0)) return 0.0;
  if (!(delta > 0.0)) throw Error("zcdp conversion requires delta > 0");
  return rho + 2.0 * std::sqrt(rho * std::log(1.0 / delta));
}

double calibrate_sigma(const PrivacyBudget& budget, std::size_t steps) {
  budget.check();
  if (!(budget.delta > 0.0)) throw Error("calibrate_sigma requires delta > 0");
  if (steps < 1) throw Error("calibrate_sigma requires at least one step");

  const auto eps_at = [&](double sigma) {
    return zcdp_epsilon(static_cast<double>(steps) / (2.0 * sigma * sigma), budget.delta);
  };
  constexpr double kSigmaCap = 1e6;
  if (eps_at(kSigmaCap) > budget.epsilon)
    throw Error("calibrate_sigma: no noise multiplier below " + std::to_string(kSigmaCap) +
                " satisfies the budget");
  double lo = 1e-6;  // eps(lo) is astronomically large
  double hi = kSigmaCap;
  if (eps_at(lo) <= budget.epsilon) return lo;
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (eps_at(mid) <= budget.epsilon)
      hi = mid;
    else
      lo = mid;
    if (budget.epsilon - eps_at(hi) <= 1e-6) break;
  }
  return hi;
}

ModelState dp_finetune(ModelState model, const Dataset& private_train,
                       const DpSgdParams& params, const PrivacyBudget& budget,
                       std::uint64_t seed, const DpSgdObserver* observer) {
  if (params.dp_num_epochs < 1 || params.dp_batch_size < 1 || !(params.dp_lr > 0.0) ||
      !(params.clip_norm > 0.0))
    throw Error("dp_finetune: epochs, batch size, learning rate and clip norm must be positive");
  if (private_train.empty()) throw Error("dp_finetune: empty training data");
  check_two_classes(model.layout, private_train, "dp_finetune");

  const std::size_t n = private_train.size();
  const std::size_t batch = static_cast<std::size_t>(params.dp_batch_size);
  const std::size_t steps_per_epoch = (n + batch - 1) / batch;
  const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(params.dp_num_epochs);

  double sigma;
  if (params.sigma_override) {
    sigma = *params.sigma_override;
  } else {
    sigma = calibrate_sigma(budget, total_steps);
  }
  const double clip = params.clip_norm;
  const double noise_std = sigma * clip / static_cast<double>(batch);

  auto eng = rng::make_engine(seed, /*stream=*/11);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> idx;
  std::vector<double> grad_sum(model.weights.size(), 0.0);
  std::vector<double> norms;

  for (int epoch = 0; epoch < params.dp_num_epochs; ++epoch) {
    rng::shuffle(eng, perm);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      std::fill(grad_sum.begin(), grad_sum.end(), 0.0);
      double grad_bias_sum = 0.0;
      norms.clear();
      for (std::size_t i = start; i < end; ++i) {
        const Record& rec = private_train.record(perm[i]);
        const double err = model.score(rec) - label_of(model.layout, rec);
        model.layout.active_indices(rec, idx);
        // One-hot features: the per-example gradient is err on `idx` + bias.
        const double norm =
            std::fabs(err) * std::sqrt(static_cast<double>(idx.size()) + 1.0);
        const double factor = norm > clip ? clip / norm : 1.0;
        norms.push_back(norm * factor);
        for (std::size_t j : idx) grad_sum[j] += err * factor;
        grad_bias_sum += err * factor;
      }
      if (observer && observer->on_clipped_norms) observer->on_clipped_norms(norms);
      const double inv_b = 1.0 / static_cast<double>(batch);
      for (std::size_t j = 0; j < grad_sum.size(); ++j) {
        const double noise = noise_std > 0.0 ? noise_std * rng::gaussian(eng) : 0.0;
        if (observer && observer->on_noise) observer->on_noise(noise);
        model.weights[j] -= params.dp_lr * (grad_sum[j] * inv_b + noise);
      }
      const double bias_noise = noise_std > 0.0 ? noise_std * rng::gaussian(eng) : 0.0;
      if (observer && observer->on_noise) observer->on_noise(bias_noise);
      model.bias -= params.dp_lr * (grad_bias_sum * inv_b + bias_noise);
    }
  }

  TrainingLedger ledger;
  ledger.delta = budget.delta;
  ledger.sigma = sigma;
  ledger.clip_norm = clip;
  ledger.steps = total_steps;
  ledger.epsilon =
      sigma > 0.0
          ? zcdp_epsilon(static_cast<double>(total_steps) / (2.0 * sigma * sigma), budget.delta)
          : std::numeric_limits<double>::infinity();
  model.budget = ledger;
  model.provenance.push_back("dp_finetuned: n=" + std::to_string(n) + " " + params.id() +
                             " eps=" + std::to_string(budget.epsilon));
  return model;
}

double auc(const ModelState& model, const Dataset& test) {
  check_two_classes(model.layout, test, "auc");
  // Mann-Whitney via ranks; tied scores share their average rank.
  std::vector<std::pair<double, int>> scored;
  scored.reserve(test.size());
  std::size_t n_pos = 0;
  for (const auto& rec : test.records()) {
    const int y = label_of(model.layout, rec);
    scored.emplace_back(model.score(rec), y);
    n_pos += static_cast<std::size_t>(y);
  }
  const std::size_t n_neg = scored.size() - n_pos;
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < scored.size()) {
    std::size_t j = i;
    while (j < scored.size() && scored[j].first == scored[i].first) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based average
    for (std::size_t k = i; k < j; ++k)
      if (scored[k].second == 1) rank_sum_pos += avg_rank;
    i = j;
  }
  const double u = rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double error_rate(const ModelState& model, const Dataset& test) {
  if (test.empty()) throw Error("error_rate: empty test set");
  std::size_t wrong = 0;
  for (const auto& rec : test.records()) {
    const int predicted = model.score(rec) >= 0.5 ? 1 : 0;
    if (predicted != label_of(model.layout, rec)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(test.size());
}

std::uint64_t dataset_fingerprint(const Dataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  mix(data.size());
  for (const auto& rec : data.records())
    for (std::uint16_t c : rec.cells) mix(c + 1);
  return h;
}

double auc_advantage(const ClassifierRun& pretrained, const ClassifierRun& baseline) {
  if (pretrained.test_fingerprint != baseline.test_fingerprint)
    throw Error("auc_advantage: runs were evaluated on different test splits");
  if (pretrained.epsilon != baseline.epsilon)
    throw Error("auc_advantage: runs used different privacy budgets");
  return pretrained.auc - baseline.auc;
}

}  // namespace surropub::dp
