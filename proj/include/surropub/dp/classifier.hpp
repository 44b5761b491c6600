#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "surropub/dp/budget.hpp"
#include "surropub/schema.hpp"

namespace surropub::dp {

// Binary logistic classifier over one-hot coded features. Supports plain
// minibatch gradient descent on public data and DP-SGD fine-tuning with
// per-example clipping, Gaussian noise, and conservative zCDP accounting
// (plain composition, no subsampling amplification).

struct PretrainParams {
  int pre_num_epochs = 9;
  int pre_batch_size = 32;
  double pre_lr = 3e-4;
  std::string id() const;
};

struct DpSgdParams {
  int dp_num_epochs = 20;
  int dp_batch_size = 128;
  double dp_lr = 3e-3;
  double clip_norm = 1.0;
  // Test hook: bypasses calibration; sigma_override = 0 disables noise.
  std::optional<double> sigma_override;
  std::string id() const;
};

/// One-hot layout over all non-target variables; the target contributes the
/// 0/1 label via its value index.
struct FeatureLayout {
  std::size_t target = 0;
  std::size_t dims = 0;
  std::vector<std::ptrdiff_t> offsets;  // per variable, -1 for the target

  static FeatureLayout build(const Schema& schema, std::size_t target);
  void active_indices(const Record& record, std::vector<std::size_t>& out) const;
};

struct TrainingLedger {
  double epsilon = 0.0;
  double delta = 0.0;
  double sigma = 0.0;
  double clip_norm = 0.0;
  std::size_t steps = 0;
};

struct ModelState {
  FeatureLayout layout;
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<std::string> provenance;          // append-only training history
  std::optional<TrainingLedger> budget;         // set by dp_finetune

  double score(const Record& record) const;     // P(label = second target value)
  std::string serialize() const;
};

ModelState make_model(const Schema& schema, std::string_view target);

ModelState pretrain(ModelState model, const Dataset& public_train,
                    const PretrainParams& params, std::uint64_t seed);

/// zCDP composition: rho = T / (2 sigma^2); eps(rho, delta) = rho + 2 sqrt(rho ln(1/delta)).
double zcdp_epsilon(double rho, double delta);

/// Smallest sigma with eps(rho(sigma, steps), delta) <= budget.epsilon, found
/// by bisection to within 1e-6 of the target. Throws if sigma would exceed 1e6.
double calibrate_sigma(const PrivacyBudget& budget, std::size_t steps);

struct DpSgdObserver {
  std::function<void(std::span<const double>)> on_clipped_norms;  // per batch
  std::function<void(double)> on_noise;                           // per coordinate draw
};

ModelState dp_finetune(ModelState model, const Dataset& private_train,
                       const DpSgdParams& params, const PrivacyBudget& budget,
                       std::uint64_t seed, const DpSgdObserver* observer = nullptr);

/// Mann-Whitney AUC; ties count one half. Throws on a single-class test set.
double auc(const ModelState& model, const Dataset& test);
double error_rate(const ModelState& model, const Dataset& test);

std::uint64_t dataset_fingerprint(const Dataset& data);

struct ClassifierRun {
  double auc = 0.0;
  std::uint64_t test_fingerprint = 0;
  double epsilon = 0.0;
};

/// AUC of the pretrained run minus the no-pretraining run; both must have
/// been evaluated on the same test split and epsilon.
double auc_advantage(const ClassifierRun& pretrained, const ClassifierRun& baseline);

}  // namespace surropub::dp
