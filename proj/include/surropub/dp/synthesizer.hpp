#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "surropub/bayes_net.hpp"
#include "surropub/dp/budget.hpp"
#include "surropub/rng.hpp"
#include "surropub/schema.hpp"

namespace surropub::dp {

struct PrivBayesParams {
  double theta = 2.0;          // SNR heuristic controlling max parent-set size
  double epsilon_split = 0.5;  // share of epsilon spent on structure learning
  void check() const;
  std::string id() const;
};

/// Plug-in mutual information I(var; parents) in bits from joint counts.
/// Empty parent set gives exactly 0.
double mutual_info(const Dataset& data, std::size_t variable,
                   std::span<const std::size_t> parents);

/// Replace-one sensitivity bound of plug-in MI (bits) for an r x c table on
/// n records. The min(r,c) <= 2 case uses (1/n)log2 n + ((n-1)/n)log2(n/(n-1));
/// the general case (2/n)log2((n+1)/2) + ((n-1)/n)log2((n+1)/(n-1)).
/// Both are verified exhaustively in tests; the formulas are the tunable.
double mi_sensitivity_bits(std::size_t n, std::size_t kx, std::size_t kpi);

/// Exponential mechanism: index with probability proportional to
/// exp(epsilon * score / (2 * sensitivity)), stabilized by max subtraction.
std::size_t exp_mech_select(std::span<const double> scores, double epsilon,
                            double sensitivity, rng::Engine& eng);

struct LedgerEntry {
  std::string label;
  double epsilon_share = 0.0;
  double laplace_scale = 0.0;  // 0 when the entry is an exponential mechanism
};

/// Per-fit budget accounting; epsilon_structure + epsilon_params always
/// equals epsilon_total exactly.
struct BudgetLedger {
  double epsilon_total = 0.0;
  double epsilon_structure = 0.0;
  double epsilon_params = 0.0;
  double delta = 0.0;
  std::vector<LedgerEntry> entries;
  std::string serialize() const;
};

class FittedSynthesizer {
public:
  virtual ~FittedSynthesizer() = default;
  virtual Dataset sample(std::size_t m, std::uint64_t seed) const = 0;
  virtual const BudgetLedger& ledger() const = 0;
  virtual std::string mechanism() const = 0;
  virtual std::string serialize() const = 0;
};

class PrivBayesModel final : public FittedSynthesizer {
public:
  PrivBayesModel(BayesNet net, BudgetLedger ledger, std::size_t k_max);
  Dataset sample(std::size_t m, std::uint64_t seed) const override;
  const BudgetLedger& ledger() const override { return ledger_; }
  std::string mechanism() const override { return "privbayes"; }
  std::string serialize() const override;
  const BayesNet& net() const { return net_; }
  std::size_t k_max() const { return k_max_; }

private:
  BayesNet net_;
  BudgetLedger ledger_;
  std::size_t k_max_;
};

/// PrivBayes-style fit under pure epsilon-DP with replace-one neighbors:
/// structure by exponential mechanism over bounded parent subsets scored by
/// mutual information; parameters by Laplace(2d/eps2)-noised CPT counts.
/// Parent-set size is capped at the largest k with
///   n * eps2 / (2 * d * cells(k)) >= theta,
/// where cells(k) is the largest candidate CPT cell count.
PrivBayesModel privbayes_fit(const Dataset& data, const PrivacyBudget& budget,
                             const PrivBayesParams& params, std::uint64_t seed);

/// Cap on parent-set size implied by the theta SNR inequality.
std::size_t privbayes_k_max(const Schema& schema, std::size_t n, double epsilon_params,
                            double theta);

class NoisyMarginalsModel final : public FittedSynthesizer {
public:
  NoisyMarginalsModel(SchemaPtr schema, std::vector<std::vector<double>> columns,
                      BudgetLedger ledger);
  Dataset sample(std::size_t m, std::uint64_t seed) const override;
  const BudgetLedger& ledger() const override { return ledger_; }
  std::string mechanism() const override { return "noisy_marginals"; }
  std::string serialize() const override;
  const std::vector<std::vector<double>>& columns() const { return columns_; }

private:
  SchemaPtr schema_;
  std::vector<std::vector<double>> columns_;
  BudgetLedger ledger_;
};

/// Independent per-column sampler from Laplace(2d/eps)-noised histograms.
NoisyMarginalsModel noisy_marginals_fit(const Dataset& data, const PrivacyBudget& budget,
                                        std::uint64_t seed);

/// Draws m records from a fitted model; m must be at least 1.
Dataset synth_sample(const FittedSynthesizer& model, std::size_t m, std::uint64_t seed);

}  // namespace surropub::dp
