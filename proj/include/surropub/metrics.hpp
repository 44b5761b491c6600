#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "surropub/schema.hpp"

namespace surropub::metrics {

/// Total variation distance between the empirical joint distributions of two
/// same-schema datasets.
double tvd(const Dataset& a, const Dataset& b);

/// Number of records satisfying the predicate.
std::size_t linear_query(const std::function<bool(const Record&)>& predicate,
                         const Dataset& data);

struct ErrorPair {
  double avg = 0.0;
  double max = 0.0;
};

/// Workload of all C(d, k) attribute subsets expanded to marginal cells.
/// avg = sum of |count_a - count_b| over all cells / (|W| * |a|);
/// max = largest per-subset cell-diff sum / |a|. Unequal sizes rescale b's
/// counts by |a| / |b|.
ErrorPair avg_kway_error(const Dataset& a, const Dataset& b, std::size_t k);

/// avg_kway_error after binarizing every variable at the midpoint of its
/// canonical value order (index < ceil(card/2) -> 0, else 1).
ErrorPair binarized_marginal_error(const Dataset& a, const Dataset& b, std::size_t k);

struct CorrelationDiffs {
  double pearson_avg = 0.0;
  double pearson_max = 0.0;
  double cramers_v_avg = 0.0;
  double cramers_v_max = 0.0;
};

/// Per unordered variable pair: |coef_a - coef_b| for Pearson over integer
/// value indices and Cramer's V; degenerate pairs contribute coefficient 0.
CorrelationDiffs correlation_diffs(const Dataset& a, const Dataset& b);

double pearson_correlation(const Dataset& data, std::size_t x, std::size_t y);
double cramers_v(const Dataset& data, std::size_t x, std::size_t y);

struct ClassificationDiffs {
  double error_rate_diff = 0.0;
  double auc_diff = 0.0;
};

/// Trains the (non-private) evaluation classifier once on real and once on
/// synthetic data with the same seed, evaluates both on the same test split.
ClassificationDiffs classification_diffs(const Dataset& train_real,
                                         const Dataset& train_synth, const Dataset& test,
                                         std::string_view target, std::uint64_t seed);

// The fixed metric table: three groups, lower is better, all values clamped
// to [0, 1] when assembled into a vector.
enum class Metric {
  Tvd,
  Max3Way,
  Avg3Way,
  MaxBinarized,
  AvgBinarized,
  MaxPearson,
  AvgPearson,
  MaxCramersV,
  AvgCramersV,
  ErrorRateDiff,
  AucDiff,
};
enum class MetricGroup { Marginals, Correlations, Classification };

inline constexpr std::size_t kMetricCount = 11;
const std::array<Metric, kMetricCount>& all_metrics();
std::string_view metric_name(Metric m);
MetricGroup metric_group(Metric m);
std::string_view group_name(MetricGroup g);

struct MetricVector {
  std::array<double, kMetricCount> values{};
  double operator[](Metric m) const { return values[static_cast<std::size_t>(m)]; }
  double& operator[](Metric m) { return values[static_cast<std::size_t>(m)]; }
};

struct QualityContext {
  const Dataset* reference = nullptr;       // marginal/correlation reference
  const Dataset* reference_train = nullptr; // classification train split
  const Dataset* reference_test = nullptr;  // classification test split
  std::string target;                       // empty = skip classification metrics
  std::uint64_t seed = 0;
};

/// Evaluates the whole metric table for a synthetic dataset.
MetricVector evaluate_quality(const Dataset& synthetic, const QualityContext& ctx);

struct SimilarityRow {
  std::string name;
  double one_minus_tvd = 0.0;  // scaled by 100
  double one_minus_3wm = 0.0;  // scaled by 100
};

/// 100 * (1 - TVD) and 100 * (1 - Avg3WM) per candidate.
std::vector<SimilarityRow> similarity_report(
    const Dataset& reference,
    const std::vector<std::pair<std::string, const Dataset*>>& candidates);

/// Tab-separated table; values rounded to one decimal, zero-rounded values
/// rendered blank.
std::string render_similarity_table(const std::vector<SimilarityRow>& rows);

}  // namespace surropub::metrics
