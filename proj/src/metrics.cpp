#include "surropub/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "surropub/dp/classifier.hpp"

namespace surropub::metrics {

namespace {

void require_same_schema(const Dataset& a, const Dataset& b) {
  if (!(a.schema() == b.schema()))
    throw Error("metric inputs must share a schema");
}

using CellKey = std::vector<std::uint16_t>;

std::map<CellKey, std::size_t> joint_counts(const Dataset& data) {
  std::map<CellKey, std::size_t> counts;
  for (const auto& rec : data.records()) counts[rec.cells] += 1;
  return counts;
}

/// Next k-subset of {0..d-1} in lexicographic order; false when exhausted.
bool next_subset(std::vector<std::size_t>& subset, std::size_t d) {
  const std::size_t k = subset.size();
  std::size_t i = k;
  while (i-- > 0) {
    if (subset[i] + (k - i) < d) {
      ++subset[i];
      for (std::size_t j = i + 1; j < k; ++j) subset[j] = subset[j - 1] + 1;
      return true;
    }
  }
  return false;
}

ErrorPair kway_error_impl(const Dataset& a, const Dataset& b, std::size_t k,
                          const std::function<std::uint16_t(std::size_t, std::uint16_t)>& remap,
                          const std::function<std::size_t(std::size_t)>& card) {
  require_same_schema(a, b);
  const std::size_t d = a.schema().variable_count();
  if (k < 1 || k > d)
    throw Error("k-way error: k must be in [1, " + std::to_string(d) + "]");
  if (a.empty() || b.empty()) throw Error("k-way error: empty dataset");

  const double scale_b = static_cast<double>(a.size()) / static_cast<double>(b.size());

  std::vector<std::size_t> subset(k);
  for (std::size_t i = 0; i < k; ++i) subset[i] = i;

  double total = 0.0;
  double worst = 0.0;
  std::size_t workload = 0;
  do {
    ++workload;
    // Cell index is mixed-radix over the subset's (possibly remapped) domains.
    std::size_t cells = 1;
    for (std::size_t v : subset) cells *= card(v);
    std::vector<double> diff(cells, 0.0);
    const auto accumulate = [&](const Dataset& data, double w) {
      for (const auto& rec : data.records()) {
        std::size_t cell = 0;
        for (std::size_t v : subset) cell = cell * card(v) + remap(v, rec.cells[v]);
        diff[cell] += w;
      }
    };
    accumulate(a, 1.0);
    accumulate(b, -scale_b);
    double subset_sum = 0.0;
    for (double x : diff) subset_sum += std::fabs(x);
    total += subset_sum;
    worst = std::max(worst, subset_sum);
  } while (next_subset(subset, d));

  const double n_a = static_cast<double>(a.size());
  return {total / (static_cast<double>(workload) * n_a), worst / n_a};
}

}  // namespace

double tvd(const Dataset& a, const Dataset& b) {
  require_same_schema(a, b);
  if (a.empty() || b.empty()) throw Error("tvd: empty dataset");
  const auto ca = joint_counts(a);
  const auto cb = joint_counts(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double sum = 0.0;
  for (const auto& [key, cnt] : ca) {
    const auto it = cb.find(key);
    const double q = it == cb.end() ? 0.0 : static_cast<double>(it->second) / nb;
    sum += std::fabs(static_cast<double>(cnt) / na - q);
  }
  for (const auto& [key, cnt] : cb)
    if (!ca.contains(key)) sum += static_cast<double>(cnt) / nb;
  return 0.5 * sum;
}

std::size_t linear_query(const std::function<bool(const Record&)>& predicate,
                         const Dataset& data) {
  std::size_t count = 0;
  for (const auto& rec : data.records())
    if (predicate(rec)) ++count;
  return count;
}

ErrorPair avg_kway_error(const Dataset& a, const Dataset& b, std::size_t k) {
  return kway_error_impl(
      a, b, k, [](std::size_t, std::uint16_t value) { return value; },
      [&a](std::size_t v) { return a.schema().variable(v).cardinality(); });
}

ErrorPair binarized_marginal_error(const Dataset& a, const Dataset& b, std::size_t k) {
  const auto& schema = a.schema();
  return kway_error_impl(
      a, b, k,
      [&schema](std::size_t v, std::uint16_t value) -> std::uint16_t {
        const std::size_t split = (schema.variable(v).cardinality() + 1) / 2;
        return value >= split ? 1 : 0;
      },
      [](std::size_t) -> std::size_t { return 2; });
}

double pearson_correlation(const Dataset& data, std::size_t x, std::size_t y) {
  const double n = static_cast<double>(data.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (const auto& rec : data.records()) {
    const double a = rec.cells[x];
    const double b = rec.cells[y];
    sx += a;
    sy += b;
    sxx += a * a;
    syy += b * b;
    sxy += a * b;
  }
  const double var_x = sxx - sx * sx / n;
  const double var_y = syy - sy * sy / n;
  if (var_x <= 1e-12 || var_y <= 1e-12) return 0.0;  // degenerate pair
  return (sxy - sx * sy / n) / std::sqrt(var_x * var_y);
}

double cramers_v(const Dataset& data, std::size_t x, std::size_t y) {
  const std::size_t r = data.schema().variable(x).cardinality();
  const std::size_t c = data.schema().variable(y).cardinality();
  if (std::min(r, c) < 2) return 0.0;  // degenerate pair
  std::vector<double> table(r * c, 0.0), row(r, 0.0), col(c, 0.0);
  for (const auto& rec : data.records()) {
    table[rec.cells[x] * c + rec.cells[y]] += 1.0;
    row[rec.cells[x]] += 1.0;
    col[rec.cells[y]] += 1.0;
  }
  const double n = static_cast<double>(data.size());
  double chi2 = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double expected = row[i] * col[j] / n;
      if (expected <= 0.0) continue;
      const double delta = table[i * c + j] - expected;
      chi2 += delta * delta / expected;
    }
  }
  return std::sqrt(chi2 / (n * static_cast<double>(std::min(r, c) - 1)));
}

CorrelationDiffs correlation_diffs(const Dataset& a, const Dataset& b) {
  require_same_schema(a, b);
  const std::size_t d = a.schema().variable_count();
  if (d < 2) throw Error("correlation_diffs requires at least two variables");
  if (a.empty() || b.empty()) throw Error("correlation_diffs: empty dataset");
  CorrelationDiffs out;
  std::size_t pairs = 0;
  for (std::size_t x = 0; x < d; ++x) {
    for (std::size_t y = x + 1; y < d; ++y) {
      ++pairs;
      const double dp = std::fabs(pearson_correlation(a, x, y) - pearson_correlation(b, x, y));
      const double dv = std::fabs(cramers_v(a, x, y) - cramers_v(b, x, y));
      out.pearson_avg += dp;
      out.cramers_v_avg += dv;
      out.pearson_max = std::max(out.pearson_max, dp);
      out.cramers_v_max = std::max(out.cramers_v_max, dv);
    }
  }
  out.pearson_avg /= static_cast<double>(pairs);
  out.cramers_v_avg /= static_cast<double>(pairs);
  return out;
}

ClassificationDiffs classification_diffs(const Dataset& train_real,
                                         const Dataset& train_synth, const Dataset& test,
                                         std::string_view target, std::uint64_t seed) {
  require_same_schema(train_real, train_synth);
  require_same_schema(train_real, test);

  // Fixed, non-private evaluation classifier; enough epochs to converge at
  // desk scale while keeping task sweeps fast.
  dp::PretrainParams eval_params;
  eval_params.pre_num_epochs = 25;
  eval_params.pre_batch_size = 64;
  eval_params.pre_lr = 0.5;

  auto model_real = dp::pretrain(dp::make_model(train_real.schema(), target), train_real,
                                 eval_params, seed);
  auto model_synth = dp::pretrain(dp::make_model(train_synth.schema(), target), train_synth,
                                  eval_params, seed);

  ClassificationDiffs out;
  out.error_rate_diff = std::fabs(dp::error_rate(model_real, test) -
                                  dp::error_rate(model_synth, test));
  out.auc_diff = std::fabs(dp::auc(model_real, test) - dp::auc(model_synth, test));
  return out;
}

const std::array<Metric, kMetricCount>& all_metrics() {
  static const std::array<Metric, kMetricCount> metrics = {
      Metric::Tvd,          Metric::Max3Way,     Metric::Avg3Way,
      Metric::MaxBinarized, Metric::AvgBinarized, Metric::MaxPearson,
      Metric::AvgPearson,   Metric::MaxCramersV, Metric::AvgCramersV,
      Metric::ErrorRateDiff, Metric::AucDiff};
  return metrics;
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::Tvd: return "tvd";
    case Metric::Max3Way: return "max_3way_marginal_error";
    case Metric::Avg3Way: return "avg_3way_marginal_error";
    case Metric::MaxBinarized: return "max_binarized_marginal_error";
    case Metric::AvgBinarized: return "avg_binarized_marginal_error";
    case Metric::MaxPearson: return "max_pearson_diff";
    case Metric::AvgPearson: return "avg_pearson_diff";
    case Metric::MaxCramersV: return "max_cramers_v_diff";
    case Metric::AvgCramersV: return "avg_cramers_v_diff";
    case Metric::ErrorRateDiff: return "error_rate_diff";
    case Metric::AucDiff: return "auc_diff";
  }
  return "?";
}

MetricGroup metric_group(Metric m) {
  switch (m) {
    case Metric::Tvd:
    case Metric::Max3Way:
    case Metric::Avg3Way:
    case Metric::MaxBinarized:
    case Metric::AvgBinarized:
      return MetricGroup::Marginals;
    case Metric::MaxPearson:
    case Metric::AvgPearson:
    case Metric::MaxCramersV:
    case Metric::AvgCramersV:
      return MetricGroup::Correlations;
    case Metric::ErrorRateDiff:
    case Metric::AucDiff:
      return MetricGroup::Classification;
  }
  return MetricGroup::Marginals;
}

std::string_view group_name(MetricGroup g) {
  switch (g) {
    case MetricGroup::Marginals: return "marginals";
    case MetricGroup::Correlations: return "correlations";
    case MetricGroup::Classification: return "classification";
  }
  return "?";
}

MetricVector evaluate_quality(const Dataset& synthetic, const QualityContext& ctx) {
  if (!ctx.reference) throw Error("evaluate_quality: missing reference dataset");
  const Dataset& ref = *ctx.reference;

  MetricVector out;
  const auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };

  out[Metric::Tvd] = clamp01(tvd(ref, synthetic));
  const std::size_t d = ref.schema().variable_count();
  const std::size_t k = std::min<std::size_t>(3, d);
  const auto kway = avg_kway_error(ref, synthetic, k);
  out[Metric::Avg3Way] = clamp01(kway.avg);
  out[Metric::Max3Way] = clamp01(kway.max);
  const auto binarized = binarized_marginal_error(ref, synthetic, k);
  out[Metric::AvgBinarized] = clamp01(binarized.avg);
  out[Metric::MaxBinarized] = clamp01(binarized.max);

  if (d >= 2) {
    const auto corr = correlation_diffs(ref, synthetic);
    out[Metric::AvgPearson] = clamp01(corr.pearson_avg);
    out[Metric::MaxPearson] = clamp01(corr.pearson_max);
    out[Metric::AvgCramersV] = clamp01(corr.cramers_v_avg);
    out[Metric::MaxCramersV] = clamp01(corr.cramers_v_max);
  }

  if (!ctx.target.empty()) {
    if (!ctx.reference_train || !ctx.reference_test)
      throw Error("evaluate_quality: classification metrics need train/test splits");
    const auto cls = classification_diffs(*ctx.reference_train, synthetic,
                                          *ctx.reference_test, ctx.target, ctx.seed);
    out[Metric::ErrorRateDiff] = clamp01(cls.error_rate_diff);
    out[Metric::AucDiff] = clamp01(cls.auc_diff);
  }
  return out;
}

std::vector<SimilarityRow> similarity_report(
    const Dataset& reference,
    const std::vector<std::pair<std::string, const Dataset*>>& candidates) {
  std::vector<SimilarityRow> rows;
  const std::size_t d = reference.schema().variable_count();
  const std::size_t k = std::min<std::size_t>(3, d);
  for (const auto& [name, data] : candidates) {
    SimilarityRow row;
    row.name = name;
    row.one_minus_tvd = 100.0 * (1.0 - tvd(reference, *data));
    row.one_minus_3wm = 100.0 * (1.0 - avg_kway_error(reference, *data, k).avg);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_similarity_table(const std::vector<SimilarityRow>& rows) {
  std::ostringstream out;
  out << "method\t1-TVD\t1-3WM\n";
  const auto cell = [](double value) -> std::string {
    const double rounded = std::round(value * 10.0) / 10.0;
    if (rounded == 0.0) return "";  // zero-rounded values omitted
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(1);
    s << rounded;
    return s.str();
  };
  for (const auto& row : rows)
    out << row.name << '\t' << cell(row.one_minus_tvd) << '\t' << cell(row.one_minus_3wm)
        << '\n';
  return out.str();
}

}  // namespace surropub::metrics
