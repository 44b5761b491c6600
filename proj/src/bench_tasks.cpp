#include "surropub/bench/tasks.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>

#include "surropub/rng.hpp"

namespace surropub::bench {

namespace {

std::uint64_t job_seed(std::uint64_t base, std::uint64_t tag, std::size_t a, std::size_t b,
                       std::size_t c) {
  std::uint64_t h = rng::derive(base, tag);
  h = rng::derive(h, a);
  h = rng::derive(h, b);
  h = rng::derive(h, c);
  return h;
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double std_error_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1)) /
         std::sqrt(static_cast<double>(xs.size()));
}

std::string sweep_record_key(const std::string& label, const std::string& mechanism,
                             const std::string& config, double epsilon,
                             std::uint64_t seed) {
  std::ostringstream key;
  key << label << '\x1f' << mechanism << '\x1f' << config << '\x1f' << epsilon << '\x1f'
      << seed;
  return key.str();
}

}  // namespace

ClassifierGrid ClassifierGrid::paper_default() {
  ClassifierGrid grid;
  for (int epochs : {1, 9})
    for (int batch : {32, 128})
      for (double lr : {3e-4, 3e-5}) {
        dp::PretrainParams p;
        p.pre_num_epochs = epochs;
        p.pre_batch_size = batch;
        p.pre_lr = lr;
        grid.pretrain.push_back(p);
      }
  for (double lr : {3e-3, 3e-4}) {
    dp::DpSgdParams p;
    p.dp_num_epochs = 20;
    p.dp_batch_size = 128;
    p.dp_lr = lr;
    grid.finetune.push_back(p);
  }
  return grid;
}

ClassifierGrid ClassifierGrid::smoke() {
  ClassifierGrid grid;
  dp::PretrainParams pre;
  pre.pre_num_epochs = 9;
  pre.pre_batch_size = 32;
  pre.pre_lr = 3e-4;
  grid.pretrain.push_back(pre);
  dp::DpSgdParams ft;
  grid.finetune.push_back(ft);
  return grid;
}

Task1Result run_task1(const Dataset& private_data,
                      const std::vector<std::pair<std::string, Dataset>>& candidates,
                      const Task1Options& options, const RecordSink* sink) {
  if (options.target.empty()) throw ConfigError("task1 requires a target variable");
  if (options.n_seeds < 1) throw ConfigError("task1 requires n_seeds >= 1");
  if (options.grid.pretrain.empty() || options.grid.finetune.empty())
    throw ConfigError("task1 requires a non-empty classifier grid");

  std::map<std::string, const BenchmarkRecord*> completed;
  if (sink && sink->completed) {
    for (const auto& record : *sink->completed)
      completed[sweep_record_key(record.method, record.mechanism, record.config_id,
                                 record.epsilon, record.seed)] = &record;
  }

  const auto balanced = balance_by_downsampling(private_data, options.target, options.base_seed);
  const auto split = split_dataset(balanced, options.base_seed);
  const Dataset priv_train = split.subset(Split::Train);
  const Dataset priv_test = split.subset(Split::Test);
  const std::uint64_t test_fp = dp::dataset_fingerprint(priv_test);

  const auto& schema = private_data.schema();
  const std::size_t n_eps = options.epsilons.size();
  const std::size_t n_dp = options.grid.finetune.size();
  const std::size_t n_pre = options.grid.pretrain.size();
  const std::size_t n_seeds = static_cast<std::size_t>(options.n_seeds);

  Task1Result result;
  std::mutex record_mutex;
  std::atomic<std::size_t> failed{0};

  // Control: DP fine-tuning only, matched by (epsilon, dp config, seed).
  std::vector<std::optional<double>> control(n_eps * n_dp * n_seeds);
  const auto control_at = [&](std::size_t e, std::size_t c, std::size_t s) -> std::size_t {
    return (e * n_dp + c) * n_seeds + s;
  };
  parallel_for(control.size(), options.workers, [&](std::size_t job) {
    const std::size_t e = job / (n_dp * n_seeds);
    const std::size_t c = (job / n_seeds) % n_dp;
    const std::size_t s = job % n_seeds;
    const std::uint64_t run_seed = job_seed(options.base_seed, 101, e, c, s);
    const auto done = completed.find(sweep_record_key(
        "without_pretraining", "dp_sgd", options.grid.finetune[c].id(),
        options.epsilons[e], run_seed));
    if (done != completed.end()) {
      control[job] = done->second->metrics.at("auc");
      std::lock_guard lock(record_mutex);
      result.records.push_back(*done->second);
      return;
    }
    const dp::PrivacyBudget budget{options.epsilons[e], options.delta};
    try {
      auto model = dp::dp_finetune(dp::make_model(schema, options.target), priv_train,
                                   options.grid.finetune[c], budget, run_seed);
      const double value = dp::auc(model, priv_test);
      control[job] = value;
      BenchmarkRecord record{"without_pretraining", "dp_sgd", "private",
                             options.grid.finetune[c].id(), options.epsilons[e], run_seed,
                             {{"auc", value}}};
      std::lock_guard lock(record_mutex);
      if (sink && sink->append) sink->append(record);
      result.records.push_back(std::move(record));
    } catch (const Error&) {
      failed += 1;
    }
  });

  result.control_auc_by_epsilon.resize(n_eps);
  for (std::size_t e = 0; e < n_eps; ++e) {
    std::vector<double> values;
    for (std::size_t c = 0; c < n_dp; ++c)
      for (std::size_t s = 0; s < n_seeds; ++s)
        if (control[control_at(e, c, s)]) values.push_back(*control[control_at(e, c, s)]);
    result.control_auc_by_epsilon[e] = mean_of(values);
  }

  for (const auto& [name, candidate] : candidates) {
    Task1CandidateResult cand_result;
    cand_result.name = name;

    Dataset cand_train(candidate.schema_ptr());
    Dataset cand_valid(candidate.schema_ptr());
    bool candidate_ok = true;
    try {
      const auto cand_balanced =
          balance_by_downsampling(candidate, options.target, options.base_seed);
      const auto cand_split = split_dataset(cand_balanced, options.base_seed);
      cand_train = cand_split.subset(Split::Train);
      cand_valid = cand_split.subset(Split::Valid);
    } catch (const Error&) {
      candidate_ok = false;  // e.g. single-class candidate; every run fails
    }

    // Pretrained bases, shared across epsilons and fine-tune configs.
    std::vector<std::vector<std::optional<dp::ModelState>>> pretrained(
        n_pre, std::vector<std::optional<dp::ModelState>>(n_seeds));
    std::vector<double> validation_auc(n_pre, -1.0);
    if (candidate_ok) {
      parallel_for(n_pre * n_seeds, options.workers, [&](std::size_t job) {
        const std::size_t p = job / n_seeds;
        const std::size_t s = job % n_seeds;
        try {
          pretrained[p][s] =
              dp::pretrain(dp::make_model(schema, options.target), cand_train,
                           options.grid.pretrain[p], job_seed(options.base_seed, 202, p, 0, s));
        } catch (const Error&) {
          failed += 1;
        }
      });
      for (std::size_t p = 0; p < n_pre; ++p) {
        std::vector<double> values;
        for (std::size_t s = 0; s < n_seeds; ++s) {
          if (!pretrained[p][s]) continue;
          try {
            values.push_back(dp::auc(*pretrained[p][s], cand_valid));
          } catch (const Error&) {
            // single-class validation split; leave this config unscored
          }
        }
        if (!values.empty()) validation_auc[p] = mean_of(values);
      }
    }
    std::size_t best_pre = 0;
    for (std::size_t p = 1; p < n_pre; ++p)
      if (validation_auc[p] > validation_auc[best_pre]) best_pre = p;

    // advantage[(e, p, c, s)]
    std::vector<std::optional<double>> advantage(n_eps * n_pre * n_dp * n_seeds);
    std::vector<std::optional<double>> auc_value(advantage.size());
    const auto idx_of = [&](std::size_t e, std::size_t p, std::size_t c,
                            std::size_t s) -> std::size_t {
      return ((e * n_pre + p) * n_dp + c) * n_seeds + s;
    };
    if (candidate_ok) {
      parallel_for(advantage.size(), options.workers, [&](std::size_t job) {
        const std::size_t e = job / (n_pre * n_dp * n_seeds);
        const std::size_t p = (job / (n_dp * n_seeds)) % n_pre;
        const std::size_t c = (job / n_seeds) % n_dp;
        const std::size_t s = job % n_seeds;
        if (!control[control_at(e, c, s)]) {
          failed += 1;
          return;
        }
        const std::uint64_t run_seed = job_seed(options.base_seed, 101, e, c, s);
        const std::string config_id =
            options.grid.pretrain[p].id() + "+" + options.grid.finetune[c].id();
        const auto done = completed.find(
            sweep_record_key(name, "dp_sgd", config_id, options.epsilons[e], run_seed));
        if (done != completed.end()) {
          auc_value[job] = done->second->metrics.at("auc");
          advantage[job] = done->second->metrics.at("auc_advantage");
          std::lock_guard lock(record_mutex);
          result.records.push_back(*done->second);
          return;
        }
        if (!pretrained[p][s]) {
          failed += 1;
          return;
        }
        const dp::PrivacyBudget budget{options.epsilons[e], options.delta};
        try {
          auto model = dp::dp_finetune(*pretrained[p][s], priv_train,
                                       options.grid.finetune[c], budget, run_seed);
          const double value = dp::auc(model, priv_test);
          const dp::ClassifierRun run{value, test_fp, options.epsilons[e]};
          const dp::ClassifierRun baseline{*control[control_at(e, c, s)], test_fp,
                                           options.epsilons[e]};
          auc_value[job] = value;
          advantage[job] = dp::auc_advantage(run, baseline);
          BenchmarkRecord record{name,
                                 "dp_sgd",
                                 "private",
                                 config_id,
                                 options.epsilons[e],
                                 run_seed,
                                 {{"auc", value}, {"auc_advantage", *advantage[job]}}};
          std::lock_guard lock(record_mutex);
          if (sink && sink->append) sink->append(record);
          result.records.push_back(std::move(record));
        } catch (const Error&) {
          failed += 1;
        }
      });
    } else {
      failed += advantage.size();
    }

    for (std::size_t e = 0; e < n_eps; ++e) {
      Task1Cell cell;
      cell.epsilon = options.epsilons[e];
      cell.best_pretrain_config = options.grid.pretrain[best_pre].id();
      std::vector<double> adv_grid, adv_best, auc_grid, auc_best;
      for (std::size_t p = 0; p < n_pre; ++p)
        for (std::size_t c = 0; c < n_dp; ++c)
          for (std::size_t s = 0; s < n_seeds; ++s) {
            const std::size_t j = idx_of(e, p, c, s);
            if (!advantage[j]) {
              cell.failed_runs += 1;
              continue;
            }
            adv_grid.push_back(*advantage[j]);
            auc_grid.push_back(*auc_value[j]);
            if (p == best_pre) {
              adv_best.push_back(*advantage[j]);
              auc_best.push_back(*auc_value[j]);
            }
          }
      cell.mean_advantage_grid = mean_of(adv_grid);
      cell.mean_advantage_best = mean_of(adv_best);
      cell.mean_auc_grid = mean_of(auc_grid);
      cell.mean_auc_best = mean_of(auc_best);
      cand_result.by_epsilon.push_back(std::move(cell));
    }
    result.candidates.push_back(std::move(cand_result));
  }

  result.failed_runs = failed.load();
  return result;
}

std::string SynthConfig::id() const {
  if (mechanism == "noisy_marginals") return "default";
  return privbayes.id();
}

std::vector<SynthConfig> synth_grid(const std::string& mechanism) {
  std::vector<SynthConfig> out;
  if (mechanism == "privbayes") {
    for (double theta : {2.0, 8.0, 32.0, 64.0})
      for (double split : {0.1, 0.5, 0.75}) {
        SynthConfig cfg;
        cfg.mechanism = mechanism;
        cfg.privbayes.theta = theta;
        cfg.privbayes.epsilon_split = split;
        out.push_back(cfg);
      }
  } else if (mechanism == "noisy_marginals") {
    SynthConfig cfg;
    cfg.mechanism = mechanism;
    out.push_back(cfg);
  } else {
    throw ConfigError("unknown mechanism '" + mechanism + "'");
  }
  return out;
}

SynthSweep evaluate_synth_sweep(const Dataset& data, const SynthSweepOptions& options,
                                const std::string& label, const RecordSink* sink) {
  if (data.empty()) throw Error("synth sweep: empty dataset");
  if (options.n_seeds < 1) throw ConfigError("synth sweep requires n_seeds >= 1");

  SynthSweep sweep;
  sweep.configs = synth_grid(options.mechanism);
  sweep.epsilons = options.epsilons;

  // Resume cache: completed records keyed by (label, mechanism, config,
  // epsilon, seed).
  std::map<std::string, const BenchmarkRecord*> completed;
  if (sink && sink->completed) {
    for (const auto& record : *sink->completed)
      completed[sweep_record_key(record.dataset, record.mechanism, record.config_id,
                                 record.epsilon, record.seed)] = &record;
  }

  // Classification context: train/test splits of the same dataset.
  Dataset train(data.schema_ptr());
  Dataset test(data.schema_ptr());
  metrics::QualityContext ctx;
  ctx.reference = &data;
  ctx.seed = rng::derive(options.base_seed, 77);
  if (!options.target.empty()) {
    const auto split = split_dataset(data, options.base_seed);
    train = split.subset(Split::Train);
    test = split.subset(Split::Test);
    ctx.reference_train = &train;
    ctx.reference_test = &test;
    ctx.target = options.target;
  }

  const std::size_t n_cfg = sweep.configs.size();
  const std::size_t n_eps = sweep.epsilons.size();
  const std::size_t n_seeds = static_cast<std::size_t>(options.n_seeds);

  sweep.values.assign(n_cfg, std::vector<metrics::MetricVector>(n_eps));
  sweep.seed_values.assign(
      n_cfg, std::vector<std::vector<metrics::MetricVector>>(
                 n_eps, std::vector<metrics::MetricVector>()));

  std::vector<std::optional<metrics::MetricVector>> cells(n_cfg * n_eps * n_seeds);
  std::atomic<std::size_t> failed{0};
  std::mutex sink_mutex;
  parallel_for(cells.size(), options.workers, [&](std::size_t job) {
    const std::size_t cfg = job / (n_eps * n_seeds);
    const std::size_t e = (job / n_seeds) % n_eps;
    const std::size_t s = job % n_seeds;
    const std::uint64_t fit_seed = job_seed(options.base_seed, 303, cfg, e, s);
    const dp::PrivacyBudget budget{sweep.epsilons[e], 0.0};

    if (!completed.empty()) {
      const auto it = completed.find(sweep_record_key(
          label, options.mechanism, sweep.configs[cfg].id(), sweep.epsilons[e], fit_seed));
      if (it != completed.end()) {
        metrics::MetricVector restored;
        for (metrics::Metric m : metrics::all_metrics()) {
          const auto found = it->second->metrics.find(std::string(metric_name(m)));
          if (found != it->second->metrics.end()) restored[m] = found->second;
        }
        cells[job] = restored;
        return;
      }
    }

    try {
      std::unique_ptr<dp::FittedSynthesizer> model;
      if (options.mechanism == "privbayes") {
        model = std::make_unique<dp::PrivBayesModel>(
            dp::privbayes_fit(data, budget, sweep.configs[cfg].privbayes, fit_seed));
      } else {
        model = std::make_unique<dp::NoisyMarginalsModel>(
            dp::noisy_marginals_fit(data, budget, fit_seed));
      }
      const Dataset synthetic =
          dp::synth_sample(*model, data.size(), rng::derive(fit_seed, 1));
      cells[job] = metrics::evaluate_quality(synthetic, ctx);
      if (sink && sink->append) {
        BenchmarkRecord record;
        record.method = label;
        record.mechanism = options.mechanism;
        record.dataset = label;
        record.config_id = sweep.configs[cfg].id();
        record.epsilon = sweep.epsilons[e];
        record.seed = fit_seed;
        for (metrics::Metric m : metrics::all_metrics())
          record.metrics[std::string(metric_name(m))] = (*cells[job])[m];
        std::lock_guard lock(sink_mutex);
        sink->append(record);
      }
    } catch (const Error&) {
      failed += 1;
    }
  });

  for (std::size_t cfg = 0; cfg < n_cfg; ++cfg) {
    for (std::size_t e = 0; e < n_eps; ++e) {
      metrics::MetricVector mean;
      std::size_t count = 0;
      for (std::size_t s = 0; s < n_seeds; ++s) {
        const auto& cell = cells[(cfg * n_eps + e) * n_seeds + s];
        if (!cell) continue;
        sweep.seed_values[cfg][e].push_back(*cell);
        for (std::size_t m = 0; m < metrics::kMetricCount; ++m)
          mean.values[m] += cell->values[m];
        ++count;
      }
      if (count == 0) {
        for (auto& v : mean.values) v = std::numeric_limits<double>::quiet_NaN();
      } else {
        for (auto& v : mean.values) v /= static_cast<double>(count);
      }
      sweep.values[cfg][e] = mean;
    }
  }
  sweep.failed_runs = failed.load();
  return sweep;
}

namespace {

std::vector<metrics::Metric> metrics_in_scope(const SynthSweepOptions& options) {
  std::vector<metrics::Metric> out;
  for (metrics::Metric m : metrics::all_metrics()) {
    if (options.target.empty() &&
        metric_group(m) == metrics::MetricGroup::Classification)
      continue;
    out.push_back(m);
  }
  return out;
}

/// Index of the best (lowest mean) config for a metric at an epsilon; ties
/// keep the earliest config in declared grid order. Returns nullopt when
/// every config is NaN.
std::optional<std::size_t> argmin_config(const SynthSweep& sweep, metrics::Metric metric,
                                         std::size_t eps_idx) {
  std::optional<std::size_t> best;
  for (std::size_t cfg = 0; cfg < sweep.configs.size(); ++cfg) {
    const double v = sweep.values[cfg][eps_idx][metric];
    if (std::isnan(v)) continue;
    if (!best || v < sweep.values[*best][eps_idx][metric]) best = cfg;
  }
  return best;
}

/// Chosen value for a metric at an epsilon. Seeds are averaged before the
/// argmin unless select_per_seed is set, in which case the best config is
/// picked independently per seed and the picked values are averaged.
std::optional<double> chosen_value(const SynthSweep& sweep, metrics::Metric metric,
                                   std::size_t eps_idx, bool select_per_seed) {
  if (!select_per_seed) {
    const auto cfg = argmin_config(sweep, metric, eps_idx);
    if (!cfg) return std::nullopt;
    return sweep.values[*cfg][eps_idx][metric];
  }
  std::size_t seeds = 0;
  for (const auto& per_cfg : sweep.seed_values)
    seeds = std::max(seeds, per_cfg[eps_idx].size());
  if (seeds == 0) return std::nullopt;
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t s = 0; s < seeds; ++s) {
    std::optional<double> best;
    for (std::size_t cfg = 0; cfg < sweep.configs.size(); ++cfg) {
      const auto& runs = sweep.seed_values[cfg][eps_idx];
      if (s >= runs.size()) continue;
      const double v = runs[s][metric];
      if (!best || v < *best) best = v;
    }
    if (best) {
      total += *best;
      ++counted;
    }
  }
  if (counted == 0) return std::nullopt;
  return total / static_cast<double>(counted);
}

}  // namespace

std::vector<DegradationRow> run_task2(
    const Dataset& private_data,
    const std::vector<std::pair<std::string, Dataset>>& candidates,
    const Task2Options& options, const RecordSink* sink) {
  const SynthSweep ref = evaluate_synth_sweep(private_data, options.sweep, "private", sink);
  const auto in_scope = metrics_in_scope(options.sweep);

  std::vector<DegradationRow> rows;
  for (const auto& [name, candidate] : candidates) {
    const SynthSweep cand = evaluate_synth_sweep(candidate, options.sweep, name, sink);

    // Per-seed group degradations accumulate across metrics for the group rows.
    for (std::size_t e = 0; e < ref.epsilons.size(); ++e) {
      struct GroupAccum {
        double sum = 0.0;
        std::size_t count = 0;
        std::vector<double> seed_sums;
        std::size_t seed_metrics = 0;
      };
      std::map<metrics::MetricGroup, GroupAccum> groups;

      for (metrics::Metric metric : in_scope) {
        const auto opt_cfg = argmin_config(ref, metric, e);
        const auto chosen_cfg = argmin_config(cand, metric, e);
        if (!opt_cfg || !chosen_cfg) continue;

        DegradationRow row;
        row.candidate = name;
        row.mechanism = options.sweep.mechanism;
        row.metric = std::string(metric_name(metric));
        row.epsilon = ref.epsilons[e];
        row.opt_config = ref.configs[*opt_cfg].id();
        row.chosen_config = ref.configs[*chosen_cfg].id();
        row.opt_value = ref.values[*opt_cfg][e][metric];
        row.chosen_value = ref.values[*chosen_cfg][e][metric];
        const double absolute = row.chosen_value - row.opt_value;
        row.relative = std::find(options.relative_metrics.begin(),
                                 options.relative_metrics.end(),
                                 row.metric) != options.relative_metrics.end() &&
                       row.opt_value > 1e-12;
        row.degradation = row.relative ? absolute / row.opt_value : absolute;

        // Matched-seed standard error on the private reference.
        const auto& opt_seeds = ref.seed_values[*opt_cfg][e];
        const auto& chosen_seeds = ref.seed_values[*chosen_cfg][e];
        const std::size_t matched = std::min(opt_seeds.size(), chosen_seeds.size());
        std::vector<double> diffs;
        for (std::size_t s = 0; s < matched; ++s)
          diffs.push_back(chosen_seeds[s][metric] - opt_seeds[s][metric]);
        row.std_error = std_error_of(diffs);

        auto& group = groups[metric_group(metric)];
        group.sum += absolute;
        group.count += 1;
        if (group.seed_sums.size() < diffs.size()) group.seed_sums.resize(diffs.size(), 0.0);
        for (std::size_t s = 0; s < diffs.size(); ++s) group.seed_sums[s] += diffs[s];
        group.seed_metrics += 1;

        rows.push_back(std::move(row));
      }

      for (const auto& [group, accum] : groups) {
        if (accum.count == 0) continue;
        DegradationRow row;
        row.candidate = name;
        row.mechanism = options.sweep.mechanism;
        row.metric = "group:" + std::string(group_name(group));
        row.epsilon = ref.epsilons[e];
        row.degradation = accum.sum / static_cast<double>(accum.count);
        std::vector<double> seed_means;
        for (double s : accum.seed_sums)
          seed_means.push_back(s / static_cast<double>(accum.seed_metrics));
        row.std_error = std_error_of(seed_means);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<Task3CandidateResult> run_task3(
    const Dataset& private_data,
    const std::vector<std::pair<std::string, Dataset>>& candidates,
    const SynthSweepOptions& options, const RecordSink* sink) {
  const SynthSweep ref = evaluate_synth_sweep(private_data, options, "private", sink);
  const auto in_scope = metrics_in_scope(options);

  std::vector<metrics::MetricGroup> group_order = {metrics::MetricGroup::Marginals,
                                                   metrics::MetricGroup::Correlations};
  if (!options.target.empty()) group_order.push_back(metrics::MetricGroup::Classification);

  std::vector<Task3CandidateResult> results;
  for (const auto& [name, candidate] : candidates) {
    const SynthSweep cand = evaluate_synth_sweep(candidate, options, name, sink);
    Task3CandidateResult out;
    out.name = name;

    for (metrics::MetricGroup group : group_order) {
      CurvePair curve;
      curve.candidate = name;
      curve.metric_group = std::string(group_name(group));
      for (std::size_t e = 0; e < ref.epsilons.size(); ++e) {
        double cand_sum = 0.0, priv_sum = 0.0;
        std::size_t count = 0;
        for (metrics::Metric metric : in_scope) {
          if (metric_group(metric) != group) continue;
          const auto chosen = chosen_value(cand, metric, e, options.select_per_seed);
          const auto opt = chosen_value(ref, metric, e, options.select_per_seed);
          if (!chosen || !opt)
            throw Error("task3: missing epsilon point for metric " +
                        std::string(metric_name(metric)));
          cand_sum += *chosen;
          priv_sum += *opt;
          ++count;
        }
        curve.epsilons.push_back(ref.epsilons[e]);
        curve.candidate_values.push_back(cand_sum / static_cast<double>(count));
        curve.private_values.push_back(priv_sum / static_cast<double>(count));
      }
      for (std::size_t i = 0; i < curve.epsilons.size(); ++i) {
        const double diff = curve.candidate_values[i] - curve.private_values[i];
        curve.l1 += std::fabs(diff);
        curve.l2 += diff * diff;
      }
      curve.l2 = std::sqrt(curve.l2);
      out.mean_l1 += curve.l1;
      out.mean_l2 += curve.l2;
      out.groups.push_back(std::move(curve));
    }
    out.mean_l1 /= static_cast<double>(out.groups.size());
    out.mean_l2 /= static_cast<double>(out.groups.size());
    results.push_back(std::move(out));
  }
  return results;
}

}  // namespace surropub::bench
