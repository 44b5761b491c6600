#include <algorithm>

#include "surropub/agent.hpp"
#include "surropub/metrics.hpp"
#include "surropub/rng.hpp"

namespace surropub {

Dataset mix_uniform(const std::vector<Dataset>& datasets, std::size_t target_m,
                    std::uint64_t seed) {
  if (datasets.empty()) throw Error("mix_uniform: no datasets");
  if (target_m < 1) throw Error("target_m must be at least 1");
  const auto& schema = datasets.front().schema();
  std::size_t pool = 0;
  for (const auto& d : datasets) {
    if (!(d.schema() == schema)) throw Error("mix_uniform: datasets must share a schema");
    pool += d.size();
  }
  if (pool == 0) throw Error("mix_uniform: all datasets are empty");

  Dataset out(datasets.front().schema_ptr(), DatasetRole::Surrogate);
  out.reserve(target_m);
  auto eng = rng::make_engine(seed, /*stream=*/30);
  for (std::size_t i = 0; i < target_m; ++i) {
    std::size_t pick = static_cast<std::size_t>(rng::uniform_below(eng, pool));
    for (const auto& d : datasets) {
      if (pick < d.size()) {
        out.add(d.record(pick));
        break;
      }
      pick -= d.size();
    }
  }
  return out;
}

double facility_location_value(const std::vector<std::vector<double>>& similarity,
                               const std::vector<std::size_t>& selected) {
  if (selected.empty()) return 0.0;
  double value = 0.0;
  for (std::size_t i = 0; i < similarity.size(); ++i) {
    double best = 0.0;
    for (std::size_t j : selected) best = std::max(best, similarity[i][j]);
    value += best;
  }
  return value;
}

MaxCoverageResult mix_max_coverage(const std::vector<Dataset>& datasets, std::size_t k,
                                   std::size_t target_m, std::uint64_t seed) {
  if (datasets.empty()) throw Error("mix_max_coverage: no datasets");
  if (k < 1 || k > datasets.size())
    throw Error("mix_max_coverage: k must be in [1, " + std::to_string(datasets.size()) + "]");

  const std::size_t n = datasets.size();
  std::vector<std::vector<double>> tvs(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double sim = 1.0 - metrics::tvd(datasets[i], datasets[j]);
      tvs[i][j] = sim;
      tvs[j][i] = sim;
    }

  // Greedy facility location; ties broken by lowest index for determinism.
  MaxCoverageResult result{Dataset(datasets.front().schema_ptr(), DatasetRole::Surrogate), {}, 0.0};
  std::vector<bool> chosen(n, false);
  for (std::size_t round = 0; round < k; ++round) {
    double best_value = -1.0;
    std::size_t best_j = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (chosen[j]) continue;
      auto trial = result.selected;
      trial.push_back(j);
      const double value = facility_location_value(tvs, trial);
      if (value > best_value + 1e-15) {
        best_value = value;
        best_j = j;
      }
    }
    chosen[best_j] = true;
    result.selected.push_back(best_j);
    result.objective = best_value;
  }

  std::vector<Dataset> picked;
  picked.reserve(result.selected.size());
  for (std::size_t j : result.selected) picked.push_back(datasets[j]);
  result.data = mix_uniform(picked, target_m, seed);
  return result;
}

Dataset mix(const std::vector<Dataset>& datasets, const MixSpec& spec) {
  if (spec.mode == MixSpec::Mode::Uniform)
    return mix_uniform(datasets, spec.target_m, spec.seed);
  return mix_max_coverage(datasets, spec.k, spec.target_m, spec.seed).data;
}

}  // namespace surropub
