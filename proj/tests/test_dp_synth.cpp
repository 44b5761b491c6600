#include <doctest.h>

#include <cmath>

#include "surropub/dp/synthesizer.hpp"
#include "surropub/metrics.hpp"
#include "test_support.hpp"

using namespace surropub;
using namespace surropub::dp;
namespace st = surropub::testing;

namespace {

std::vector<double> column_frequencies(const Dataset& data, std::size_t col) {
  std::vector<double> freq(data.schema().variable(col).cardinality(), 0.0);
  for (const auto& rec : data.records()) freq[rec.cells[col]] += 1.0;
  for (auto& f : freq) f /= static_cast<double>(data.size());
  return freq;
}

double mi_of_counts(const std::vector<std::vector<double>>& counts) {
  double n = 0.0;
  std::vector<double> row(counts.size(), 0.0), col(counts[0].size(), 0.0);
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (std::size_t j = 0; j < counts[0].size(); ++j) {
      n += counts[i][j];
      row[i] += counts[i][j];
      col[j] += counts[i][j];
    }
  double mi = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (std::size_t j = 0; j < counts[0].size(); ++j)
      if (counts[i][j] > 0.0)
        mi += counts[i][j] / n * std::log2(counts[i][j] * n / (row[i] * col[j]));
  return mi;
}

}  // namespace

TEST_CASE("mutual_info: independent, copied, and empty parent sets") {
  auto schema = st::make_schema({2, 2});
  SUBCASE("independent columns have near-zero MI at n=1e5") {
    const auto data = gen_uniform(schema, {100'000, 7});
    const std::size_t parents[] = {0};
    CHECK(mutual_info(data, 1, parents) < 0.01);
  }
  SUBCASE("a copied binary column carries one bit") {
    Dataset data(schema);
    auto eng = rng::make_engine(3);
    for (int i = 0; i < 100'000; ++i) {
      const auto v = static_cast<std::uint16_t>(rng::uniform_below(eng, 2));
      data.add(st::make_record({v, v}));
    }
    const std::size_t parents[] = {0};
    CHECK(mutual_info(data, 1, parents) == doctest::Approx(1.0).epsilon(0.01));
  }
  SUBCASE("empty parent set is exactly zero") {
    const auto data = st::random_dataset(schema, 50, 1);
    CHECK(mutual_info(data, 0, {}) == 0.0);
  }
  SUBCASE("agrees with a direct plug-in computation") {
    const auto data = st::random_dataset(schema, 40, 9);
    std::vector<std::vector<double>> counts(2, std::vector<double>(2, 0.0));
    for (const auto& rec : data.records()) counts[rec.cells[1]][rec.cells[0]] += 1.0;
    const std::size_t parents[] = {0};
    CHECK(mutual_info(data, 1, parents) ==
          doctest::Approx(mi_of_counts(counts)).epsilon(1e-12));
  }
}

TEST_CASE("mi sensitivity bound holds for replace-one on small binary pairs") {
  auto schema = st::make_schema({2, 2});
  const std::size_t parents[] = {0};
  // All count vectors (c00, c01, c10, c11) with n <= 12, all single-record swaps.
  // The full n <= 20 sweep runs in the acceptance suite.
  for (std::size_t n = 2; n <= 12; ++n) {
    const double bound = mi_sensitivity_bits(n, 2, 2);
    for (std::size_t c0 = 0; c0 <= n; ++c0)
      for (std::size_t c1 = 0; c0 + c1 <= n; ++c1)
        for (std::size_t c2 = 0; c0 + c1 + c2 <= n; ++c2) {
          const std::size_t c3 = n - c0 - c1 - c2;
          const std::size_t counts[4] = {c0, c1, c2, c3};
          Dataset data(schema);
          for (std::size_t cell = 0; cell < 4; ++cell)
            for (std::size_t k = 0; k < counts[cell]; ++k)
              data.add(st::make_record({static_cast<std::uint16_t>(cell >> 1),
                                        static_cast<std::uint16_t>(cell & 1)}));
          const double base = mutual_info(data, 1, parents);
          for (std::size_t from = 0; from < 4; ++from) {
            if (counts[from] == 0) continue;
            for (std::size_t to = 0; to < 4; ++to) {
              if (to == from) continue;
              Dataset neighbor(schema);
              for (std::size_t cell = 0; cell < 4; ++cell) {
                std::size_t reps = counts[cell];
                if (cell == from) --reps;
                if (cell == to) ++reps;
                for (std::size_t k = 0; k < reps; ++k)
                  neighbor.add(st::make_record({static_cast<std::uint16_t>(cell >> 1),
                                                static_cast<std::uint16_t>(cell & 1)}));
              }
              CHECK(std::fabs(mutual_info(neighbor, 1, parents) - base) <= bound + 1e-12);
            }
          }
        }
  }
}

TEST_CASE("exp_mech_select sampling distribution") {
  auto eng = rng::make_engine(12);
  SUBCASE("equal scores split evenly") {
    const double scores[] = {1.0, 1.0};
    std::size_t first = 0;
    const int draws = 10'000;
    for (int i = 0; i < draws; ++i)
      if (exp_mech_select(scores, 1.0, 1.0, eng) == 0) ++first;
    CHECK(std::fabs(first / static_cast<double>(draws) - 0.5) < 0.015);
  }
  SUBCASE("epsilon -> infinity selects the argmax always") {
    const double scores[] = {0.2, 0.9, 0.5};
    for (int i = 0; i < 1'000; ++i) CHECK(exp_mech_select(scores, 1e6, 1.0, eng) == 1);
  }
  SUBCASE("scores (0,1) at eps=2, sens=1 give probability ratio e") {
    const double scores[] = {0.0, 1.0};
    std::size_t high = 0;
    const int draws = 100'000;
    for (int i = 0; i < draws; ++i)
      if (exp_mech_select(scores, 2.0, 1.0, eng) == 1) ++high;
    const double ratio = static_cast<double>(high) / static_cast<double>(draws - high);
    CHECK(std::fabs(ratio - std::exp(1.0)) / std::exp(1.0) < 0.05);
  }
  SUBCASE("preconditions") {
    const double scores[] = {1.0};
    CHECK_THROWS_AS(exp_mech_select({}, 1.0, 1.0, eng), Error);
    CHECK_THROWS_AS(exp_mech_select(scores, 1.0, 0.0, eng), Error);
  }
}

TEST_CASE("privbayes_fit at near-infinite budget recovers 1-way marginals") {
  auto schema = st::make_schema({2, 3, 2, 2});
  const auto net = build_random_bn(schema, 2, 1.0, 5);
  const auto priv = sample_bn(net, {10'000, 6});
  PrivBayesParams params;
  const auto model = privbayes_fit(priv, {1e6, 0.0}, params, 3);
  const auto synth = synth_sample(model, 100'000, 4);
  for (std::size_t c = 0; c < schema->variable_count(); ++c) {
    const auto real = column_frequencies(priv, c);
    const auto got = column_frequencies(synth, c);
    double err = 0.0;
    for (std::size_t v = 0; v < real.size(); ++v) err += std::fabs(real[v] - got[v]);
    CHECK(err / static_cast<double>(real.size()) < 0.01);
  }
}

TEST_CASE("k_max is non-increasing in theta and honors the SNR inequality") {
  auto schema = st::make_schema({2, 3, 2, 4, 2, 3});
  const std::size_t n = 5'000;
  std::size_t last = SIZE_MAX;
  for (double theta : {2.0, 8.0, 32.0, 64.0}) {
    const std::size_t k = privbayes_k_max(*schema, n, 0.5, theta);
    CHECK(k <= last);
    last = k;
  }
  const std::size_t k = privbayes_k_max(*schema, n, 0.5, 2.0);
  std::vector<double> cards;
  for (const auto& v : schema->variables()) cards.push_back(double(v.cardinality()));
  std::sort(cards.rbegin(), cards.rend());
  double cells = 1.0;
  for (std::size_t i = 0; i <= k; ++i) cells *= cards[i];
  CHECK(double(n) * 0.5 / (2.0 * 6.0 * cells) >= 2.0);
}

TEST_CASE("privbayes budget ledger accounts exactly") {
  auto schema = st::make_schema({2, 2, 3});
  const auto priv = st::random_dataset(schema, 500, 1);
  PrivBayesParams params;
  params.epsilon_split = 0.5;
  const auto model = privbayes_fit(priv, {1.0, 0.0}, params, 9);
  const auto& ledger = model.ledger();
  CHECK(ledger.epsilon_structure == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ledger.epsilon_structure + ledger.epsilon_params == ledger.epsilon_total);
  CHECK(ledger.epsilon_total == 1.0);
  const double expected_scale = 2.0 * 3.0 / ledger.epsilon_params;
  double structure_share = 0.0, param_share = 0.0;
  for (const auto& entry : ledger.entries) {
    if (entry.label.rfind("params:", 0) == 0) {
      CHECK(entry.laplace_scale == doctest::Approx(expected_scale));
      param_share += entry.epsilon_share;
    } else {
      structure_share += entry.epsilon_share;
    }
  }
  CHECK(structure_share == doctest::Approx(ledger.epsilon_structure));
  CHECK(param_share == doctest::Approx(ledger.epsilon_params));
}

TEST_CASE("privbayes rejects approximate budgets and is deterministic") {
  auto schema = st::make_schema({2, 2});
  const auto priv = st::random_dataset(schema, 100, 1);
  CHECK_THROWS_AS(privbayes_fit(priv, {1.0, 1e-5}, {}, 1), Error);
  const auto a = privbayes_fit(priv, {1.0, 0.0}, {}, 7);
  const auto b = privbayes_fit(priv, {1.0, 0.0}, {}, 7);
  CHECK(a.serialize() == b.serialize());
  CHECK(synth_sample(a, 50, 2).records() == synth_sample(b, 50, 2).records());
}

TEST_CASE("noisy_marginals_fit near-noiseless matches the univariate distributions") {
  auto schema = st::make_schema({3, 2});
  const auto priv = st::random_dataset(schema, 5'000, 11);
  const auto model = noisy_marginals_fit(priv, {1e6, 0.0}, 3);
  const auto synth_direct = gen_univariate(priv, {200'000, 5});
  const auto synth_noisy = synth_sample(model, 200'000, 5);
  for (std::size_t c = 0; c < 2; ++c) {
    const auto a = column_frequencies(synth_direct, c);
    const auto b = column_frequencies(synth_noisy, c);
    for (std::size_t v = 0; v < a.size(); ++v) CHECK(std::fabs(a[v] - b[v]) < 0.01);
  }
}

TEST_CASE("noisy_marginals at tiny epsilon still emits a normalized sampler") {
  auto schema = st::make_schema({2});
  const auto priv = st::random_dataset(schema, 100, 2);
  const auto model = noisy_marginals_fit(priv, {0.01, 0.0}, 4);
  const auto& hist = model.columns()[0];
  double sum = 0.0;
  for (double p : hist) {
    CHECK(p >= 0.0);
    sum += p;
  }
  CHECK(sum == doctest::Approx(1.0));
  CHECK(noisy_marginals_fit(priv, {0.01, 0.0}, 4).columns() == model.columns());
}

TEST_CASE("laplace noise moments match the configured scale") {
  // Synthesizers draw from rng::laplace at the ledger's scale; check the
  // generator's first two moments at one such scale.
  const double scale = 2.0 * 3.0 / 0.5;  // 2d/eps2 for d=3, eps2=0.5
  auto eng = rng::make_engine(99);
  const int n = 10'000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng::laplace(eng, scale);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double variance = sum_sq / n - mean * mean;
  CHECK(std::fabs(mean) < 3.0 * scale * std::sqrt(2.0) / std::sqrt(double(n)));
  CHECK(std::fabs(variance - 2.0 * scale * scale) / (2.0 * scale * scale) < 0.10);
}

TEST_CASE("synth_sample sizes and determinism") {
  auto schema = st::make_schema({2, 2});
  const auto priv = st::random_dataset(schema, 300, 8);
  const auto model = noisy_marginals_fit(priv, {1.0, 0.0}, 2);
  CHECK(synth_sample(model, priv.size(), 1).size() == priv.size());
  CHECK_THROWS_AS(synth_sample(model, 0, 1), Error);
  CHECK(synth_sample(model, 20, 9).records() == synth_sample(model, 20, 9).records());
}

TEST_CASE("privbayes output improves from eps=1 to a near-noiseless budget (smoke)") {
  // The full 10-seed strict-monotonicity check runs in the acceptance suite.
  auto schema = st::make_schema({2, 2, 2, 2, 2});
  BayesNet truth(schema);
  truth.add_node(0, {}, {{0.5, 0.5}});
  truth.add_node(1, {0}, {{0.8, 0.2}, {0.2, 0.8}});
  truth.add_node(2, {1}, {{0.7, 0.3}, {0.3, 0.7}});
  truth.add_node(3, {0}, {{0.6, 0.4}, {0.4, 0.6}});
  truth.add_node(4, {2}, {{0.9, 0.1}, {0.1, 0.9}});
  const auto priv = sample_bn(truth, {5'000, 31});
  const auto error_at = [&](double eps) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto model = privbayes_fit(priv, {eps, 0.0}, {}, seed);
      const auto synth = synth_sample(model, priv.size(), seed + 100);
      total += metrics::avg_kway_error(priv, synth, 3).avg;
    }
    return total / 3.0;
  };
  CHECK(error_at(1.0) > error_at(1e6));
}
