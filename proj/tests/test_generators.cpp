#include <doctest.h>

#include <cmath>

#include "surropub/bayes_net.hpp"
#include "test_support.hpp"

using namespace surropub;
namespace st = surropub::testing;

namespace {

std::vector<double> column_frequencies(const Dataset& data, std::size_t col) {
  std::vector<double> freq(data.schema().variable(col).cardinality(), 0.0);
  for (const auto& rec : data.records()) freq[rec.cells[col]] += 1.0;
  for (auto& f : freq) f /= static_cast<double>(data.size());
  return freq;
}

}  // namespace

TEST_CASE("gen_uniform hits 0.5 +/- 0.01 per value on a binary variable at m=1e5") {
  auto schema = st::make_schema({2});
  const auto data = gen_uniform(schema, {100'000, 42});
  const auto freq = column_frequencies(data, 0);
  CHECK(std::fabs(freq[0] - 0.5) < 0.01);
  CHECK(std::fabs(freq[1] - 0.5) < 0.01);
}

TEST_CASE("gen_uniform on a size-1 domain emits identical records") {
  auto schema = st::make_schema({1, 1});
  const auto data = gen_uniform(schema, {50, 3});
  for (const auto& rec : data.records()) CHECK(rec == st::make_record({0, 0}));
}

TEST_CASE("gen_uniform is deterministic per seed") {
  auto schema = st::make_schema({4, 3, 2});
  CHECK(gen_uniform(schema, {200, 9}).records() == gen_uniform(schema, {200, 9}).records());
  CHECK(gen_uniform(schema, {200, 9}).records() != gen_uniform(schema, {200, 10}).records());
}

TEST_CASE("gen_univariate applies round-then-normalize to column frequencies") {
  auto schema = st::make_schema({2});
  SUBCASE("frequencies (1/3, 2/3) sample as (0.33, 0.67)") {
    std::vector<std::vector<std::uint16_t>> rows;
    for (int i = 0; i < 99; ++i)
      rows.push_back({static_cast<std::uint16_t>(i % 3 != 0)});  // exactly 1/3 zeros
    const auto priv = st::make_dataset(schema, rows);
    const auto synth = gen_univariate(priv, {200'000, 5});
    const auto freq = column_frequencies(synth, 0);
    CHECK(std::fabs(freq[0] - 0.33) < 0.01);
    CHECK(std::fabs(freq[1] - 0.67) < 0.01);
  }
  SUBCASE("one-value column always emits that value") {
    auto one = st::make_schema({3});
    std::vector<std::vector<std::uint16_t>> rows(20, std::vector<std::uint16_t>{2});
    const auto synth = gen_univariate(st::make_dataset(one, rows), {100, 1});
    for (const auto& rec : synth.records()) CHECK(rec.cells[0] == 2);
  }
  SUBCASE("(0.5, 0.5) is a fixed point of the rounding") {
    std::vector<std::vector<std::uint16_t>> rows;
    for (int i = 0; i < 50; ++i) rows.push_back({0});
    for (int i = 0; i < 50; ++i) rows.push_back({1});
    const auto synth = gen_univariate(st::make_dataset(schema, rows), {100'000, 5});
    const auto freq = column_frequencies(synth, 0);
    CHECK(std::fabs(freq[0] - 0.5) < 0.01);
  }
  SUBCASE("empty dataset errors") {
    CHECK_THROWS_AS(gen_univariate(Dataset(schema), {10, 1}), Error);
  }
}

TEST_CASE("build_random_bn respects the in-degree cap exhaustively") {
  auto schema = st::make_schema({2, 3, 2, 4, 2, 3, 2, 2, 3, 2});
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto net = build_random_bn(schema, 5, 1.0, seed);
    REQUIRE(net.node_count() == 10);
    for (std::size_t i = 0; i < net.node_count(); ++i) {
      CHECK(net.parents_at(i).size() <= std::min<std::size_t>(5, i));
      // Parents precede the child in node order.
      for (std::size_t p : net.parents_at(i)) {
        bool found = false;
        for (std::size_t j = 0; j < i; ++j)
          if (net.variable_at(j) == p) found = true;
        CHECK(found);
      }
    }
  }
}

TEST_CASE("build_random_bn CPT rows are Dirichlet draws on the open simplex") {
  auto schema = st::make_schema({3, 3, 3});
  const auto net = build_random_bn(schema, 5, 1.0, 77);
  for (std::size_t pos = 0; pos < net.node_count(); ++pos) {
    for (const auto& row : net.cpt_at(pos)) {
      double sum = 0.0;
      for (double w : row) {
        CHECK(w > 0.0);
        CHECK(w < 1.0);
        sum += w;
      }
      CHECK(std::fabs(sum - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("build_random_bn on a 1-variable schema has no edges") {
  auto schema = st::make_schema({4});
  const auto net = build_random_bn(schema, 5, 1.0, 1);
  REQUIRE(net.node_count() == 1);
  CHECK(net.parents_at(0).empty());
  CHECK(net.cpt_at(0).size() == 1);
}

TEST_CASE("sample_bn with one-hot CPTs produces a single possible record") {
  auto schema = st::make_schema({2, 2});
  BayesNet net(schema);
  net.add_node(0, {}, {{0.0, 1.0}});
  net.add_node(1, {0}, {{1.0, 0.0}, {0.0, 1.0}});  // copies A
  const auto data = sample_bn(net, {100, 4});
  for (const auto& rec : data.records()) CHECK(rec == st::make_record({1, 1}));
}

TEST_CASE("sample_bn empirical conditional matches the CPT on a chain") {
  auto schema = st::make_schema({2, 2});
  BayesNet net(schema);
  net.add_node(0, {}, {{0.5, 0.5}});
  net.add_node(1, {0}, {{0.7, 0.3}, {0.1, 0.9}});
  const auto data = sample_bn(net, {100'000, 8});
  std::size_t a1 = 0, a1b1 = 0;
  for (const auto& rec : data.records()) {
    if (rec.cells[0] == 1) {
      ++a1;
      if (rec.cells[1] == 1) ++a1b1;
    }
  }
  const double conditional = static_cast<double>(a1b1) / static_cast<double>(a1);
  CHECK(std::fabs(conditional - 0.9) < 0.01);
}

TEST_CASE("sample_bn is deterministic per seed") {
  auto schema = st::make_schema({3, 2, 4});
  const auto net = build_random_bn(schema, 2, 1.0, 5);
  CHECK(sample_bn(net, {500, 6}).records() == sample_bn(net, {500, 6}).records());
}

TEST_CASE("BayesNet serializes and reloads identically") {
  auto schema = st::make_schema({2, 3, 2});
  const auto net = build_random_bn(schema, 2, 1.0, 11);
  const auto again = BayesNet::deserialize(schema, net.serialize());
  REQUIRE(again.node_count() == net.node_count());
  for (std::size_t pos = 0; pos < net.node_count(); ++pos) {
    CHECK(again.variable_at(pos) == net.variable_at(pos));
    CHECK(again.parents_at(pos) == net.parents_at(pos));
    CHECK(again.cpt_at(pos) == net.cpt_at(pos));
  }
  CHECK(sample_bn(again, {100, 3}).records() == sample_bn(net, {100, 3}).records());
}
