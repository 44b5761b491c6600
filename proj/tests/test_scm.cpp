#include <doctest.h>

#include <cmath>
#include <map>

#include "surropub/scm.hpp"
#include "test_support.hpp"

using namespace surropub;
namespace st = surropub::testing;

TEST_CASE("parse_scm builds a two-variable model with an edge") {
  auto schema = st::make_schema({2, 2});  // A, B
  const auto model = parse_scm(
      "var A ~ categorical{1: 0.5, 2: 0.5};\n"
      "var B | A ~ when A == 1: categorical{1: 0.9, 2: 0.1} "
      "else categorical{1: 0.2, 2: 0.8};\n",
      schema);
  CHECK(model.equation_of(0).parents.empty());
  CHECK(model.equation_of(1).parents == std::vector<std::size_t>{0});
  CHECK(model.equation_of(1).clauses.size() == 2);
  CHECK(model.topo_order() == std::vector<std::size_t>{0, 1});
}

TEST_CASE("parse_scm rejects a guard on a non-parent") {
  auto schema = st::make_schema({2, 2, 2});  // A, B, C
  CHECK_THROWS_WITH_AS(parse_scm("var A ~ bernoulli(0.5);\n"
                                 "var B ~ bernoulli(0.5);\n"
                                 "var C | A ~ when B == 1: bernoulli(0.1) else bernoulli(0.9);\n",
                                 schema),
                       doctest::Contains("not a declared parent"), ParseError);
}

TEST_CASE("parse_scm rejects non-normalized weights") {
  auto schema = st::make_schema({2});
  CHECK_THROWS_WITH_AS(parse_scm("var A ~ categorical{1: 0.6, 2: 0.6};", schema),
                       doctest::Contains("sum"), ParseError);
}

TEST_CASE("parse_scm reports missing default clause, unknown names and codes") {
  auto schema = st::make_schema({2, 2});
  CHECK_THROWS_WITH_AS(
      parse_scm("var A ~ bernoulli(0.5); var B | A ~ when A == 1: bernoulli(0.2);", schema),
      doctest::Contains("default"), ParseError);
  CHECK_THROWS_WITH_AS(parse_scm("var Z ~ bernoulli(0.5);", schema),
                       doctest::Contains("unknown variable"), ParseError);
  CHECK_THROWS_WITH_AS(parse_scm("var A ~ categorical{7: 1.0};", schema),
                       doctest::Contains("no code '7'"), ParseError);
  CHECK_THROWS_WITH_AS(parse_scm("var A ~ bernoulli(0.5);", schema),
                       doctest::Contains("no equation"), ParseError);
}

TEST_CASE("parse_scm detects cycles") {
  auto schema = st::make_schema({2, 2});
  CHECK_THROWS_WITH_AS(
      parse_scm("var A | B ~ when B == 1: bernoulli(0.2) else bernoulli(0.5);\n"
                "var B | A ~ when A == 1: bernoulli(0.3) else bernoulli(0.6);\n",
                schema),
      doctest::Contains("cycle"), ParseError);
}

TEST_CASE("draft parse collects free parameters instead of failing") {
  auto schema = st::make_schema({2, 2});
  const auto draft = parse_scm_draft(
      "var A ~ categorical{1: p_low, 2: p_high};\nvar B ~ bernoulli(q);\n", schema,
      /*allow_symbolic_weights=*/true);
  CHECK(draft.equations.size() == 2);
  CHECK(draft.free_parameters == std::vector<std::string>{"p_low", "p_high", "q"});
  CHECK_THROWS_WITH_AS(parse_scm_draft("var A ~ categorical{1: p_low, 2: 0.5};", schema,
                                       /*allow_symbolic_weights=*/false),
                       doctest::Contains("free parameter"), ParseError);
}

TEST_CASE("comments and whitespace are insignificant") {
  auto schema = st::make_schema({2});
  const auto model = parse_scm("# a root variable\nvar A ~\n   bernoulli( 0.25 )  ;\n", schema);
  // bernoulli(p): p is the mass of the second listed value.
  CHECK(model.equation_of(0).clauses[0].dist.weights[1] == doctest::Approx(0.25));
  CHECK(model.equation_of(0).clauses[0].dist.weights[0] == doctest::Approx(0.75));
}

TEST_CASE("validate_dag finds orders and concrete cycles") {
  SUBCASE("chain") {
    const auto check = validate_dag({{}, {0}, {1}});
    REQUIRE(check.ok);
    CHECK(check.topo_order == std::vector<std::size_t>{0, 1, 2});
  }
  SUBCASE("two-cycle") {
    const auto check = validate_dag({{1}, {0}});
    REQUIRE_FALSE(check.ok);
    REQUIRE(check.cycle.size() == 3);
    CHECK(check.cycle.front() == check.cycle.back());
  }
  SUBCASE("random generator output is always acyclic") {
    auto schema = st::make_schema({2, 2, 2, 2, 2, 2, 2, 2, 2, 2});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto net = build_random_bn(schema, 5, 1.0, seed);
      CHECK(validate_dag(net.parents_by_variable()).ok);
    }
  }
}

TEST_CASE("eval_constraint on implication-style predicates") {
  auto schema = st::make_schema({2, 5});  // A (age band), B (education)
  const auto draft = parse_scm_draft(
      "constraint \"young implies low education\": not (A == 1) or B in {1, 2};", schema,
      false);
  REQUIRE(draft.constraints.size() == 1);
  const auto& c = draft.constraints[0];
  CHECK(eval_constraint(c, st::make_record({0, 0})));       // A=1, B=1 -> true
  CHECK_FALSE(eval_constraint(c, st::make_record({0, 4}))); // A=1, B=5 -> false
  CHECK(eval_constraint(c, st::make_record({1, 4})));       // A=2 -> antecedent false

  // Tautology: a full-domain membership test holds on every record.
  const auto full = parse_scm_draft("constraint \"total\": A in {1, 2};", schema, false);
  for (std::uint16_t a = 0; a < 2; ++a)
    CHECK(eval_constraint(full.constraints[0], st::make_record({a, 0})));
}

TEST_CASE("sample_scm with satisfied-by-construction constraints has zero rejections") {
  auto schema = st::make_schema({2, 2});
  const auto model = parse_scm(
      "var A ~ bernoulli(0.5);\n"
      "var B | A ~ when A == 1: categorical{2: 1.0} else bernoulli(0.5);\n"
      "constraint \"B is 2 when A is 1\": not (A == 1) or B == 2;\n",
      schema);
  const auto result = sample_scm(model, {2'000, 3}, 10);
  CHECK(result.stats.rejected_attempts == 0);
  CHECK(result.stats.unrepaired_records == 0);
  // A's code "1" is value index 0; the guarded clause forces B to code "2".
  for (const auto& rec : result.data.records())
    if (rec.cells[0] == 0) CHECK(rec.cells[1] == 1);
}

TEST_CASE("sample_scm rejection rate matches a 50% contradictory constraint") {
  auto schema = st::make_schema({2});
  // A is a fair coin but the constraint demands A == 1: reject half the draws.
  const auto model = parse_scm(
      "var A ~ bernoulli(0.5);\nconstraint \"heads only\": A == 1;\n", schema);
  const std::size_t m = 20'000;
  const auto result = sample_scm(model, {m, 9}, 10);
  const double total_attempts =
      static_cast<double>(m + result.stats.rejected_attempts);
  const double rejection_rate =
      static_cast<double>(result.stats.rejected_attempts) / total_attempts;
  CHECK(std::fabs(rejection_rate - 0.5) < 0.02);
  // Acceptance within max_attempts=10 fails with probability 0.5^10 per record.
  const double unrepaired_rate =
      static_cast<double>(result.stats.unrepaired_records) / static_cast<double>(m);
  CHECK(std::fabs(unrepaired_rate - std::pow(0.5, 10)) < 0.005);
  // bernoulli(0.5): value "2" is the p-mass value; constraint demands A==1.
  for (std::size_t i = 0; i < result.data.size(); ++i)
    if (result.satisfied[i]) CHECK(result.data.record(i).cells[0] == 0);
}

TEST_CASE("sample_scm errors when the constraint set is unsatisfiable") {
  auto schema = st::make_schema({2});
  const auto model = parse_scm(
      "var A ~ bernoulli(0.5);\nconstraint \"impossible\": A == 1 and A == 2;\n", schema);
  CHECK_THROWS_WITH_AS(sample_scm(model, {50, 1}, 5), doctest::Contains("unsatisfiable"),
                       Error);
}

TEST_CASE("sample_scm is deterministic per seed and schema-valid") {
  auto schema = st::make_schema({3, 2, 4});
  const auto model = parse_scm(
      "var A ~ categorical{1: 0.2, 2: 0.3, 3: 0.5};\n"
      "var B | A ~ when A in {1, 2}: bernoulli(0.9) else bernoulli(0.1);\n"
      "var C | B ~ when B == 2: uniform{1, 4} else uniform{2, 3};\n",
      schema);
  const auto a = sample_scm(model, {500, 12}, 10);
  const auto b = sample_scm(model, {500, 12}, 10);
  CHECK(a.data.records() == b.data.records());
  for (const auto& rec : a.data.records()) {
    std::vector<std::string> tokens;
    for (std::size_t c = 0; c < schema->variable_count(); ++c)
      tokens.push_back(schema->variable(c).code(rec.cells[c]));
    CHECK(validate_record(*schema, tokens).ok());
  }
}

TEST_CASE("parent-ignoring equations sample as independent columns") {
  auto schema = st::make_schema({3, 4});
  const auto model = parse_scm(
      "var A ~ categorical{1: 0.5, 2: 0.3, 3: 0.2};\n"
      "var B | A ~ categorical{1: 0.1, 2: 0.2, 3: 0.3, 4: 0.4};\n",  // guard-free
      schema);
  const auto sample = sample_scm(model, {100'000, 21}, 1);

  // Total variation between the empirical joint and the product of its
  // marginals should be near zero.
  std::map<std::pair<int, int>, double> joint;
  std::vector<double> pa(3, 0.0), pb(4, 0.0);
  const double n = static_cast<double>(sample.data.size());
  for (const auto& rec : sample.data.records()) {
    joint[{rec.cells[0], rec.cells[1]}] += 1.0;
    pa[rec.cells[0]] += 1.0;
    pb[rec.cells[1]] += 1.0;
  }
  double tv = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 4; ++b)
      tv += 0.5 * std::fabs(joint[{a, b}] / n - (pa[a] / n) * (pb[b] / n));
  CHECK(tv < 0.02);
}

TEST_CASE("guard evaluation is total: one clause fires for every parent configuration") {
  auto schema = st::make_schema({4, 5, 10, 3});  // 4*5*10 = 200 configs for D
  const auto model = parse_scm(
      "var A ~ uniform{1, 2, 3, 4};\n"
      "var B ~ categorical{1: 0.2, 2: 0.2, 3: 0.2, 4: 0.2, 5: 0.2};\n"
      "var C ~ uniform{1, 10};\n"
      "var D | A, B, C ~\n"
      "  when A == 1 and B in {1, 2}: uniform{1}\n"
      "  when C == 10 or B == 5: uniform{2}\n"
      "  else uniform{3};\n",
      schema);
  const auto& eq = model.equation_of(3);
  Record rec;
  rec.cells.assign(4, 0);
  std::size_t checked = 0;
  for (std::uint16_t a = 0; a < 4; ++a)
    for (std::uint16_t b = 0; b < 5; ++b)
      for (std::uint16_t c = 0; c < 10; ++c) {
        rec.cells[0] = a;
        rec.cells[1] = b;
        rec.cells[2] = c;
        std::size_t fired = 0;
        for (const auto& clause : eq.clauses) {
          if (!clause.guard || clause.guard->eval(rec)) {
            ++fired;
            break;  // first match wins
          }
        }
        CHECK(fired == 1);
        ++checked;
      }
  CHECK(checked == 200);
}

TEST_CASE("model round-trips through its DSL rendering") {
  auto schema = st::make_schema({2, 3});
  const auto model = parse_scm(
      "var A ~ bernoulli(0.3);\n"
      "var B | A ~ when A == 2: categorical{1: 0.25, 2: 0.25, 3: 0.5} else uniform{1, 3};\n"
      "constraint \"no mid B for A=1\": not (A == 1) or B != 2;\n",
      schema);
  const auto again = parse_scm(model.to_dsl(), schema);
  CHECK(again.to_dsl() == model.to_dsl());
  const auto s1 = sample_scm(model, {200, 5}, 10);
  const auto s2 = sample_scm(again, {200, 5}, 10);
  CHECK(s1.data.records() == s2.data.records());

  // Weights without finite decimal representations survive the round trip.
  auto thirds = st::make_schema({3});
  Equation eq;
  eq.variable = 0;
  Clause clause;
  clause.dist.kind = Distribution::Kind::Categorical;
  clause.dist.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0};
  eq.clauses.push_back(clause);
  const ScmModel exact(thirds, {eq}, {});
  const auto reparsed = parse_scm(exact.to_dsl(), thirds);
  CHECK(reparsed.equation_of(0).clauses[0].dist.weights ==
        exact.equation_of(0).clauses[0].dist.weights);
}
