#include <doctest.h>

#include <cmath>

#include "surropub/agent.hpp"
#include "surropub/metrics.hpp"
#include "surropub/llm/transports.hpp"
#include "test_support.hpp"

using namespace surropub;
namespace st = surropub::testing;

namespace {

llm::ChatClient make_client(std::shared_ptr<llm::Transport> transport) {
  llm::RetryPolicy retry;
  retry.max_attempts = 1;
  llm::ChatClient client(std::move(transport), retry);
  client.set_sleeper([](std::chrono::milliseconds) {});
  return client;
}

// Schema A(2), B(2), C(3); A is the root, A -> B -> C.
SchemaPtr agent_schema() { return st::make_schema({2, 2, 3}); }

const char* kEquationsSymbolic =
    "var A ~ bernoulli(p_a);\n"
    "var B | A ~ when A == 1: bernoulli(0.8) else bernoulli(p_b);\n"
    "var C | B ~ when B == 2: categorical{1: 0.2, 2: 0.3, 3: 0.5} else uniform{2, 3};\n";

const char* kEquationsResolved =
    "var A ~ bernoulli(0.4);\n"
    "var B | A ~ when A == 1: bernoulli(0.8) else bernoulli(0.3);\n"
    "var C | B ~ when B == 2: categorical{1: 0.2, 2: 0.3, 3: 0.5} else uniform{2, 3};\n";

const char* kConstraintLine = "constraint \"no low C for late A\": not (A == 2) or C != 1;\n";

std::string full_document() { return std::string(kEquationsResolved) + kConstraintLine; }

std::vector<std::string> valid_replies() {
  return {
      "A, B, C",                      // 1 schema
      kConstraintLine,                // 2 constraints
      "A",                            // 3 roots
      "A -> B",                       // 4 root -> non-root
      "B -> C",                       // 5 non-root -> non-root
      "A -> B\nB -> C",               // 6 final dag
      kEquationsSymbolic,             // 7 equations (symbolic ok)
      kEquationsResolved,             // 8 parameters resolved
      full_document(),                // 9 assemble
      full_document(),                // 10 enforce range
      full_document(),                // 11 enforce constraints
  };
}

std::vector<std::string> invalid_replies() {
  return {
      "A, B",                                     // missing C
      "constraint \"bad\": A == 9;",              // unknown code
      "A, Z",                                     // unknown variable
      "B -> C",                                   // source is not a root
      "A -> C",                                   // touches a root
      "A -> B\nB -> C\nC -> B",                   // cycle
      "var A ~ bernoulli(0.5);",                  // missing equations
      kEquationsSymbolic,                         // still has free parameters
      "var A ~",                                  // syntax error
      std::string(kEquationsResolved) + "var A ~ bernoulli(0.1);\n",  // duplicate eq
      kEquationsResolved,                         // constraint missing
  };
}

}  // namespace

TEST_CASE("a fully valid transcript walks every state with zero retries") {
  auto transport = std::make_shared<llm::ScriptedTransport>();
  for (const auto& reply : valid_replies()) transport->push_response(reply);
  auto client = make_client(transport);

  const auto result = run_agent(client, agent_schema(), 3, 17);
  REQUIRE_FALSE(result.log.aborted);
  REQUIRE(result.model.has_value());
  CHECK(result.log.total_retries == 0);
  REQUIRE(result.log.states.size() == kPromptingStates + 1);  // + Sample
  for (std::size_t i = 0; i < kPromptingStates; ++i)
    CHECK(result.log.states[i].attempts == 1);
  CHECK(result.log.states.back().state == AgentState::Sample);

  // The finished model samples schema-valid records.
  const auto sample = sample_scm(*result.model, {500, 3}, 20);
  for (const auto& rec : sample.data.records()) {
    std::vector<std::string> tokens;
    for (std::size_t c = 0; c < 3; ++c)
      tokens.push_back(result.model->schema().variable(c).code(rec.cells[c]));
    CHECK(validate_record(result.model->schema(), tokens).ok());
  }
  CHECK(result.model->equation_of(2).parents == std::vector<std::size_t>{1});
}

TEST_CASE("one injected failure per state causes exactly one self-loop each") {
  auto transport = std::make_shared<llm::ScriptedTransport>();
  const auto good = valid_replies();
  const auto bad = invalid_replies();
  REQUIRE(good.size() == bad.size());
  for (std::size_t i = 0; i < good.size(); ++i) {
    transport->push_response(bad[i]);
    transport->push_response(good[i]);
  }
  auto client = make_client(transport);

  const auto result = run_agent(client, agent_schema(), 3, 17);
  REQUIRE_FALSE(result.log.aborted);
  REQUIRE(result.model.has_value());
  CHECK(result.log.total_retries == static_cast<int>(kPromptingStates));
  for (std::size_t i = 0; i < kPromptingStates; ++i) {
    CHECK(result.log.states[i].attempts == 2);
    CHECK(result.log.states[i].failures.size() == 1);
  }
}

TEST_CASE("retry prompts carry a structured failure description") {
  auto transport = std::make_shared<llm::ScriptedTransport>();
  transport->push_response("A, B");  // missing C
  transport->push_response("A, B, C");
  for (std::size_t i = 1; i < valid_replies().size(); ++i)
    transport->push_response(valid_replies()[i]);
  auto client = make_client(transport);
  const auto result = run_agent(client, agent_schema(), 3, 17);
  REQUIRE_FALSE(result.log.aborted);
  const auto& retry_prompt = transport->requests().at(1).user_turns.at(0);
  CHECK(retry_prompt.find("the following variables were missing: C") != std::string::npos);
  CHECK(retry_prompt.find("Previous reply:") != std::string::npos);
}

TEST_CASE("a cycle proposed across steps 4-5 is rejected at the dag state citing it") {
  auto transport = std::make_shared<llm::ScriptedTransport>();
  transport->push_response("A, B, C");
  transport->push_response(kConstraintLine);
  transport->push_response("A");
  transport->push_response("A -> B");
  transport->push_response("B -> C\nC -> B");          // valid here: endpoints ok, no dup
  transport->push_response("A -> B\nB -> C\nC -> B");  // echoed at dag -> cycle
  transport->push_response("A -> B\nB -> C");          // corrected
  for (std::size_t i = 6; i < valid_replies().size(); ++i)
    transport->push_response(valid_replies()[i]);
  auto client = make_client(transport);

  const auto result = run_agent(client, agent_schema(), 3, 17);
  REQUIRE_FALSE(result.log.aborted);
  const auto& dag_log = result.log.states[5];
  CHECK(dag_log.state == AgentState::Dag);
  REQUIRE(dag_log.failures.size() == 1);
  CHECK(dag_log.failures[0].find("cycle") != std::string::npos);
  CHECK(dag_log.failures[0].find("B -> C -> B") != std::string::npos);
  // The retry prompt cites the cycle.
  const auto& retry_prompt = transport->requests().at(6).user_turns.at(0);
  CHECK(retry_prompt.find("B -> C -> B") != std::string::npos);
}

TEST_CASE("exhausting max_retries aborts with a complete run log") {
  auto transport = std::make_shared<llm::ScriptedTransport>();
  transport->push_response("A, B");  // bad
  transport->push_response("A");     // still bad
  auto client = make_client(transport);
  const auto result = run_agent(client, agent_schema(), 2, 17);
  CHECK(result.log.aborted);
  CHECK_FALSE(result.model.has_value());
  REQUIRE(result.log.states.size() == 1);
  CHECK(result.log.states[0].attempts == 2);
  CHECK(result.log.states[0].failures.size() == 2);
  CHECK(result.log.abort_reason.find("schema") != std::string::npos);
  // The log serializes one line per state plus a summary line.
  const auto jsonl = result.log.to_jsonl();
  CHECK(jsonl.find("\"aborted\":true") != std::string::npos);
}

TEST_CASE("mix_uniform pools records with equal per-record probability") {
  auto schema = st::make_schema({8});
  // Sizes 2 and 6, all records distinct: each must appear with prob 1/8.
  Dataset d1(schema), d2(schema);
  d1.add(st::make_record({0}));
  d1.add(st::make_record({1}));
  for (std::uint16_t v = 2; v < 8; ++v) d2.add(st::make_record({v}));

  const std::size_t m = 80'000;
  const auto mixed = mix_uniform({d1, d2}, m, 5);
  REQUIRE(mixed.size() == m);
  std::vector<double> freq(8, 0.0);
  for (const auto& rec : mixed.records()) freq[rec.cells[0]] += 1.0;
  for (int v = 0; v < 8; ++v)
    CHECK(std::fabs(freq[v] / static_cast<double>(m) - 0.125) < 0.01);
}

TEST_CASE("mix_uniform of one dataset is a bootstrap of it") {
  auto schema = st::make_schema({4});
  const auto data = st::random_dataset(schema, 10, 3);
  const auto mixed = mix_uniform({data}, 50, 7);
  for (const auto& rec : mixed.records()) {
    bool found = false;
    for (const auto& src : data.records())
      if (src == rec) found = true;
    CHECK(found);
  }
  CHECK(mix_uniform({data}, 50, 7).records() == mixed.records());
}

TEST_CASE("mix_uniform rejects an empty pool") {
  auto schema = st::make_schema({2});
  CHECK_THROWS_AS(mix_uniform({Dataset(schema)}, 10, 1), Error);
  CHECK_THROWS_AS(mix_uniform({}, 10, 1), Error);
}

TEST_CASE("mix_max_coverage with k=1 picks the brute-force best singleton") {
  auto schema = st::make_schema({3, 3});
  std::vector<Dataset> datasets;
  for (std::uint64_t s = 0; s < 3; ++s)
    datasets.push_back(st::random_dataset(schema, 40, 100 + s));

  const auto result = mix_max_coverage(datasets, 1, 50, 9);
  REQUIRE(result.selected.size() == 1);

  // Brute force over singletons with the same similarity definition.
  std::vector<std::vector<double>> tvs(3, std::vector<double>(3, 1.0));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) tvs[i][j] = 1.0 - metrics::tvd(datasets[i], datasets[j]);
  double best = -1.0;
  std::size_t best_j = 0;
  for (std::size_t j = 0; j < 3; ++j) {
    const double value = facility_location_value(tvs, {j});
    if (value > best) {
      best = value;
      best_j = j;
    }
  }
  CHECK(result.selected[0] == best_j);
  CHECK(result.objective == doctest::Approx(best));
}

TEST_CASE("mix_max_coverage on identical datasets scores |datasets| for any pick") {
  auto schema = st::make_schema({2, 2});
  const auto data = st::random_dataset(schema, 30, 1);
  const std::vector<Dataset> datasets = {data, data, data, data};
  const auto result = mix_max_coverage(datasets, 2, 20, 3);
  CHECK(result.objective == doctest::Approx(4.0));
}

TEST_CASE("mix_max_coverage with k = |datasets| selects everything") {
  auto schema = st::make_schema({2, 2});
  std::vector<Dataset> datasets;
  for (std::uint64_t s = 0; s < 4; ++s)
    datasets.push_back(st::random_dataset(schema, 25, 200 + s));
  const auto result = mix_max_coverage(datasets, 4, 30, 3);
  CHECK(result.selected.size() == 4);
  auto sorted = result.selected;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("mix outputs contain only records present in the inputs") {
  auto schema = st::make_schema({3, 2});
  std::vector<Dataset> datasets;
  for (std::uint64_t s = 0; s < 3; ++s)
    datasets.push_back(st::random_dataset(schema, 15, 300 + s));
  MixSpec spec;
  spec.mode = MixSpec::Mode::MaxCoverage;
  spec.k = 2;
  spec.target_m = 40;
  spec.seed = 8;
  const auto mixed = mix(datasets, spec);
  for (const auto& rec : mixed.records()) {
    bool found = false;
    for (const auto& d : datasets)
      for (const auto& src : d.records())
        if (src == rec) found = true;
    CHECK(found);
  }
}
