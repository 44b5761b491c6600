#include <doctest.h>

#include <cmath>

#include "surropub/bayes_net.hpp"
#include "surropub/llm/memorization.hpp"
#include "surropub/llm/transports.hpp"
#include "test_support.hpp"

using namespace surropub;
using namespace surropub::llm;
namespace st = surropub::testing;

namespace {

ChatClient make_client(std::shared_ptr<Transport> transport, int max_attempts = 3) {
  RetryPolicy retry;
  retry.max_attempts = max_attempts;
  retry.initial_backoff = std::chrono::milliseconds(0);
  ChatClient client(std::move(transport), retry);
  client.set_sleeper([](std::chrono::milliseconds) {});
  return client;
}

ChatRequest simple_request(const std::string& text) {
  ChatRequest req;
  req.user_turns.push_back(text);
  return req;
}

}  // namespace

TEST_CASE("complete returns the canned reply and records one transcript entry") {
  auto transport = std::make_shared<ScriptedTransport>();
  transport->push_response("pong", {10, 2});
  auto client = make_client(transport);
  const auto response = client.complete(simple_request("ping"));
  CHECK(response.text == "pong");
  CHECK(response.usage.prompt == 10);
  CHECK(client.transcript()->size() == 1);
  CHECK(client.transcript()->entry(0).request.user_turns[0] == "ping");
}

TEST_CASE("complete retries transient failures up to the cap") {
  SUBCASE("two failures then success, cap 3: all three attempts logged") {
    auto transport = std::make_shared<ScriptedTransport>();
    transport->push_failure("429");
    transport->push_failure("503");
    transport->push_response("ok");
    auto client = make_client(transport, 3);
    CHECK(client.complete(simple_request("x")).text == "ok");
    const auto attempts = client.attempt_log();
    REQUIRE(attempts.size() == 3);
    CHECK_FALSE(attempts[0].succeeded);
    CHECK(attempts[0].error.find("429") != std::string::npos);
    CHECK_FALSE(attempts[1].succeeded);
    CHECK(attempts[2].succeeded);
    CHECK(client.transcript()->size() == 1);  // only the success is traffic
  }
  SUBCASE("always failing, cap 3") {
    auto transport = std::make_shared<ScriptedTransport>();
    for (int i = 0; i < 3; ++i) transport->push_failure("boom");
    auto client = make_client(transport, 3);
    CHECK_THROWS_WITH_AS(client.complete(simple_request("x")),
                         doctest::Contains("after 3 attempt"), Error);
    CHECK(client.attempts_made() == 3);
  }
  SUBCASE("non-retryable failure stops immediately") {
    auto transport = std::make_shared<ScriptedTransport>();
    transport->push_failure("401 unauthorized", /*retryable=*/false);
    transport->push_response("never reached");
    auto client = make_client(transport, 3);
    CHECK_THROWS_AS(client.complete(simple_request("x")), Error);
    CHECK(client.attempts_made() == 1);
  }
}

TEST_CASE("request preconditions") {
  auto client = make_client(std::make_shared<ScriptedTransport>());
  ChatRequest no_turns;
  CHECK_THROWS_AS(client.complete(no_turns), ConfigError);
  ChatRequest bad_tokens = simple_request("x");
  bad_tokens.max_output_tokens = 0;
  CHECK_THROWS_AS(client.complete(bad_tokens), ConfigError);
}

TEST_CASE("transcript round-trips through JSONL and drives byte-identical replay") {
  auto transport = std::make_shared<ScriptedTransport>();
  transport->push_response("first reply", {3, 4});
  transport->push_response("second reply \"quoted\"\nmultiline", {5, 6});
  auto client = make_client(transport);
  client.complete(simple_request("one"));
  ChatRequest second = simple_request("two");
  second.system = "be terse";
  second.temperature = 0.25;
  client.complete(second);

  const std::string jsonl = client.transcript()->to_jsonl();
  const Transcript loaded = Transcript::from_jsonl(jsonl);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded.entry(1).response.text == "second reply \"quoted\"\nmultiline");
  CHECK(loaded.total_usage().prompt == 8);

  auto replay_client = make_client(std::make_shared<ReplayTransport>(loaded));
  CHECK(replay_client.complete(simple_request("one")).text == "first reply");
  CHECK(replay_client.complete(second).text == "second reply \"quoted\"\nmultiline");
  // Exhausted transcript refuses further traffic.
  CHECK_THROWS_WITH_AS(replay_client.complete(simple_request("three")),
                       doctest::Contains("exhausted"), Error);
}

TEST_CASE("strict replay rejects a mismatching request") {
  Transcript transcript;
  transcript.append({simple_request("recorded"), {"reply", {}}, "t"});
  auto client = make_client(std::make_shared<ReplayTransport>(transcript));
  CHECK_THROWS_WITH_AS(client.complete(simple_request("different")),
                       doctest::Contains("mismatch"), Error);
}

TEST_CASE("levenshtein ground truth") {
  CHECK(levenshtein("", "") == 0);
  CHECK(levenshtein("abc", "abc") == 0);
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("abc", "") == 3);
}

namespace {

/// Builds the dataset the probes run against: d binary-ish columns, n rows.
Dataset probe_dataset(SchemaPtr schema, std::size_t n) {
  return st::random_dataset(schema, n, 4242);
}

std::string rows_as_text(const Dataset& data, std::size_t start, std::size_t count) {
  std::string out;
  for (std::size_t r = start; r < start + count; ++r) {
    for (std::size_t c = 0; c < data.schema().variable_count(); ++c) {
      if (c) out += ',';
      out += data.code_at(r, c);
    }
    out += '\n';
  }
  return out;
}

}  // namespace

TEST_CASE("header_test scores a regurgitating mock at exactly 1.0") {
  auto schema = st::make_schema({2, 3, 2});
  const auto data = probe_dataset(schema, 30);
  auto transport = std::make_shared<ScriptedTransport>();
  transport->push_response(rows_as_text(data, 5, 10));
  auto client = make_client(transport);
  const auto report = header_test(client, data, 5, 10);
  CHECK(report.exact_match_rate == 1.0);
  CHECK(report.char_similarity == doctest::Approx(1.0));
  CHECK(report.cells_incorrect == 0);
  CHECK(report.cells_missing == 0);
  CHECK_FALSE(report.truncated_completion);
}

TEST_CASE("header_test prompt carries the header and prompt rows verbatim") {
  auto schema = st::make_schema({2, 2});
  const auto data = probe_dataset(schema, 20);
  auto transport = std::make_shared<ScriptedTransport>();
  transport->push_response(rows_as_text(data, 3, 2));
  auto client = make_client(transport);
  header_test(client, data, 3, 2);
  const auto& prompt = transport->requests().at(0).user_turns.at(0);
  CHECK(prompt.find("A,B") != std::string::npos);
  CHECK(prompt.find(rows_as_text(data, 0, 3)) != std::string::npos);
}

TEST_CASE("header_test on a uniform-noise mock stays near the collision floor") {
  auto schema = st::make_schema({2, 2});  // per-row collision = 1/4
  const auto data = probe_dataset(schema, 210);
  const std::size_t trials = 200;
  auto noise = gen_uniform(schema, {trials, 99});
  auto transport = std::make_shared<ScriptedTransport>();
  transport->push_response(rows_as_text(noise, 0, trials));
  auto client = make_client(transport);
  const auto report = header_test(client, data, 5, trials);
  const double floor = 0.25;
  const double sigma = std::sqrt(floor * (1 - floor) / static_cast<double>(trials));
  CHECK(report.exact_match_rate < floor + 4 * sigma);
  CHECK(report.exact_match_rate > floor - 4 * sigma);
}

TEST_CASE("header_test tolerates an unparseable tail and flags it") {
  auto schema = st::make_schema({2, 2});
  const auto data = probe_dataset(schema, 30);
  auto transport = std::make_shared<ScriptedTransport>();
  transport->push_response(rows_as_text(data, 5, 2));  // only 2 of 5 rows
  auto client = make_client(transport);
  const auto report = header_test(client, data, 5, 5);
  CHECK(report.truncated_completion);
  CHECK(report.rows_scored == 2);
  CHECK(report.exact_match_rate == 1.0);  // the parseable prefix was perfect
  CHECK(report.cells_missing == 3 * 2);
}

TEST_CASE("memorization monotonicity: more correct cells never scores lower") {
  auto schema = st::make_schema({2, 2, 2});
  const auto data = probe_dataset(schema, 30);
  const std::string truth = rows_as_text(data, 5, 4);

  // Corrupt k cells of the truth block; the score must fall monotonically.
  auto corrupt = [&](int k) {
    auto lines = truth;
    std::size_t replaced = 0;
    for (std::size_t i = 0; i < lines.size() && replaced < static_cast<std::size_t>(k); ++i) {
      if (lines[i] == '1') {
        lines[i] = '2';
        ++replaced;
      } else if (lines[i] == '2') {
        lines[i] = '1';
        ++replaced;
      }
    }
    return lines;
  };

  double last_accuracy = 1.1;
  for (int k : {0, 2, 5}) {
    auto transport = std::make_shared<ScriptedTransport>();
    transport->push_response(corrupt(k));
    auto client = make_client(transport);
    const auto report = header_test(client, data, 5, 4);
    CHECK(report.cell_accuracy() <= last_accuracy);
    last_accuracy = report.cell_accuracy();
  }
}

TEST_CASE("row_completion_test aggregates trials and validates preconditions") {
  auto schema = st::make_schema({2, 2});
  const auto data = probe_dataset(schema, 40);

  SUBCASE("regurgitating mock scores 1.0") {
    // Unique rows let the mock recover each block location from its prompt.
    auto unique_schema = st::make_schema({40, 2});
    Dataset unique(unique_schema);
    for (std::uint16_t i = 0; i < 40; ++i)
      unique.add(st::make_record({i, static_cast<std::uint16_t>(i % 2)}));

    // First pass captures the prompts, second pass answers them truthfully.
    auto capture_transport = std::make_shared<ScriptedTransport>();
    for (int i = 0; i < 6; ++i) capture_transport->push_response("1,1");
    auto capture = make_client(capture_transport);
    row_completion_test(capture, unique, 6, 31);

    auto replay = std::make_shared<ScriptedTransport>();
    for (const auto& request : capture_transport->requests()) {
      const auto& text = request.user_turns[0];
      const auto tail = text.substr(0, text.rfind("\n\nOutput"));
      const auto last_line = tail.substr(tail.rfind('\n') + 1);
      std::size_t row = 0;
      for (; row < unique.size(); ++row) {
        std::string line = unique.code_at(row, 0) + "," + unique.code_at(row, 1);
        if (line == last_line) break;
      }
      REQUIRE(row < unique.size());
      replay->push_response(rows_as_text(unique, row + 1, 1));
    }
    auto client = make_client(replay);
    const auto report = row_completion_test(client, unique, 6, 31);
    CHECK(report.exact_match_rate == 1.0);
  }
  SUBCASE("zero trials errors") {
    auto client = make_client(std::make_shared<ScriptedTransport>());
    CHECK_THROWS_AS(row_completion_test(client, data, 0, 1), Error);
  }
  SUBCASE("under 25 rows errors") {
    const auto small = probe_dataset(schema, 24);
    auto client = make_client(std::make_shared<ScriptedTransport>());
    CHECK_THROWS_AS(row_completion_test(client, small, 3, 1), Error);
  }
}
