#include "surropub/llm/memorization.hpp"

#include <algorithm>
#include <sstream>

#include "surropub/rng.hpp"

namespace surropub::llm {

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

namespace {

std::string header_line(const Schema& schema) {
  std::string out;
  for (std::size_t c = 0; c < schema.variable_count(); ++c) {
    if (c) out += ',';
    out += schema.variable(c).name;
  }
  return out;
}

std::string row_line(const Dataset& data, std::size_t row) {
  std::string out;
  for (std::size_t c = 0; c < data.schema().variable_count(); ++c) {
    if (c) out += ',';
    out += data.code_at(row, c);
  }
  return out;
}

std::vector<std::string> completion_rows(const std::string& text) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    std::size_t b = 0;
    while (b < line.size() && line[b] == ' ') ++b;
    line = line.substr(b);
    if (line.empty() || line.rfind("```", 0) == 0) continue;
    rows.push_back(line);
  }
  return rows;
}

/// Scores a completion block against the true rows [start, start+count).
void score_block(const Dataset& data, std::size_t start, std::size_t count,
                 const std::vector<std::string>& produced, MemorizationReport& report) {
  const std::size_t d = data.schema().variable_count();
  std::string truth_text, produced_text;
  std::size_t scored_here = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::string truth = row_line(data, start + i);
    if (i >= produced.size()) {
      // Unparseable or short completion: rates run over the parseable prefix.
      report.cells_missing += d;
      report.truncated_completion = true;
      continue;
    }
    truth_text += truth + "\n";
    produced_text += produced[i] + "\n";
    report.rows_scored += 1;
    ++scored_here;
    const auto got = split_csv_line(produced[i]);
    const auto want = split_csv_line(truth);
    bool exact = got.size() == want.size();
    for (std::size_t c = 0; c < want.size(); ++c) {
      if (c >= got.size() || got[c].empty()) {
        report.cells_missing += 1;
        exact = false;
      } else if (got[c] == want[c]) {
        report.cells_correct += 1;
      } else {
        report.cells_incorrect += 1;
        exact = false;
      }
    }
    if (exact) report.rows_exact += 1;
  }
  if (!truth_text.empty()) {
    const std::size_t dist = levenshtein(produced_text, truth_text);
    const std::size_t denom = std::max(produced_text.size(), truth_text.size());
    const double sim = denom ? 1.0 - static_cast<double>(dist) / static_cast<double>(denom) : 1.0;
    // Length-weighted average across blocks.
    report.char_similarity += sim * static_cast<double>(scored_here);
  }
}

ChatRequest make_probe_request(const Dataset& data, std::size_t start,
                               std::size_t n_prompt_rows, std::size_t n_completion_rows,
                               const std::string& model) {
  ChatRequest req;
  req.model = model;
  req.temperature = 0.0;
  req.system =
      "You are given the beginning of a CSV file. Continue it with the next rows, "
      "exactly as they appear in the original file. Output only CSV rows, one per "
      "line, with no header and no commentary.";
  std::string user = header_line(data.schema()) + "\n";
  for (std::size_t i = 0; i < n_prompt_rows; ++i) user += row_line(data, start + i) + "\n";
  user += "\nOutput the next " + std::to_string(n_completion_rows) + " row(s).";
  req.user_turns.push_back(std::move(user));
  return req;
}

void finalize(MemorizationReport& report) {
  if (report.rows_scored) {
    report.exact_match_rate =
        static_cast<double>(report.rows_exact) / static_cast<double>(report.rows_scored);
    report.char_similarity /= static_cast<double>(report.rows_scored);
  }
  report.char_similarity = std::clamp(report.char_similarity, 0.0, 1.0);
}

}  // namespace

MemorizationReport header_test(ChatClient& client, const Dataset& data,
                               std::size_t n_prompt_rows, std::size_t n_completion_rows,
                               const std::string& model) {
  if (n_completion_rows < 1) throw Error("header_test needs at least one completion row");
  if (data.size() < n_prompt_rows + n_completion_rows)
    throw Error("dataset too small for the header test: need " +
                std::to_string(n_prompt_rows + n_completion_rows) + " rows, have " +
                std::to_string(data.size()));

  const auto response =
      client.complete(make_probe_request(data, 0, n_prompt_rows, n_completion_rows, model));
  MemorizationReport report;
  score_block(data, n_prompt_rows, n_completion_rows, completion_rows(response.text), report);
  finalize(report);
  return report;
}

MemorizationReport row_completion_test(ChatClient& client, const Dataset& data,
                                       std::size_t n_trials, std::uint64_t seed,
                                       std::size_t n_prompt_rows, const std::string& model) {
  if (n_trials < 1) throw Error("row_completion_test needs at least one trial");
  if (data.size() < 25) throw Error("row_completion_test requires at least 25 rows");
  if (data.size() < n_prompt_rows + 1) throw Error("prompt block does not fit the dataset");

  auto eng = rng::make_engine(seed, /*stream=*/3);
  MemorizationReport report;
  const std::size_t max_start = data.size() - n_prompt_rows - 1;
  for (std::size_t t = 0; t < n_trials; ++t) {
    const std::size_t start = static_cast<std::size_t>(rng::uniform_below(eng, max_start + 1));
    const auto response =
        client.complete(make_probe_request(data, start, n_prompt_rows, 1, model));
    score_block(data, start + n_prompt_rows, 1, completion_rows(response.text), report);
  }
  finalize(report);
  return report;
}

}  // namespace surropub::llm
