#include "surropub/csv_gen.hpp"

#include <nlohmann/json.hpp>

#include <sstream>

namespace surropub {

llm::ChatRequest build_csv_prompt(const Schema& schema, std::size_t num_rows,
                                  double temperature, const std::string& model) {
  if (num_rows < 1) throw Error("build_csv_prompt requires num_rows >= 1");
  const std::string domain = schema.topic().empty() ? "tabular" : schema.topic();

  llm::ChatRequest req;
  req.model = model;
  req.temperature = temperature;
  req.system =
      "You are an expert in " + domain +
      " who generates synthetic data that closely mirrors real-world " + domain +
      " data. Your goal is to create data that would be indistinguishable from real " +
      domain +
      " records.\n\n"
      "Follow exactly these rules:\n"
      "1. Only output the CSV data with no additional text or explanations\n"
      "2. Always include a header row matching the schema exactly\n"
      "3. Strictly adhere to the provided schema's data types and possible values for "
      "all fields\n"
      "4. Use comma as the separator\n"
      "5. Ensure all values and relationships between fields are realistic and "
      "statistically plausible\n"
      "6. Generate diverse data while maintaining real-world patterns and constraints\n"
      "7. Include occasional edge cases at realistic frequencies";
  req.user_turns.push_back("Generate " + std::to_string(num_rows) +
                           " rows of data with these fields:\n\n" + schema.serialize());
  return req;
}

namespace {

bool looks_like_header(const Schema& schema, const std::vector<std::string>& tokens) {
  if (tokens.size() != schema.variable_count()) return false;
  for (std::size_t c = 0; c < tokens.size(); ++c)
    if (tokens[c] != schema.variable(c).name) return false;
  return true;
}

}  // namespace

CsvGenResult generate_csv_dataset(llm::ChatClient& client, SchemaPtr schema,
                                  const CsvGenConfig& config, std::uint64_t /*seed*/) {
  if (config.target_m < 1) throw Error("target_m must be at least 1");
  if (config.rows_per_batch < 1) throw Error("rows_per_batch must be at least 1");
  if (config.max_batches < 1) throw Error("max_batches must be at least 1");

  CsvGenResult result{Dataset(schema, DatasetRole::Surrogate), {}, false};
  result.data.reserve(config.target_m);

  for (std::size_t batch = 0;
       batch < config.max_batches && result.data.size() < config.target_m; ++batch) {
    const std::size_t want =
        std::min(config.rows_per_batch, config.target_m - result.data.size());
    const auto response = client.complete(
        build_csv_prompt(*schema, want, config.temperature, config.model));

    BatchYield yield;
    yield.requested = want;
    std::istringstream in(response.text);
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      std::size_t b = 0;
      while (b < line.size() && line[b] == ' ') ++b;
      line = line.substr(b);
      if (line.empty() || line.rfind("```", 0) == 0) continue;
      const auto tokens = split_csv_line(line);
      if (looks_like_header(*schema, tokens)) continue;  // tolerated header echo
      yield.parsed += 1;
      auto check = validate_record(*schema, tokens);
      if (check.ok()) {
        yield.valid += 1;
        if (result.data.size() < config.target_m) result.data.add(std::move(*check.record));
      }
    }
    result.batches.push_back(yield);
  }

  if (result.data.empty())
    throw Error("generate_csv_dataset: no batch produced a single schema-valid record");
  result.target_reached = result.data.size() >= config.target_m;
  return result;
}

std::string CsvGenResult::to_jsonl() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < batches.size(); ++i) {
    nlohmann::json line = {{"batch", i},
                           {"requested", batches[i].requested},
                           {"parsed", batches[i].parsed},
                           {"valid", batches[i].valid}};
    out << line.dump() << '\n';
  }
  return out.str();
}

}  // namespace surropub
