#pragma once

#include "surropub/llm/client.hpp"
#include "surropub/schema.hpp"

namespace surropub {

struct CsvGenConfig {
  std::size_t rows_per_batch = 50;
  std::size_t max_batches = 100;
  std::size_t target_m = 0;
  double temperature = 1.0;
  std::string model;  // empty = transport profile default
};

struct BatchYield {
  std::size_t requested = 0;
  std::size_t parsed = 0;
  std::size_t valid = 0;
};

struct CsvGenResult {
  Dataset data;
  std::vector<BatchYield> batches;
  bool target_reached = false;
  std::string to_jsonl() const;  // one line per batch
};

/// Instantiates the CSV generation prompt: the system text carries the seven
/// output rules with the schema topic as the domain, the user text the row
/// count and serialized schema.
llm::ChatRequest build_csv_prompt(const Schema& schema, std::size_t num_rows,
                                  double temperature = 1.0, const std::string& model = "");

/// Requests batches until target_m valid records accumulate or max_batches is
/// hit. Rows failing schema validation are dropped; header echoes and
/// markdown fences are stripped before parsing. Returns a short dataset with
/// target_reached=false rather than failing when the target is not met;
/// throws only if no batch yielded a single valid record.
CsvGenResult generate_csv_dataset(llm::ChatClient& client, SchemaPtr schema,
                                  const CsvGenConfig& config, std::uint64_t seed);

}  // namespace surropub
