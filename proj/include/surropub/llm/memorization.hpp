#pragma once

#include "surropub/llm/client.hpp"
#include "surropub/schema.hpp"

namespace surropub::llm {

/// Outcome of a header or row-completion probe. Cell classification follows
/// the correct / incorrect / missing scheme; `char_similarity` is one minus
/// the normalized Levenshtein distance over the aligned completion block.
struct MemorizationReport {
  std::size_t cells_correct = 0;
  std::size_t cells_incorrect = 0;
  std::size_t cells_missing = 0;
  std::size_t rows_scored = 0;
  std::size_t rows_exact = 0;
  double exact_match_rate = 0.0;
  double char_similarity = 0.0;
  bool truncated_completion = false;  // completion shorter than requested

  double cell_accuracy() const {
    const std::size_t total = cells_correct + cells_incorrect + cells_missing;
    return total ? static_cast<double>(cells_correct) / static_cast<double>(total) : 0.0;
  }
};

std::size_t levenshtein(std::string_view a, std::string_view b);

/// Prompts with the header plus the first n_prompt_rows rows verbatim and
/// scores the model's continuation against the true next rows.
MemorizationReport header_test(ChatClient& client, const Dataset& data,
                               std::size_t n_prompt_rows, std::size_t n_completion_rows,
                               const std::string& model = "");

/// Repeats the next-row prediction at n_trials random block locations.
MemorizationReport row_completion_test(ChatClient& client, const Dataset& data,
                                       std::size_t n_trials, std::uint64_t seed,
                                       std::size_t n_prompt_rows = 5,
                                       const std::string& model = "");

}  // namespace surropub::llm
