#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "surropub/llm/client.hpp"
#include "surropub/scm.hpp"

namespace surropub {

// SCM elicitation agent: a 12-state machine that walks an LLM from the
// schema to a validated model. Every prompting state machine-validates the
// reply; a failed validation re-prompts the same state with the failure
// appended, a success advances to the next state. Sample is the accepting
// state and performs a smoke sample of the finished model.
enum class AgentState {
  Schema,
  ElicitConstraints,
  RootNodes,
  RootToNonRootEdges,
  NonRootToNonRootEdges,
  Dag,
  StructuralEquations,
  Parameters,
  AssembleModel,
  EnforceRange,
  EnforceConstraints,
  Sample,
};

std::string_view to_string(AgentState state);
inline constexpr std::size_t kPromptingStates = 11;  // all but Sample

struct StateLog {
  AgentState state;
  int attempts = 0;
  std::vector<std::string> failures;
  std::string accepted_output;
};

struct AgentRunLog {
  std::vector<StateLog> states;
  int total_retries = 0;
  bool aborted = false;
  std::string abort_reason;

  std::string to_jsonl() const;
  void save(const std::string& path) const;
};

struct AgentOptions {
  int max_retries = 3;       // attempts allowed per state
  std::string model;         // empty = transport profile default
  double temperature = 0.0;  // deterministic steps
  int max_output_tokens = 4096;
  std::size_t smoke_sample_m = 64;
  std::size_t smoke_sample_attempts = 32;
};

struct AgentResult {
  std::optional<ScmModel> model;  // set unless aborted
  AgentRunLog log;
};

AgentResult run_agent(llm::ChatClient& client, SchemaPtr schema, int max_retries,
                      std::uint64_t seed);
AgentResult run_agent(llm::ChatClient& client, SchemaPtr schema, const AgentOptions& options,
                      std::uint64_t seed);

// Panel mixing.

struct MixSpec {
  enum class Mode { Uniform, MaxCoverage };
  Mode mode = Mode::Uniform;
  std::size_t k = 1;  // selection budget for MaxCoverage
  std::size_t target_m = 0;
  std::uint64_t seed = 0;
};

/// Pools all records and samples target_m uniformly with replacement.
Dataset mix_uniform(const std::vector<Dataset>& datasets, std::size_t target_m,
                    std::uint64_t seed);

struct MaxCoverageResult {
  Dataset data;
  std::vector<std::size_t> selected;  // dataset indices, in greedy pick order
  double objective = 0.0;             // facility-location value of the selection
};

/// Greedy facility location over pairwise total-variation similarities
/// (objective F(S) = sum_i max_{j in S} 1 - TVD(D_i, D_j)); the k selected
/// datasets are then mixed uniformly.
MaxCoverageResult mix_max_coverage(const std::vector<Dataset>& datasets, std::size_t k,
                                   std::size_t target_m, std::uint64_t seed);

Dataset mix(const std::vector<Dataset>& datasets, const MixSpec& spec);

double facility_location_value(const std::vector<std::vector<double>>& similarity,
                               const std::vector<std::size_t>& selected);

}  // namespace surropub
