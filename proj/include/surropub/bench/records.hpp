#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "surropub/error.hpp"

namespace surropub::bench {

/// One completed (method, mechanism, dataset, config, epsilon, seed) run.
struct BenchmarkRecord {
  std::string method;
  std::string mechanism;
  std::string dataset;
  std::string config_id;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;

  std::string to_json() const;
  static BenchmarkRecord from_json(const std::string& line);
};

std::string records_to_jsonl(const std::vector<BenchmarkRecord>& records);
std::vector<BenchmarkRecord> records_from_jsonl(const std::string& text);

/// Serialized record appender plus the completed-record cache that makes
/// interrupted runs resumable: a job whose (method, mechanism, config,
/// epsilon, seed) key already appears in `completed` is restored from the
/// record instead of re-run.
struct RecordSink {
  std::function<void(const BenchmarkRecord&)> append;  // invoked serially
  const std::vector<BenchmarkRecord>* completed = nullptr;
};

/// Indices of the non-dominated rows (row i is dominated when another row is
/// <= on every objective and < on at least one; flip for maximization).
std::vector<std::size_t> pareto_frontier(const std::vector<std::vector<double>>& rows,
                                         bool minimize = true);

/// Runs fn(0..count-1) on `workers` threads; exceptions are rethrown on the
/// caller thread after all workers finish.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace surropub::bench
