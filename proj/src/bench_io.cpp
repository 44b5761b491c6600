#include <nlohmann/json.hpp>

#include <atomic>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "surropub/bench/records.hpp"

namespace surropub::bench {

std::string BenchmarkRecord::to_json() const {
  nlohmann::json j = {{"method", method},     {"mechanism", mechanism},
                      {"dataset", dataset},   {"config", config_id},
                      {"epsilon", epsilon},   {"seed", seed},
                      {"metrics", metrics}};
  return j.dump();
}

BenchmarkRecord BenchmarkRecord::from_json(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line);
  BenchmarkRecord r;
  r.method = j.value("method", "");
  r.mechanism = j.value("mechanism", "");
  r.dataset = j.value("dataset", "");
  r.config_id = j.value("config", "");
  r.epsilon = j.value("epsilon", 0.0);
  r.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("metrics"))
    r.metrics = j.at("metrics").get<std::map<std::string, double>>();
  return r;
}

std::string records_to_jsonl(const std::vector<BenchmarkRecord>& records) {
  std::ostringstream out;
  for (const auto& r : records) out << r.to_json() << '\n';
  return out.str();
}

std::vector<BenchmarkRecord> records_from_jsonl(const std::string& text) {
  std::vector<BenchmarkRecord> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(BenchmarkRecord::from_json(line));
  }
  return out;
}

std::vector<std::size_t> pareto_frontier(const std::vector<std::vector<double>>& rows,
                                         bool minimize) {
  if (rows.empty()) return {};
  const std::size_t k = rows.front().size();
  if (k < 1) throw Error("pareto_frontier: rows need at least one objective");
  for (const auto& row : rows)
    if (row.size() != k) throw Error("pareto_frontier: ragged objective rows");

  const auto dominates = [&](const std::vector<double>& a, const std::vector<double>& b) {
    bool strict = false;
    for (std::size_t i = 0; i < k; ++i) {
      const double x = minimize ? a[i] : -a[i];
      const double y = minimize ? b[i] : -b[i];
      if (x > y) return false;
      if (x < y) strict = true;
    }
    return strict;
  };

  std::vector<std::size_t> frontier;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < rows.size() && !dominated; ++j)
      if (j != i && dominates(rows[j], rows[i])) dominated = true;
    if (!dominated) frontier.push_back(i);
  }
  return frontier;
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const std::size_t n_threads = std::min(workers, count);
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace surropub::bench
