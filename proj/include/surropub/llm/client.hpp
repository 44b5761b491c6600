#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "surropub/error.hpp"

namespace surropub::llm {

struct ChatRequest {
  std::string system;
  std::vector<std::string> user_turns;
  std::string model;
  int max_output_tokens = 4096;
  double temperature = 1.0;
};

struct TokenUsage {
  std::int64_t prompt = 0;
  std::int64_t completion = 0;
};

struct ChatResponse {
  std::string text;
  TokenUsage usage;
};

class TransportError : public Error {
public:
  TransportError(std::string message, bool retryable)
      : Error(std::move(message)), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

private:
  bool retryable_;
};

class Transport {
public:
  virtual ~Transport() = default;
  virtual ChatResponse send(const ChatRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct TranscriptEntry {
  ChatRequest request;
  ChatResponse response;
  std::string timestamp;  // UTC, RFC 3339
};

/// Append-only log of all traffic; serializes to line-delimited JSON and can
/// be reloaded to drive a ReplayTransport.
class Transcript {
public:
  Transcript() = default;
  Transcript(const Transcript& other);
  Transcript(Transcript&& other) noexcept;
  Transcript& operator=(Transcript other);

  void append(TranscriptEntry entry);
  std::size_t size() const;
  TranscriptEntry entry(std::size_t i) const;
  TokenUsage total_usage() const;

  void save(const std::string& path) const;
  std::string to_jsonl() const;
  static Transcript load(const std::string& path);
  static Transcript from_jsonl(const std::string& text);

private:
  mutable std::mutex mutex_;
  std::vector<TranscriptEntry> entries_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  double backoff_multiplier = 2.0;
  std::chrono::milliseconds max_backoff{10'000};
};

struct RateLimit {
  double requests_per_minute = 60.0;
  double burst = 8.0;
};

/// Token-bucket limiter; acquire() blocks until a token is available.
class TokenBucket {
public:
  explicit TokenBucket(RateLimit limit);
  void acquire();

private:
  RateLimit limit_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mutex_;
};

struct AttemptLogEntry {
  std::string timestamp;
  bool succeeded = false;
  std::string error;  // empty on success
};

/// Transport-agnostic chat client: rate limiting, retry with exponential
/// backoff on retryable failures, and transcript recording. Shareable across
/// threads.
class ChatClient {
public:
  explicit ChatClient(std::shared_ptr<Transport> transport, RetryPolicy retry = {},
                      std::optional<RateLimit> rate_limit = std::nullopt);

  ChatResponse complete(const ChatRequest& request);

  const std::shared_ptr<Transcript>& transcript() const { return transcript_; }

  /// Every attempt, including retried failures; the transcript itself only
  /// carries completed request/response pairs.
  std::vector<AttemptLogEntry> attempt_log() const;
  int attempts_made() const;

  /// Test hook: replaces the real backoff sleep.
  void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper);

private:
  std::shared_ptr<Transport> transport_;
  RetryPolicy retry_;
  std::unique_ptr<TokenBucket> bucket_;
  std::shared_ptr<Transcript> transcript_;
  std::function<void(std::chrono::milliseconds)> sleeper_;
  mutable std::mutex attempts_mutex_;
  std::vector<AttemptLogEntry> attempts_;
};

std::string utc_timestamp();

}  // namespace surropub::llm
