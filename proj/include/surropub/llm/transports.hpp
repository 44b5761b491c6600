#pragma once

#include <deque>
#include <variant>

#include "surropub/llm/client.hpp"

namespace surropub::llm {

/// Replays a queue of canned responses/failures in order; for tests and
/// offline pipeline runs.
class ScriptedTransport : public Transport {
public:
  struct Failure {
    std::string message;
    bool retryable = true;
  };

  void push_response(std::string text, TokenUsage usage = {});
  void push_failure(std::string message, bool retryable = true);

  ChatResponse send(const ChatRequest& request) override;
  std::string name() const override { return "scripted"; }

  std::size_t requests_seen() const { return requests_seen_; }
  const std::vector<ChatRequest>& requests() const { return requests_; }

private:
  std::deque<std::variant<ChatResponse, Failure>> queue_;
  std::vector<ChatRequest> requests_;
  std::size_t requests_seen_ = 0;
  std::mutex mutex_;
};

/// Serves recorded responses from a Transcript with zero network traffic.
/// Requests are matched positionally; a digest mismatch with the recorded
/// request fails unless strict matching is disabled.
class ReplayTransport : public Transport {
public:
  explicit ReplayTransport(Transcript transcript, bool strict = true);

  ChatResponse send(const ChatRequest& request) override;
  std::string name() const override { return "replay"; }

private:
  Transcript transcript_;
  bool strict_;
  std::size_t next_ = 0;
  std::mutex mutex_;
};

std::string request_digest(const ChatRequest& request);

/// One provider endpoint: wire format, URL, model id, and the environment
/// variable holding the credential. Loaded from a JSON profiles document;
/// nothing here is compiled in.
struct EndpointProfile {
  std::string name;
  std::string wire;  // "openai" | "anthropic"
  std::string base_url;
  std::string path;
  std::string model;
  std::string api_key_env;
  int timeout_seconds = 120;
};

std::vector<EndpointProfile> load_profiles(const std::string& path);
const EndpointProfile& find_profile(const std::vector<EndpointProfile>& profiles,
                                    const std::string& name);

/// Live HTTP transport speaking the provider's chat-completions wire format.
/// 429 and 5xx map to retryable failures.
class HttpTransport : public Transport {
public:
  explicit HttpTransport(EndpointProfile profile);

  ChatResponse send(const ChatRequest& request) override;
  std::string name() const override { return "http:" + profile_.name; }

private:
  EndpointProfile profile_;
  std::string api_key_;
};

}  // namespace surropub::llm
