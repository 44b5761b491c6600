#include "surropub/llm/transports.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

// cpp-httplib is header-only; keep it out of public headers. OpenSSL support
// is required because every provider endpoint is https.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace surropub::llm {

void ScriptedTransport::push_response(std::string text, TokenUsage usage) {
  std::lock_guard lock(mutex_);
  queue_.push_back(ChatResponse{std::move(text), usage});
}

void ScriptedTransport::push_failure(std::string message, bool retryable) {
  std::lock_guard lock(mutex_);
  queue_.push_back(Failure{std::move(message), retryable});
}

ChatResponse ScriptedTransport::send(const ChatRequest& request) {
  std::lock_guard lock(mutex_);
  ++requests_seen_;
  requests_.push_back(request);
  if (queue_.empty())
    throw TransportError("scripted transport queue is exhausted", /*retryable=*/false);
  auto next = std::move(queue_.front());
  queue_.pop_front();
  if (std::holds_alternative<Failure>(next)) {
    const auto& f = std::get<Failure>(next);
    throw TransportError(f.message, f.retryable);
  }
  return std::get<ChatResponse>(next);
}

std::string request_digest(const ChatRequest& request) {
  // FNV-1a over the canonical request serialization.
  nlohmann::json j = {{"system", request.system},
                      {"user_turns", request.user_turns},
                      {"model", request.model},
                      {"max_output_tokens", request.max_output_tokens},
                      {"temperature", request.temperature}};
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ReplayTransport::ReplayTransport(Transcript transcript, bool strict)
    : transcript_(std::move(transcript)), strict_(strict) {}

ChatResponse ReplayTransport::send(const ChatRequest& request) {
  std::lock_guard lock(mutex_);
  if (next_ >= transcript_.size())
    throw TransportError("replay transcript exhausted after " + std::to_string(next_) +
                             " request(s)",
                         /*retryable=*/false);
  const TranscriptEntry entry = transcript_.entry(next_);
  if (strict_ && request_digest(entry.request) != request_digest(request))
    throw TransportError("replay mismatch at entry " + std::to_string(next_) +
                             ": request differs from the recorded one",
                         /*retryable=*/false);
  ++next_;
  return entry.response;
}

std::vector<EndpointProfile> load_profiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open provider profiles: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("provider profiles are not valid JSON: " + std::string(e.what()));
  }
  std::vector<EndpointProfile> out;
  for (const auto& j : doc.at("profiles")) {
    EndpointProfile p;
    p.name = j.at("name").get<std::string>();
    p.wire = j.at("wire").get<std::string>();
    p.base_url = j.at("base_url").get<std::string>();
    p.path = j.at("path").get<std::string>();
    p.model = j.at("model").get<std::string>();
    p.api_key_env = j.at("api_key_env").get<std::string>();
    p.timeout_seconds = j.value("timeout_seconds", 120);
    if (p.wire != "openai" && p.wire != "anthropic")
      throw ConfigError("profile '" + p.name + "': unknown wire format '" + p.wire + "'");
    out.push_back(std::move(p));
  }
  return out;
}

const EndpointProfile& find_profile(const std::vector<EndpointProfile>& profiles,
                                    const std::string& name) {
  for (const auto& p : profiles)
    if (p.name == name) return p;
  throw ConfigError("no provider profile named '" + name + "'");
}

HttpTransport::HttpTransport(EndpointProfile profile) : profile_(std::move(profile)) {
  const char* key = std::getenv(profile_.api_key_env.c_str());
  if (!key || !*key)
    throw ConfigError("environment variable " + profile_.api_key_env +
                      " is not set (credential for profile '" + profile_.name + "')");
  api_key_ = key;
}

ChatResponse HttpTransport::send(const ChatRequest& request) {
  nlohmann::json body;
  httplib::Headers headers;
  const std::string model = request.model.empty() ? profile_.model : request.model;
  if (profile_.wire == "anthropic") {
    body["model"] = model;
    body["max_tokens"] = request.max_output_tokens;
    body["temperature"] = request.temperature;
    if (!request.system.empty()) body["system"] = request.system;
    auto messages = nlohmann::json::array();
    for (const auto& turn : request.user_turns)
      messages.push_back({{"role", "user"}, {"content", turn}});
    body["messages"] = std::move(messages);
    headers.emplace("x-api-key", api_key_);
    headers.emplace("anthropic-version", "2023-06-01");
  } else {  // openai-compatible
    body["model"] = model;
    body["max_tokens"] = request.max_output_tokens;
    body["temperature"] = request.temperature;
    auto messages = nlohmann::json::array();
    if (!request.system.empty())
      messages.push_back({{"role", "system"}, {"content", request.system}});
    for (const auto& turn : request.user_turns)
      messages.push_back({{"role", "user"}, {"content", turn}});
    body["messages"] = std::move(messages);
    headers.emplace("Authorization", "Bearer " + api_key_);
  }

  httplib::Client client(profile_.base_url);
  client.set_connection_timeout(profile_.timeout_seconds);
  client.set_read_timeout(profile_.timeout_seconds);

  auto result = client.Post(profile_.path, headers, body.dump(), "application/json");
  if (!result)
    throw TransportError("http error: " + httplib::to_string(result.error()),
                         /*retryable=*/true);
  if (result->status == 401 || result->status == 403)
    throw TransportError("authentication failed (status " + std::to_string(result->status) + ")",
                         /*retryable=*/false);
  if (result->status == 429 || result->status >= 500)
    throw TransportError("transient failure (status " + std::to_string(result->status) + ")",
                         /*retryable=*/true);
  if (result->status != 200)
    throw TransportError("unexpected status " + std::to_string(result->status) + ": " +
                             result->body,
                         /*retryable=*/false);

  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::parse_error&) {
    throw TransportError("malformed response body", /*retryable=*/false);
  }

  ChatResponse response;
  try {
    if (profile_.wire == "anthropic") {
      response.text = parsed.at("content").at(0).at("text").get<std::string>();
      response.usage.prompt = parsed.at("usage").value("input_tokens", std::int64_t{0});
      response.usage.completion = parsed.at("usage").value("output_tokens", std::int64_t{0});
    } else {
      response.text =
          parsed.at("choices").at(0).at("message").at("content").get<std::string>();
      response.usage.prompt = parsed.at("usage").value("prompt_tokens", std::int64_t{0});
      response.usage.completion =
          parsed.at("usage").value("completion_tokens", std::int64_t{0});
    }
  } catch (const nlohmann::json::exception&) {
    throw TransportError("response is missing expected fields", /*retryable=*/false);
  }
  return response;
}

}  // namespace surropub::llm
