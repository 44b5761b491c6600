#include "surropub/llm/client.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <thread>

namespace surropub::llm {

namespace {

nlohmann::json request_to_json(const ChatRequest& r) {
  return {{"system", r.system},
          {"user_turns", r.user_turns},
          {"model", r.model},
          {"max_output_tokens", r.max_output_tokens},
          {"temperature", r.temperature}};
}

ChatRequest request_from_json(const nlohmann::json& j) {
  ChatRequest r;
  r.system = j.value("system", "");
  r.user_turns = j.value("user_turns", std::vector<std::string>{});
  r.model = j.value("model", "");
  r.max_output_tokens = j.value("max_output_tokens", 4096);
  r.temperature = j.value("temperature", 1.0);
  return r;
}

}  // namespace

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Transcript::Transcript(const Transcript& other) {
  std::lock_guard lock(other.mutex_);
  entries_ = other.entries_;
}

Transcript::Transcript(Transcript&& other) noexcept {
  std::lock_guard lock(other.mutex_);
  entries_ = std::move(other.entries_);
}

Transcript& Transcript::operator=(Transcript other) {
  std::lock_guard lock(mutex_);
  entries_ = std::move(other.entries_);
  return *this;
}

void Transcript::append(TranscriptEntry entry) {
  std::lock_guard lock(mutex_);
  entries_.push_back(std::move(entry));
}

std::size_t Transcript::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

TranscriptEntry Transcript::entry(std::size_t i) const {
  std::lock_guard lock(mutex_);
  return entries_.at(i);
}

TokenUsage Transcript::total_usage() const {
  std::lock_guard lock(mutex_);
  TokenUsage total;
  for (const auto& e : entries_) {
    total.prompt += e.response.usage.prompt;
    total.completion += e.response.usage.completion;
  }
  return total;
}

std::string Transcript::to_jsonl() const {
  std::lock_guard lock(mutex_);
  std::ostringstream out;
  for (const auto& e : entries_) {
    nlohmann::json line = {
        {"timestamp", e.timestamp},
        {"request", request_to_json(e.request)},
        {"response",
         {{"text", e.response.text},
          {"prompt_tokens", e.response.usage.prompt},
          {"completion_tokens", e.response.usage.completion}}}};
    out << line.dump() << '\n';
  }
  return out.str();
}

void Transcript::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write transcript: " + path);
  out << to_jsonl();
}

Transcript Transcript::from_jsonl(const std::string& text) {
  Transcript t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error("transcript line " + std::to_string(line_no) + " is not valid JSON: " +
                  e.what());
    }
    TranscriptEntry entry;
    entry.timestamp = j.value("timestamp", "");
    entry.request = request_from_json(j.at("request"));
    entry.response.text = j.at("response").value("text", "");
    entry.response.usage.prompt = j.at("response").value("prompt_tokens", std::int64_t{0});
    entry.response.usage.completion =
        j.at("response").value("completion_tokens", std::int64_t{0});
    t.entries_.push_back(std::move(entry));
  }
  return t;
}

Transcript Transcript::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open transcript: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_jsonl(buf.str());
}

TokenBucket::TokenBucket(RateLimit limit)
    : limit_(limit), tokens_(limit.burst), last_(std::chrono::steady_clock::now()) {
  if (limit_.requests_per_minute <= 0.0) throw ConfigError("rate limit must be positive");
}

void TokenBucket::acquire() {
  std::unique_lock lock(mutex_);
  for (;;) {
    const auto now = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(limit_.burst, tokens_ + elapsed * limit_.requests_per_minute / 60.0);
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const double wait_s = (1.0 - tokens_) * 60.0 / limit_.requests_per_minute;
    lock.unlock();
    std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
    lock.lock();
  }
}

ChatClient::ChatClient(std::shared_ptr<Transport> transport, RetryPolicy retry,
                       std::optional<RateLimit> rate_limit)
    : transport_(std::move(transport)),
      retry_(retry),
      transcript_(std::make_shared<Transcript>()) {
  if (!transport_) throw ConfigError("ChatClient requires a transport");
  if (retry_.max_attempts < 1) throw ConfigError("retry cap must be at least 1");
  if (rate_limit) bucket_ = std::make_unique<TokenBucket>(*rate_limit);
  sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

void ChatClient::set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) {
  sleeper_ = std::move(sleeper);
}

std::vector<AttemptLogEntry> ChatClient::attempt_log() const {
  std::lock_guard lock(attempts_mutex_);
  return attempts_;
}

int ChatClient::attempts_made() const {
  std::lock_guard lock(attempts_mutex_);
  return static_cast<int>(attempts_.size());
}

ChatResponse ChatClient::complete(const ChatRequest& request) {
  if (request.user_turns.empty()) throw ConfigError("chat request needs at least one user turn");
  if (request.max_output_tokens < 1) throw ConfigError("max_output_tokens must be at least 1");

  const auto log_attempt = [this](bool succeeded, const std::string& error) {
    std::lock_guard lock(attempts_mutex_);
    attempts_.push_back({utc_timestamp(), succeeded, error});
  };

  auto backoff = retry_.initial_backoff;
  std::string last_error;
  int attempts = 0;
  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    if (bucket_) bucket_->acquire();
    attempts = attempt;
    try {
      ChatResponse response = transport_->send(request);
      log_attempt(true, "");
      transcript_->append({request, response, utc_timestamp()});
      return response;
    } catch (const TransportError& e) {
      last_error = e.what();
      log_attempt(false, last_error);
      if (!e.retryable() || attempt == retry_.max_attempts) break;
      sleeper_(backoff);
      backoff = std::min(
          retry_.max_backoff,
          std::chrono::milliseconds(static_cast<std::int64_t>(
              static_cast<double>(backoff.count()) * retry_.backoff_multiplier)));
    }
  }
  throw Error("llm request failed after " + std::to_string(attempts) +
              " attempt(s): " + last_error);
}

}  // namespace surropub::llm
