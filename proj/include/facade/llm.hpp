#pragma once

// LLM access: a live client for any OpenAI-compatible /chat/completions
// endpoint with mixed text+image content, a fixture-playback mock with the
// same interface, and a write-through disk cache usable in front of either.
// Retry policy: auth failures are terminal; 429 and transport errors are
// retried with exponential backoff up to max_retries.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "facade/promptkit.hpp"

namespace facade {

struct LlmConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model_name = "gpt-4o";
  std::string api_key;  // FACADE_AUDIT_API_KEY, fallback OPENAI_API_KEY
  std::optional<double> temperature;  // unset = provider default
  int max_retries = 3;
  std::chrono::milliseconds timeout{120000};
  int max_inflight = 4;
};

inline std::string api_key_from_env() {
  if (const char* key = std::getenv("FACADE_AUDIT_API_KEY")) return key;
  if (const char* key = std::getenv("OPENAI_API_KEY")) return key;
  return {};
}

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct CompletionResult {
  std::string text;
  PromptId prompt_id;
  std::string property_id;
  std::optional<TokenUsage> token_usage;
  bool from_cache = false;
};

struct LlmError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AuthError : LlmError {
  using LlmError::LlmError;
};
struct RateLimited : LlmError {
  using LlmError::LlmError;
};
struct TransportError : LlmError {
  using LlmError::LlmError;
};
struct MalformedResponse : LlmError {
  using LlmError::LlmError;
};
struct FixtureMissing : LlmError {
  using LlmError::LlmError;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual CompletionResult complete(const PromptPayload& payload,
                                    const std::string& property_id) = 0;
  // Completions actually produced (cache hits excluded).
  virtual int calls_made() const = 0;
};

namespace detail {

inline std::string base64_encode(std::string_view bytes) {
  static constexpr char alphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    std::uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                      (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                      static_cast<unsigned char>(bytes[i + 2]);
    out.push_back(alphabet[(n >> 18) & 63]);
    out.push_back(alphabet[(n >> 12) & 63]);
    out.push_back(alphabet[(n >> 6) & 63]);
    out.push_back(alphabet[n & 63]);
  }
  if (i < bytes.size()) {
    std::uint32_t n = static_cast<unsigned char>(bytes[i]) << 16;
    bool two = i + 1 < bytes.size();
    if (two) n |= static_cast<unsigned char>(bytes[i + 1]) << 8;
    out.push_back(alphabet[(n >> 18) & 63]);
    out.push_back(alphabet[(n >> 12) & 63]);
    out.push_back(two ? alphabet[(n >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

inline std::string mime_for_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png") return "image/png";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  return "image/jpeg";
}

// Remote URIs pass through; local files become inline data URIs.
inline std::string image_ref_to_url(const std::string& ref) {
  if (ref.starts_with("http://") || ref.starts_with("https://") ||
      ref.starts_with("data:")) {
    return ref;
  }
  std::ifstream in(ref, std::ios::binary);
  if (!in) throw TransportError("cannot read image file: " + ref);
  std::ostringstream buf;
  buf << in.rdbuf();
  return "data:" + mime_for_extension(ref) +
         ";base64," + base64_encode(std::move(buf).str());
}

inline std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Stable across runs (std::hash is not guaranteed to be).
inline std::string payload_hash(const PromptPayload& payload) {
  std::uint64_t h = 14695981039346656037ULL;
  h = fnv1a(payload.text, h);
  for (const auto& image : payload.images) {
    h = fnv1a("\x1f", h);
    h = fnv1a(image, h);
  }
  std::ostringstream out;
  out << std::hex << h;
  return std::move(out).str();
}

class Semaphore {
 public:
  explicit Semaphore(int count) : count_(count) {}
  void acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return count_ > 0; });
    --count_;
  }
  void release() {
    {
      std::lock_guard lock(mutex_);
      ++count_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int count_;
};

struct SemaphoreGuard {
  Semaphore& sem;
  explicit SemaphoreGuard(Semaphore& s) : sem(s) { sem.acquire(); }
  ~SemaphoreGuard() { sem.release(); }
};

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix, no trailing slash
};

inline ParsedUrl split_base_url(const std::string& base_url) {
  auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw AuthError("base_url must be absolute: " + base_url);
  }
  auto path_start = base_url.find('/', scheme_end + 3);
  ParsedUrl out;
  if (path_start == std::string::npos) {
    out.origin = base_url;
  } else {
    out.origin = base_url.substr(0, path_start);
    out.path = base_url.substr(path_start);
  }
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

}  // namespace detail

// Live client. The sleep function is injectable so retry behavior is
// testable without real delays.
class HttpLlmClient : public LlmClient {
 public:
  using SleepFn = std::function<void(std::chrono::milliseconds)>;

  explicit HttpLlmClient(LlmConfig config, SleepFn sleep = nullptr)
      : config_(std::move(config)),
        inflight_(config_.max_inflight),
        sleep_(sleep ? std::move(sleep) : [](std::chrono::milliseconds d) {
          std::this_thread::sleep_for(d);
        }) {}

  CompletionResult complete(const PromptPayload& payload,
                            const std::string& property_id) override {
    if (config_.api_key.empty()) {
      throw AuthError("no API key configured (set FACADE_AUDIT_API_KEY)");
    }
    std::string body = request_body(payload).dump();
    detail::ParsedUrl url = detail::split_base_url(config_.base_url);

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) sleep_(backoff_delay(attempt));
      detail::SemaphoreGuard guard(inflight_);
      ++calls_;
      httplib::Client client(url.origin);
      auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
      client.set_connection_timeout(seconds.count(), 0);
      client.set_read_timeout(seconds.count(), 0);
      client.set_bearer_token_auth(config_.api_key);
      auto res = client.Post(url.path + "/chat/completions", body,
                             "application/json");
      if (!res) {
        last_error = "network error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 401 || res->status == 403) {
        throw AuthError("authentication rejected (HTTP " +
                        std::to_string(res->status) + ")");
      }
      if (res->status == 429) {
        last_error = "rate limited (HTTP 429)";
        continue;
      }
      if (res->status >= 500) {
        last_error = "server error (HTTP " + std::to_string(res->status) + ")";
        continue;
      }
      if (res->status != 200) {
        throw TransportError("unexpected HTTP " + std::to_string(res->status) +
                             ": " + res->body.substr(0, 200));
      }
      return parse_response(res->body, payload, property_id);
    }
    if (last_error.starts_with("rate limited")) {
      throw RateLimited(last_error + " after " +
                        std::to_string(config_.max_retries + 1) + " attempts");
    }
    throw TransportError(last_error + " after " +
                         std::to_string(config_.max_retries + 1) + " attempts");
  }

  int calls_made() const override { return calls_.load(); }

  // Strictly increasing: 500ms * 2^(attempt-1).
  static std::chrono::milliseconds backoff_delay(int attempt) {
    return std::chrono::milliseconds(500LL << (attempt - 1));
  }

  nlohmann::json request_body(const PromptPayload& payload) const {
    nlohmann::json content = nlohmann::json::array();
    content.push_back({{"type", "text"}, {"text", payload.text}});
    for (const auto& image : payload.images) {
      content.push_back(
          {{"type", "image_url"},
           {"image_url", {{"url", detail::image_ref_to_url(image)}}}});
    }
    nlohmann::json body = {
        {"model", config_.model_name},
        {"messages",
         nlohmann::json::array({{{"role", "user"}, {"content", content}}})},
    };
    if (config_.temperature) body["temperature"] = *config_.temperature;
    return body;
  }

 private:
  CompletionResult parse_response(const std::string& body,
                                  const PromptPayload& payload,
                                  const std::string& property_id) const {
    nlohmann::json reply =
        nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (reply.is_discarded()) throw MalformedResponse("response is not JSON");
    std::string text =
        reply.value("choices", nlohmann::json::array())
            .empty()
            ? std::string{}
            : reply["choices"][0].value("message", nlohmann::json::object())
                  .value("content", std::string{});
    if (text.empty()) throw MalformedResponse("no assistant text in reply");
    CompletionResult result{std::move(text), payload.prompt_id, property_id,
                            std::nullopt, false};
    if (reply.contains("usage") && reply["usage"].is_object()) {
      result.token_usage = TokenUsage{
          reply["usage"].value("prompt_tokens", std::int64_t{0}),
          reply["usage"].value("completion_tokens", std::int64_t{0})};
    }
    return result;
  }

  LlmConfig config_;
  detail::Semaphore inflight_;
  SleepFn sleep_;
  std::atomic<int> calls_{0};
};

// Plays back canned responses from <fixtures_dir>/<property_id>/<prompt>.txt.
class MockLlmClient : public LlmClient {
 public:
  explicit MockLlmClient(std::filesystem::path fixtures_dir)
      : fixtures_dir_(std::move(fixtures_dir)) {}

  CompletionResult complete(const PromptPayload& payload,
                            const std::string& property_id) override {
    auto path = fixtures_dir_ / property_id /
                (std::string(to_string(payload.prompt_id)) + ".txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FixtureMissing("no fixture at " + path.string());
    ++calls_;
    std::ostringstream buf;
    buf << in.rdbuf();
    return {std::move(buf).str(), payload.prompt_id, property_id, std::nullopt,
            true};
  }

  int calls_made() const override { return calls_.load(); }

 private:
  std::filesystem::path fixtures_dir_;
  std::atomic<int> calls_{0};
};

// Write-through cache keyed by (property, prompt, payload hash). Cache files
// are written to a temp name then renamed, so a crash never leaves a torn
// entry behind.
class CachingLlmClient : public LlmClient {
 public:
  CachingLlmClient(std::shared_ptr<LlmClient> inner,
                   std::filesystem::path cache_dir)
      : inner_(std::move(inner)), cache_dir_(std::move(cache_dir)) {}

  CompletionResult complete(const PromptPayload& payload,
                            const std::string& property_id) override {
    auto path = cache_path(payload, property_id);
    {
      std::ifstream in(path, std::ios::binary);
      if (in) {
        std::ostringstream buf;
        buf << in.rdbuf();
        return {std::move(buf).str(), payload.prompt_id, property_id,
                std::nullopt, true};
      }
    }
    CompletionResult result = inner_->complete(payload, property_id);
    std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      out << result.text;
    }
    std::filesystem::rename(tmp, path);
    return result;
  }

  int calls_made() const override { return inner_->calls_made(); }

  std::filesystem::path cache_path(const PromptPayload& payload,
                                   const std::string& property_id) const {
    return cache_dir_ / property_id /
           (std::string(to_string(payload.prompt_id)) + "." +
            detail::payload_hash(payload) + ".txt");
  }

 private:
  std::shared_ptr<LlmClient> inner_;
  std::filesystem::path cache_dir_;
};

}  // namespace facade
