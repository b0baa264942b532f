#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "tff/errors.hpp"

namespace tff {

struct ModelConfig {
  std::string model_id;
  double temperature = 0.0;
  double top_p = 1.0;
  double frequency_penalty = 0.0;
  double presence_penalty = 0.0;
  std::optional<double> repetition_penalty;
  int max_tokens = 1024;
  std::string endpoint_url;
  std::string auth_token_env_var;
  double timeout_seconds = 120.0;
  // Models reachable only through a web GUI have no live endpoint; their
  // transcripts exist purely as fixtures.
  bool replay_only = false;

  // Known ids: gpt-3.5-turbo, gpt-4, bard, llama-2-70b. Throws
  // InvalidArgument for anything else.
  static ModelConfig preset(std::string_view model_id);
  static std::vector<std::string> preset_ids();
};

void validate_model_config(const ModelConfig& config);

std::string now_iso8601_utc();

// Stable 16-hex-digit digest (FNV-1a 64) over the model id, the decoding
// fields, and the prompt. Endpoint and auth are deliberately excluded so a
// fixture recorded against one gateway replays against any.
std::string request_hash(const std::string& prompt, const ModelConfig& config);

struct CompletionRecord {
  std::string request_hash;
  std::string prompt;
  std::string completion;
  std::string timestamp;  // ISO-8601 UTC
  std::string model_id;
  std::string origin;     // "live" or "synthetic"
};

// Append-only JSONL store of CompletionRecords, keyed by request_hash with
// last-record-wins semantics. Lookups and appends are thread-safe.
class FixtureStore {
 public:
  // must_exist covers replay: a missing fixture file is a caller error, not
  // an empty store.
  FixtureStore(std::string path, bool must_exist);

  std::optional<CompletionRecord> lookup(const std::string& hash) const;
  void append(const CompletionRecord& record);

  // Number of records read plus records appended.
  size_t size() const;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  mutable std::mutex mutex_;
  std::map<std::string, CompletionRecord> by_hash_;
  size_t count_ = 0;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Minimal HTTP seam so tests can inject canned responses or a transport that
// must never be touched.
class Transport {
 public:
  virtual ~Transport() = default;
  // POST a JSON body with bearer auth. nullopt = connection-level failure.
  virtual std::optional<HttpResponse> post_json(const std::string& url,
                                                const std::string& bearer_token,
                                                const std::string& body,
                                                double timeout_seconds) = 0;
};

std::unique_ptr<Transport> make_http_transport();

enum class Backend { Live, Record, Replay };

Backend backend_from_name(std::string_view name);
std::string_view backend_name(Backend backend);

struct ClientOptions {
  int max_attempts = 3;
  double backoff_base_seconds = 0.5;  // attempt n sleeps base * 2^(n-1)
  int max_concurrent_requests = 4;
  std::string fixture_path;  // Record and Replay only
};

// Chat-completion client over an OpenAI-style JSON endpoint. The whole
// prompt travels as a single user message. Shareable across threads; in-flight
// requests are capped by max_concurrent_requests.
class Client {
 public:
  Client(Backend backend, ClientOptions options,
         std::unique_ptr<Transport> transport = nullptr);

  // Live: first choice's message text. Record: live behavior plus a fixture
  // append. Replay: the stored completion, no network.
  // Throws AuthError (missing token, 401/403), RateLimited (429 after
  // retries), NetworkError (connect failures / 5xx after retries, malformed
  // bodies), FixtureMiss (replay).
  std::string complete(const std::string& prompt, const ModelConfig& config);

  Backend backend() const { return backend_; }
  const FixtureStore* fixtures() const { return store_.get(); }

 private:
  std::string complete_live(const std::string& prompt, const ModelConfig& config);

  Backend backend_;
  ClientOptions options_;
  std::unique_ptr<Transport> transport_;
  std::unique_ptr<FixtureStore> store_;
  std::counting_semaphore<> slots_;
};

}  // namespace tff
