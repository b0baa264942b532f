#include "tff/llm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "tff/types.hpp"

namespace tff {

namespace {

using nlohmann::json;

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char byte : data) {
    hash ^= byte;
    hash *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

CompletionRecord record_from_line(const std::string& line, const std::string& path,
                                  size_t line_no) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::exception& e) {
    raise(ErrorCode::SchemaMismatch,
          path + ":" + std::to_string(line_no) + ": not valid JSON: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("request_hash") ||
      !doc["request_hash"].is_string() || !doc.contains("completion") ||
      !doc["completion"].is_string()) {
    raise(ErrorCode::SchemaMismatch,
          path + ":" + std::to_string(line_no) +
              ": completion record needs request_hash and completion strings");
  }
  CompletionRecord record;
  record.request_hash = doc["request_hash"].get<std::string>();
  record.completion = doc["completion"].get<std::string>();
  record.prompt = doc.value("prompt", std::string{});
  record.timestamp = doc.value("timestamp", std::string{});
  record.model_id = doc.value("model", std::string{});
  record.origin = doc.value("origin", std::string{});
  return record;
}

json record_to_json(const CompletionRecord& record) {
  return {{"schema", "tff.completion.v1"},
          {"request_hash", record.request_hash},
          {"model", record.model_id},
          {"prompt", record.prompt},
          {"completion", record.completion},
          {"timestamp", record.timestamp},
          {"origin", record.origin}};
}

class HttplibTransport : public Transport {
 public:
  std::optional<HttpResponse> post_json(const std::string& url,
                                        const std::string& bearer_token,
                                        const std::string& body,
                                        double timeout_seconds) override {
    auto split = split_url(url);
    if (!split) return std::nullopt;
    httplib::Client client(split->first);
    auto seconds = std::max<time_t>(1, static_cast<time_t>(timeout_seconds));
    client.set_connection_timeout(seconds, 0);
    client.set_read_timeout(seconds, 0);
    client.set_write_timeout(seconds, 0);
    httplib::Headers headers;
    if (!bearer_token.empty()) {
      headers.emplace("Authorization", "Bearer " + bearer_token);
    }
    auto result = client.Post(split->second, headers, body, "application/json");
    if (!result) return std::nullopt;
    return HttpResponse{result->status, result->body};
  }

 private:
  // "scheme://host[:port]/path" -> (scheme://host[:port], /path)
  static std::optional<std::pair<std::string, std::string>> split_url(
      const std::string& url) {
    auto scheme = url.find("://");
    if (scheme == std::string::npos) return std::nullopt;
    auto path = url.find('/', scheme + 3);
    if (path == std::string::npos) return std::make_pair(url, std::string("/"));
    return std::make_pair(url.substr(0, path), url.substr(path));
  }
};

}  // namespace

std::string now_iso8601_utc() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ModelConfig ModelConfig::preset(std::string_view model_id) {
  ModelConfig config;
  config.model_id = std::string(model_id);
  if (model_id == "gpt-3.5-turbo" || model_id == "gpt-4") {
    config.temperature = 0.0;
    config.top_p = 1.0;
    config.frequency_penalty = 0.0;
    config.presence_penalty = 0.0;
    config.endpoint_url = "https://api.openai.com/v1/chat/completions";
    config.auth_token_env_var = "OPENAI_API_KEY";
  } else if (model_id == "bard") {
    // Web-GUI only; no decoding controls exposed, transcripts are fixtures.
    config.temperature = 0.0;
    config.replay_only = true;
  } else if (model_id == "llama-2-70b") {
    config.temperature = 0.01;
    config.top_p = 1.0;
    config.repetition_penalty = 1.0;
    config.endpoint_url = "http://localhost:8000/v1/chat/completions";
    config.auth_token_env_var = "LLAMA_API_KEY";
  } else {
    raise(ErrorCode::InvalidArgument,
          "unknown model \"" + std::string(model_id) + "\"; known: gpt-3.5-turbo, " +
              "gpt-4, bard, llama-2-70b");
  }
  return config;
}

std::vector<std::string> ModelConfig::preset_ids() {
  return {"gpt-3.5-turbo", "gpt-4", "bard", "llama-2-70b"};
}

void validate_model_config(const ModelConfig& config) {
  if (config.model_id.empty()) {
    raise(ErrorCode::InvalidArgument, "model_id must not be empty");
  }
  if (config.temperature < 0) {
    raise(ErrorCode::InvalidArgument, "temperature must be >= 0");
  }
  if (!(config.top_p > 0 && config.top_p <= 1)) {
    raise(ErrorCode::InvalidArgument, "top_p must be in (0, 1]");
  }
  if (config.max_tokens <= 0) {
    raise(ErrorCode::InvalidArgument, "max_tokens must be positive");
  }
}

std::string request_hash(const std::string& prompt, const ModelConfig& config) {
  std::ostringstream canonical;
  canonical << "model=" << config.model_id
            << ";temperature=" << format_number(config.temperature)
            << ";top_p=" << format_number(config.top_p)
            << ";frequency_penalty=" << format_number(config.frequency_penalty)
            << ";presence_penalty=" << format_number(config.presence_penalty)
            << ";repetition_penalty="
            << (config.repetition_penalty ? format_number(*config.repetition_penalty)
                                          : std::string("none"))
            << ";max_tokens=" << config.max_tokens << ";prompt=" << prompt;
  return fnv1a_hex(canonical.str());
}

FixtureStore::FixtureStore(std::string path, bool must_exist)
    : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) {
    if (must_exist) {
      raise(ErrorCode::IoError, "fixture store not found: " + path_);
    }
    return;
  }
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    CompletionRecord record = record_from_line(line, path_, line_no);
    by_hash_[record.request_hash] = std::move(record);  // last one wins
    ++count_;
  }
}

std::optional<CompletionRecord> FixtureStore::lookup(const std::string& hash) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = by_hash_.find(hash);
  if (it == by_hash_.end()) return std::nullopt;
  return it->second;
}

void FixtureStore::append(const CompletionRecord& record) {
  std::lock_guard<std::mutex> lock(mutex_);
  std::ofstream out(path_, std::ios::app);
  if (!out) {
    raise(ErrorCode::IoError, "cannot append to fixture store " + path_);
  }
  out << record_to_json(record).dump() << "\n";
  out.flush();
  if (!out) {
    raise(ErrorCode::IoError, "write to fixture store failed: " + path_);
  }
  by_hash_[record.request_hash] = record;
  ++count_;
}

size_t FixtureStore::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return count_;
}

std::unique_ptr<Transport> make_http_transport() {
  return std::make_unique<HttplibTransport>();
}

Backend backend_from_name(std::string_view name) {
  if (name == "live") return Backend::Live;
  if (name == "record") return Backend::Record;
  if (name == "replay") return Backend::Replay;
  raise(ErrorCode::InvalidArgument,
        "unknown backend \"" + std::string(name) + "\"; use live, record or replay");
}

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::Live: return "live";
    case Backend::Record: return "record";
    case Backend::Replay: return "replay";
  }
  return "";
}

Client::Client(Backend backend, ClientOptions options,
               std::unique_ptr<Transport> transport)
    : backend_(backend),
      options_(std::move(options)),
      transport_(std::move(transport)),
      slots_(std::max(1, options_.max_concurrent_requests)) {
  if (options_.max_attempts < 1) {
    raise(ErrorCode::InvalidArgument, "max_attempts must be at least 1");
  }
  if (backend_ != Backend::Live) {
    if (options_.fixture_path.empty()) {
      raise(ErrorCode::InvalidArgument,
            std::string(backend_name(backend_)) + " backend needs a fixture path");
    }
    store_ = std::make_unique<FixtureStore>(options_.fixture_path,
                                            backend_ == Backend::Replay);
  }
  if (backend_ != Backend::Replay && !transport_) {
    transport_ = make_http_transport();
  }
}

std::string Client::complete(const std::string& prompt, const ModelConfig& config) {
  validate_model_config(config);
  const std::string hash = request_hash(prompt, config);

  if (backend_ == Backend::Replay) {
    auto record = store_->lookup(hash);
    if (!record) {
      raise(ErrorCode::FixtureMiss,
            "no fixture for model " + config.model_id + ", request " + hash);
    }
    return record->completion;
  }

  if (config.replay_only) {
    raise(ErrorCode::InvalidArgument,
          "model " + config.model_id + " has no live endpoint; use the replay backend");
  }

  std::string completion = complete_live(prompt, config);
  if (backend_ == Backend::Record) {
    store_->append(CompletionRecord{hash, prompt, completion, now_iso8601_utc(),
                                    config.model_id, "live"});
  }
  return completion;
}

std::string Client::complete_live(const std::string& prompt, const ModelConfig& config) {
  const char* token = config.auth_token_env_var.empty()
                          ? nullptr
                          : std::getenv(config.auth_token_env_var.c_str());
  if (!token || !*token) {
    raise(ErrorCode::AuthError,
          "auth token environment variable " + config.auth_token_env_var + " not set");
  }

  json body = {{"model", config.model_id},
               {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
               {"temperature", config.temperature},
               {"top_p", config.top_p},
               {"frequency_penalty", config.frequency_penalty},
               {"presence_penalty", config.presence_penalty},
               {"max_tokens", config.max_tokens}};
  if (config.repetition_penalty) {
    body["repetition_penalty"] = *config.repetition_penalty;
  }
  const std::string payload = body.dump();

  slots_.acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{slots_};

  ErrorCode last_code = ErrorCode::NetworkError;
  std::string last_message = "request failed";
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    if (attempt > 1 && options_.backoff_base_seconds > 0) {
      double delay = options_.backoff_base_seconds * std::pow(2.0, attempt - 2);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }

    auto response = transport_->post_json(config.endpoint_url, token, payload,
                                          config.timeout_seconds);
    if (!response) {
      last_code = ErrorCode::NetworkError;
      last_message = "cannot reach " + config.endpoint_url;
      continue;
    }
    if (response->status == 401 || response->status == 403) {
      raise(ErrorCode::AuthError, "endpoint rejected credentials (HTTP " +
                                      std::to_string(response->status) + ")");
    }
    if (response->status == 429) {
      last_code = ErrorCode::RateLimited;
      last_message = "rate limited (HTTP 429)";
      continue;
    }
    if (response->status >= 500) {
      last_code = ErrorCode::NetworkError;
      last_message = "server error (HTTP " + std::to_string(response->status) + ")";
      continue;
    }
    if (response->status != 200) {
      raise(ErrorCode::NetworkError,
            "unexpected HTTP " + std::to_string(response->status));
    }

    try {
      json doc = json::parse(response->body);
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      raise(ErrorCode::NetworkError,
            std::string("malformed completion response: ") + e.what());
    }
  }
  raise(last_code, last_message + " after " + std::to_string(options_.max_attempts) +
                       " attempts");
}

}  // namespace tff
