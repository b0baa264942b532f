#include <doctest.h>

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tff/errors.hpp"
#include "tff/llm.hpp"

using namespace tff;
namespace fs = std::filesystem;

namespace {

fs::path tmp_file(const std::string& name) {
  fs::path path = fs::temp_directory_path() / ("tff_llm_" + name);
  fs::remove(path);
  return path;
}

std::string openai_body(const std::string& content) {
  return std::string(R"({"choices":[{"message":{"content":)") +
         nlohmann::json(content).dump() + "}}]}";
}

// Scripted transport: serves one queued response per call and keeps what it saw.
class FakeTransport : public Transport {
 public:
  std::vector<std::optional<HttpResponse>> script;
  std::vector<std::string> bodies;
  std::vector<std::string> tokens;
  size_t calls = 0;

  std::optional<HttpResponse> post_json(const std::string&, const std::string& token,
                                        const std::string& body, double) override {
    bodies.push_back(body);
    tokens.push_back(token);
    if (calls >= script.size()) return std::nullopt;
    return script[calls++];
  }
};

class MustNotBeCalled : public Transport {
 public:
  bool touched = false;
  std::optional<HttpResponse> post_json(const std::string&, const std::string&,
                                        const std::string&, double) override {
    touched = true;
    return std::nullopt;
  }
};

ClientOptions fast_options(std::string fixture_path = {}) {
  ClientOptions options;
  options.backoff_base_seconds = 0.0;
  options.fixture_path = std::move(fixture_path);
  return options;
}

struct EnvVarGuard {
  std::string name;
  EnvVarGuard(const std::string& var, const char* value) : name(var) {
    if (value) {
      setenv(name.c_str(), value, 1);
    } else {
      unsetenv(name.c_str());
    }
  }
  ~EnvVarGuard() { unsetenv(name.c_str()); }
};

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& err) {
    return err.code();
  }
  return ErrorCode::Ok;
}

}  // namespace

TEST_CASE("request hashes are stable 16-digit hex digests") {
  ModelConfig config = ModelConfig::preset("gpt-4");
  std::string hash = request_hash("prompt text", config);
  REQUIRE(hash.size() == 16);
  for (char c : hash) CHECK(std::isxdigit(static_cast<unsigned char>(c)));
  CHECK(hash == request_hash("prompt text", config));
  CHECK(hash != request_hash("prompt text ", config));

  ModelConfig other = config;
  other.model_id = "gpt-3.5-turbo";
  CHECK(hash != request_hash("prompt text", other));
  other = config;
  other.temperature = 0.7;
  CHECK(hash != request_hash("prompt text", other));

  // gateway details stay out of the key so fixtures survive endpoint moves
  other = config;
  other.endpoint_url = "http://proxy.internal/v1";
  other.auth_token_env_var = "OTHER_KEY";
  CHECK(hash == request_hash("prompt text", other));
}

TEST_CASE("fixture stores append, look up and keep the last record per hash") {
  fs::path path = tmp_file("store.jsonl");
  FixtureStore store(path.string(), false);
  CHECK(store.size() == 0);
  CHECK_FALSE(store.lookup("deadbeefdeadbeef").has_value());

  store.append({"aaaa000011112222", "p1", "first", "2023-07-01T00:00:00Z", "gpt-4", "live"});
  store.append({"aaaa000011112222", "p1", "second", "2023-07-01T00:01:00Z", "gpt-4", "live"});
  store.append({"bbbb000011112222", "p2", "other", "2023-07-01T00:02:00Z", "gpt-4", "live"});
  CHECK(store.size() == 3);
  REQUIRE(store.lookup("aaaa000011112222").has_value());
  CHECK(store.lookup("aaaa000011112222")->completion == "second");
  CHECK(store.lookup("bbbb000011112222")->origin == "live");

  // a fresh store reads the same file back
  FixtureStore reread(path.string(), true);
  CHECK(reread.size() == 3);
  CHECK(reread.lookup("aaaa000011112222")->completion == "second");
  fs::remove(path);
}

TEST_CASE("a replay store requires the fixture file to exist") {
  fs::path path = tmp_file("no_such.jsonl");
  CHECK(code_of([&] { FixtureStore store(path.string(), true); }) == ErrorCode::IoError);
  FixtureStore lax(path.string(), false);  // recording starts empty
  CHECK(lax.size() == 0);
}

TEST_CASE("malformed fixture lines are rejected with their line number") {
  fs::path path = tmp_file("broken.jsonl");
  {
    std::ofstream out(path);
    out << R"({"schema":"tff.completion.v1","request_hash":"00ff00ff00ff00ff","completion":"fine"})"
        << "\n";
    out << "not json at all\n";
  }
  try {
    FixtureStore store(path.string(), true);
    FAIL("expected a throw");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::SchemaMismatch);
    CHECK(std::string(err.what()).find(":2") != std::string::npos);
  }

  {
    std::ofstream out(path, std::ios::trunc);
    out << R"({"request_hash":"00ff00ff00ff00ff"})" << "\n";  // completion missing
  }
  CHECK(code_of([&] { FixtureStore store(path.string(), true); }) ==
        ErrorCode::SchemaMismatch);
  fs::remove(path);
}

TEST_CASE("live completions extract the first choice") {
  EnvVarGuard key("OPENAI_API_KEY", "test-token");
  auto transport = std::make_unique<FakeTransport>();
  FakeTransport* fake = transport.get();
  fake->script = {HttpResponse{200, openai_body("translational_z=-5  # N")}};

  Client client(Backend::Live, fast_options(), std::move(transport));
  std::string reply = client.complete("a prompt", ModelConfig::preset("gpt-4"));
  CHECK(reply == "translational_z=-5  # N");
  REQUIRE(fake->bodies.size() == 1);
  CHECK(fake->tokens[0] == "test-token");

  auto body = nlohmann::json::parse(fake->bodies[0]);
  CHECK(body["model"] == "gpt-4");
  CHECK(body["messages"][0]["role"] == "user");
  CHECK(body["messages"][0]["content"] == "a prompt");
  CHECK(body["temperature"] == 0.0);
}

TEST_CASE("record then replay round-trips the completion byte for byte") {
  fs::path path = tmp_file("roundtrip.jsonl");
  EnvVarGuard key("OPENAI_API_KEY", "test-token");
  const std::string completion = "def grounded():\n  translational_z=-5  # N\n";

  {
    auto transport = std::make_unique<FakeTransport>();
    transport->script = {HttpResponse{200, openai_body(completion)}};
    Client recorder(Backend::Record, fast_options(path.string()), std::move(transport));
    CHECK(recorder.complete("ground it", ModelConfig::preset("gpt-4")) == completion);
    CHECK(recorder.fixtures()->size() == 1);
  }

  auto guard = std::make_unique<MustNotBeCalled>();
  MustNotBeCalled* sentinel = guard.get();
  Client replayer(Backend::Replay, fast_options(path.string()), std::move(guard));
  CHECK(replayer.complete("ground it", ModelConfig::preset("gpt-4")) == completion);
  CHECK_FALSE(sentinel->touched);

  CHECK(code_of([&] {
          replayer.complete("something else", ModelConfig::preset("gpt-4"));
        }) == ErrorCode::FixtureMiss);
  fs::remove(path);
}

TEST_CASE("models without a live endpoint refuse live and record backends") {
  EnvVarGuard key("OPENAI_API_KEY", "test-token");
  Client client(Backend::Live, fast_options(), std::make_unique<FakeTransport>());
  CHECK(code_of([&] { client.complete("p", ModelConfig::preset("bard")); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("transient server errors are retried until the budget runs out") {
  EnvVarGuard key("OPENAI_API_KEY", "test-token");

  SUBCASE("a late success still wins") {
    auto transport = std::make_unique<FakeTransport>();
    FakeTransport* fake = transport.get();
    fake->script = {HttpResponse{500, ""}, HttpResponse{503, ""},
                    HttpResponse{200, openai_body("ok")}};
    Client client(Backend::Live, fast_options(), std::move(transport));
    CHECK(client.complete("p", ModelConfig::preset("gpt-4")) == "ok");
    CHECK(fake->calls == 3);
  }

  SUBCASE("persistent rate limiting surfaces as RateLimited") {
    auto transport = std::make_unique<FakeTransport>();
    FakeTransport* fake = transport.get();
    fake->script = {HttpResponse{429, ""}, HttpResponse{429, ""}, HttpResponse{429, ""}};
    Client client(Backend::Live, fast_options(), std::move(transport));
    CHECK(code_of([&] { client.complete("p", ModelConfig::preset("gpt-4")); }) ==
          ErrorCode::RateLimited);
    CHECK(fake->calls == 3);
  }

  SUBCASE("connection failures count against the same budget") {
    auto transport = std::make_unique<FakeTransport>();
    FakeTransport* fake = transport.get();
    fake->script = {std::nullopt, std::nullopt, HttpResponse{200, openai_body("ok")}};
    Client client(Backend::Live, fast_options(), std::move(transport));
    CHECK(client.complete("p", ModelConfig::preset("gpt-4")) == "ok");
    CHECK(fake->calls == 3);
  }
}

TEST_CASE("credential rejections fail immediately") {
  EnvVarGuard key("OPENAI_API_KEY", "test-token");
  auto transport = std::make_unique<FakeTransport>();
  FakeTransport* fake = transport.get();
  fake->script = {HttpResponse{401, ""}, HttpResponse{200, openai_body("never")}};
  Client client(Backend::Live, fast_options(), std::move(transport));
  CHECK(code_of([&] { client.complete("p", ModelConfig::preset("gpt-4")); }) ==
        ErrorCode::AuthError);
  CHECK(fake->calls == 1);
}

TEST_CASE("a missing auth token never reaches the network") {
  EnvVarGuard key("OPENAI_API_KEY", nullptr);
  auto transport = std::make_unique<FakeTransport>();
  FakeTransport* fake = transport.get();
  Client client(Backend::Live, fast_options(), std::move(transport));
  CHECK(code_of([&] { client.complete("p", ModelConfig::preset("gpt-4")); }) ==
        ErrorCode::AuthError);
  CHECK(fake->bodies.empty());
}

TEST_CASE("a malformed success body is an error, not a retry") {
  EnvVarGuard key("OPENAI_API_KEY", "test-token");
  auto transport = std::make_unique<FakeTransport>();
  FakeTransport* fake = transport.get();
  fake->script = {HttpResponse{200, R"({"unexpected":"shape"})"},
                  HttpResponse{200, openai_body("never")}};
  Client client(Backend::Live, fast_options(), std::move(transport));
  CHECK(code_of([&] { client.complete("p", ModelConfig::preset("gpt-4")); }) ==
        ErrorCode::NetworkError);
  CHECK(fake->calls == 1);
}

TEST_CASE("client construction validates its options") {
  CHECK(code_of([] { Client client(Backend::Record, ClientOptions{}); }) ==
        ErrorCode::InvalidArgument);  // no fixture path
  ClientOptions bad;
  bad.max_attempts = 0;
  CHECK(code_of([&] { Client client(Backend::Live, bad); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("backend names round-trip and reject typos") {
  CHECK(backend_from_name("live") == Backend::Live);
  CHECK(backend_from_name("record") == Backend::Record);
  CHECK(backend_from_name("replay") == Backend::Replay);
  CHECK(backend_name(Backend::Replay) == "replay");
  CHECK(code_of([] { backend_from_name("cached"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("model presets pin the decoding parameters per provider") {
  CHECK(ModelConfig::preset_ids().size() == 4);
  for (const std::string& id : ModelConfig::preset_ids()) {
    CHECK(ModelConfig::preset(id).model_id == id);
  }

  ModelConfig gpt4 = ModelConfig::preset("gpt-4");
  CHECK(gpt4.temperature == 0.0);
  CHECK(gpt4.endpoint_url.find("api.openai.com") != std::string::npos);
  CHECK(gpt4.auth_token_env_var == "OPENAI_API_KEY");
  CHECK_FALSE(gpt4.replay_only);

  ModelConfig bard = ModelConfig::preset("bard");
  CHECK(bard.replay_only);
  CHECK(bard.endpoint_url.empty());

  ModelConfig llama = ModelConfig::preset("llama-2-70b");
  CHECK(llama.temperature == 0.01);
  REQUIRE(llama.repetition_penalty.has_value());
  CHECK(*llama.repetition_penalty == 1.0);

  CHECK(code_of([] { ModelConfig::preset("nope"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("model configs are validated before use") {
  ModelConfig config = ModelConfig::preset("gpt-4");
  config.top_p = 0.0;
  CHECK(code_of([&] { validate_model_config(config); }) == ErrorCode::InvalidArgument);
  config = ModelConfig::preset("gpt-4");
  config.temperature = -0.1;
  CHECK(code_of([&] { validate_model_config(config); }) == ErrorCode::InvalidArgument);
  config = ModelConfig::preset("gpt-4");
  config.max_tokens = 0;
  CHECK(code_of([&] { validate_model_config(config); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("timestamps are ISO-8601 UTC") {
  std::string stamp = now_iso8601_utc();
  REQUIRE(stamp.size() == 20);
  CHECK(stamp[4] == '-');
  CHECK(stamp[7] == '-');
  CHECK(stamp[10] == 'T');
  CHECK(stamp[13] == ':');
  CHECK(stamp[16] == ':');
  CHECK(stamp.back() == 'Z');
}
