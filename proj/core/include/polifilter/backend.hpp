#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace polifilter {

enum class Role { ExplainedClassifier, BlankFiller };

/// Stable wire/script name: "explained_classifier" or "blank_filler".
std::string_view role_name(Role role);
std::optional<Role> parse_role(std::string_view name);

struct GenerationRequest {
  Role role{};
  std::string prompt;                       // non-empty
  std::size_t max_new_tokens = 512;         // >= 1
  double temperature = 0.0;
  std::vector<std::string> stop_sequences;
};

/// A text-generation service. Implementations must be safe to call from
/// several threads at once.
class Backend {
public:
  virtual ~Backend() = default;

  /// Raw completion text. Throws BackendUnavailable on transport or service
  /// failure and AuthFailure when credentials are rejected.
  virtual std::string complete(const GenerationRequest& request) = 0;

  /// Identifier mixed into cache keys so different models never share entries.
  virtual std::string model_id() const = 0;
};

/// Deterministic scripted backend: maps (role, sha256(prompt)) to a fixed
/// completion and fails like an unreachable service on anything unscripted.
class MockBackend : public Backend {
public:
  MockBackend() = default;

  /// Loads a JSONL script: {"match": {"role", "prompt_sha256"}, "completion"}.
  static MockBackend from_script(const std::filesystem::path& path);

  void add(Role role, std::string prompt_sha256, std::string completion);
  std::size_t size() const { return script_.size(); }

  std::string complete(const GenerationRequest& request) override;
  std::string model_id() const override { return "mock"; }

private:
  std::map<std::pair<std::string, std::string>, std::string> script_;
};

struct HttpBackendConfig {
  std::string endpoint;  // e.g. "http://127.0.0.1:8080/v1/chat/completions"
  std::string api_key;   // sent as a bearer token when non-empty
  std::string model = "default";
  std::chrono::seconds connect_timeout{10};
  std::chrono::seconds read_timeout{120};
};

/// OpenAI-compatible chat-completions client (plain HTTP).
class HttpBackend : public Backend {
public:
  explicit HttpBackend(HttpBackendConfig config);

  std::string complete(const GenerationRequest& request) override;
  std::string model_id() const override { return config_.model; }

private:
  HttpBackendConfig config_;
  std::string base_url_;  // scheme://host:port
  std::string path_;      // /v1/chat/completions
};

}  // namespace polifilter
