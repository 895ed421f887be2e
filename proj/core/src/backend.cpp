#include "polifilter/backend.hpp"

#include <fstream>

#include <httplib.h>
#include <json.hpp>

#include "polifilter/digest.hpp"
#include "polifilter/errors.hpp"
#include "polifilter/text.hpp"

namespace polifilter {
namespace {

using nlohmann::json;

}  // namespace

std::string_view role_name(Role role) {
  switch (role) {
    case Role::ExplainedClassifier: return "explained_classifier";
    case Role::BlankFiller: return "blank_filler";
  }
  return "unknown";
}

std::optional<Role> parse_role(std::string_view name) {
  if (name == "explained_classifier") return Role::ExplainedClassifier;
  if (name == "blank_filler") return Role::BlankFiller;
  return std::nullopt;
}

MockBackend MockBackend::from_script(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open mock script " + path.string());
  MockBackend backend;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string origin = path.string() + ":" + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& ex) {
      throw MalformedSource(origin + ": " + ex.what());
    }
    try {
      const json& match = obj.at("match");
      const std::string role_str = match.at("role").get<std::string>();
      const auto role = parse_role(role_str);
      if (!role) throw MalformedSource(origin + ": unknown role '" + role_str + "'");
      backend.add(*role, match.at("prompt_sha256").get<std::string>(),
                  obj.at("completion").get<std::string>());
    } catch (const json::exception& ex) {
      throw MalformedSource(origin + ": " + ex.what());
    }
  }
  return backend;
}

void MockBackend::add(Role role, std::string prompt_sha256, std::string completion) {
  script_[{std::string(role_name(role)), std::move(prompt_sha256)}] = std::move(completion);
}

std::string MockBackend::complete(const GenerationRequest& request) {
  const std::string digest = sha256_hex(request.prompt);
  const auto it = script_.find({std::string(role_name(request.role)), digest});
  if (it == script_.end()) {
    throw BackendUnavailable("mock script has no entry for role=" +
                             std::string(role_name(request.role)) + " prompt_sha256=" + digest);
  }
  return it->second;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const std::string& url = config_.endpoint;
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw InputError("endpoint '" + url + "' has no scheme, expected http://host[:port]/path");
  }
  if (url.compare(0, scheme_end, "http") != 0) {
    throw InputError("endpoint '" + url + "' is not http; TLS termination must happen upstream");
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    base_url_ = url;
    path_ = "/v1/chat/completions";
  } else {
    base_url_ = url.substr(0, path_start);
    path_ = url.substr(path_start);
  }
}

std::string HttpBackend::complete(const GenerationRequest& request) {
  json body = {
      {"model", config_.model},
      {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
      {"max_tokens", request.max_new_tokens},
      {"temperature", request.temperature},
  };
  if (!request.stop_sequences.empty()) body["stop"] = request.stop_sequences;

  httplib::Client client(base_url_);
  client.set_connection_timeout(config_.connect_timeout.count(), 0);
  client.set_read_timeout(config_.read_timeout.count(), 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  const httplib::Result res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw BackendUnavailable("no response from " + base_url_ + ": " +
                             httplib::to_string(res.error()));
  }
  if (res->status == 401 || res->status == 403) {
    throw AuthFailure("endpoint rejected credentials with HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw BackendUnavailable("endpoint returned HTTP " + std::to_string(res->status));
  }
  try {
    const json reply = json::parse(res->body);
    const json& choice = reply.at("choices").at(0);
    if (choice.contains("message")) {
      return choice.at("message").at("content").get<std::string>();
    }
    return choice.at("text").get<std::string>();
  } catch (const json::exception& ex) {
    throw BackendUnavailable(std::string("malformed completion response: ") + ex.what());
  }
}

}  // namespace polifilter
