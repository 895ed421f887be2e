#include "polifilter/verifier.hpp"

#include <httplib.h>
#include <json.hpp>

#include "polifilter/errors.hpp"
#include "polifilter/metrics.hpp"
#include "polifilter/text.hpp"

namespace polifilter {
namespace {

using nlohmann::json;

void check_part(std::string_view part, const char* what) {
  if (text::trim(part).empty()) {
    throw InputError(std::string("verifier input has an empty ") + what);
  }
  if (part.find(kSepToken) != std::string_view::npos) {
    throw InputError(std::string(what) + " contains the separator token");
  }
}

}  // namespace

VerifierInput make_verifier_input(Label12 label, std::string_view reason,
                                  std::string_view refill) {
  check_part(reason, "reason");
  check_part(refill, "refill");
  VerifierInput input;
  input.label = label;
  input.reason = std::string(reason);
  input.refill = std::string(refill);
  input.encoded = std::string(label_name(label));
  input.encoded += kSepToken;
  input.encoded += reason;
  input.encoded += kSepToken;
  input.encoded += refill;
  return input;
}

double LexicalBaseline::score(const VerifierInput& input) {
  return word_overlap(input.reason, input.refill);
}

RemoteScorer::RemoteScorer(RemoteScorerConfig config) : config_(std::move(config)) {
  const std::string& url = config_.endpoint;
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw InputError("scorer endpoint '" + url + "' has no scheme");
  }
  if (url.compare(0, scheme_end, "http") != 0) {
    throw InputError("scorer endpoint '" + url + "' is not http");
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    base_url_ = url;
    path_ = "/";
  } else {
    base_url_ = url.substr(0, path_start);
    path_ = url.substr(path_start);
  }
}

double RemoteScorer::score(const VerifierInput& input) {
  httplib::Client client(base_url_);
  client.set_connection_timeout(config_.connect_timeout.count(), 0);
  client.set_read_timeout(config_.read_timeout.count(), 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  const json body = {{"text", input.encoded}};
  const httplib::Result res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw BackendUnavailable("no response from scorer " + base_url_ + ": " +
                             httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw BackendUnavailable("scorer returned HTTP " + std::to_string(res->status));
  }
  double value = 0.0;
  try {
    value = json::parse(res->body).at("score").get<double>();
  } catch (const json::exception& ex) {
    throw BackendUnavailable(std::string("malformed scorer response: ") + ex.what());
  }
  if (!(value >= 0.0 && value <= 1.0)) {
    throw BackendUnavailable("scorer returned out-of-range score " + std::to_string(value));
  }
  return value;
}

}  // namespace polifilter
