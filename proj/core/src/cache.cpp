#include "polifilter/cache.hpp"

#include <ctime>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "polifilter/digest.hpp"
#include "polifilter/errors.hpp"

namespace polifilter {
namespace {

using nlohmann::json;

json request_json(const GenerationRequest& request, std::string_view model_id) {
  return json{
      {"role", std::string(role_name(request.role))},
      {"model", std::string(model_id)},
      {"prompt", request.prompt},
      {"max_new_tokens", request.max_new_tokens},
      {"temperature", request.temperature},
      {"stop_sequences", request.stop_sequences},
  };
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string cache_key(const GenerationRequest& request, std::string_view model_id) {
  // dump() emits keys sorted, so the serialization is canonical.
  return sha256_hex(request_json(request, model_id).dump());
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoFailure("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  const std::lock_guard<std::mutex> lock(mutex_);
  std::ifstream in(entry_path(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    const json obj = json::parse(buf.str());
    return obj.at("completion").get<std::string>();
  } catch (const json::exception&) {
    return std::nullopt;  // damaged entry, let the next put repair it
  }
}

void ResponseCache::put(const std::string& key, const GenerationRequest& request,
                        std::string_view model_id, const std::string& completion) {
  const json obj = {
      {"request", request_json(request, model_id)},
      {"completion", completion},
      {"timestamp", utc_now()},
  };
  const std::lock_guard<std::mutex> lock(mutex_);
  const std::filesystem::path target = entry_path(key);
  std::error_code ec;
  std::filesystem::create_directories(target.parent_path(), ec);
  if (ec) {
    throw IoFailure("cannot create " + target.parent_path().string() + ": " + ec.message());
  }
  const std::filesystem::path tmp =
      target.parent_path() / (key + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoFailure("cannot write cache entry " + tmp.string());
    out << obj.dump() << '\n';
    if (!out) throw IoFailure("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw IoFailure("cannot finalize cache entry " + target.string() + ": " + ec.message());
}

}  // namespace polifilter
