#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "polifilter/backend.hpp"

namespace polifilter {

/// Content address of a generation: SHA-256 over the canonical serialization
/// of (role, model, prompt, decoding parameters). Equal requests against the
/// same model always collide; anything else never should.
std::string cache_key(const GenerationRequest& request, std::string_view model_id);

/// On-disk completion store, one JSON file per key under
/// `<dir>/<first-2-hex>/<key>.json`. Safe under concurrent read/write: writes
/// go to a temp file first, then rename into place.
class ResponseCache {
public:
  explicit ResponseCache(std::filesystem::path dir);

  /// Stored completion for the key, or nullopt. Unreadable entries count as
  /// misses so a damaged file can be overwritten by the next put.
  std::optional<std::string> get(const std::string& key) const;

  void put(const std::string& key, const GenerationRequest& request, std::string_view model_id,
           const std::string& completion);

  const std::filesystem::path& dir() const { return dir_; }

private:
  std::filesystem::path entry_path(const std::string& key) const;

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
};

}  // namespace polifilter
