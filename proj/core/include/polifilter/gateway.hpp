#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "polifilter/backend.hpp"
#include "polifilter/cache.hpp"
#include "polifilter/corpus.hpp"
#include "polifilter/labels.hpp"

namespace polifilter {

/// One classification-with-reason emitted by the generative classifier.
struct ReasonedPrediction {
  std::string paragraph_id;
  Label12 label{};
  std::string reason;          // verbatim excerpt claimed by the model
  std::string raw_generation;  // the full completion it was parsed from
};

/// Replacement text produced for a masked reason.
struct Refill {
  std::string paragraph_id;
  Label12 label{};
  std::string refill_text;
};

/// Literal token substituted for a masked reason.
inline constexpr std::string_view kMaskToken = "<BLANK>";

/// Deterministic prompt asking for one `Label: ... | Reason: "..."` line per
/// applicable class. Embeds the paragraph text verbatim.
std::string build_classifier_prompt(const Paragraph& paragraph);

/// Deterministic prompt asking for the text hidden behind the single mask
/// token. Throws NoMaskToken / MultipleMaskTokens.
std::string build_filler_prompt(std::string_view masked_text, Label12 label);

struct ParsedPairs {
  std::vector<std::pair<Label12, std::string>> pairs;  // completion order
  std::size_t dropped_lines = 0;  // malformed or unknown-class lines
};

/// Lossy line parser for classifier completions. A line parses iff it has the
/// shape `Label: <name> | Reason: "<text>"` with a known class name and a
/// non-empty reason; everything else is dropped and counted. Reasons keep
/// embedded quotes: the text runs from the first quote to the last.
ParsedPairs parse_classifier_output(std::string_view raw);

/// Canonical renderer for (label, reason) pairs, the parser's inverse.
/// Reasons must be non-empty and newline-free.
std::string format_classifier_output(std::span<const std::pair<Label12, std::string>> pairs);

/// First non-empty line of a filler completion, surrounding whitespace and
/// one layer of double quotes stripped. Throws EmptyGeneration.
std::string parse_filler_output(std::string_view raw);

struct RetryPolicy {
  std::size_t max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  double backoff_multiplier = 2.0;
};

struct GatewayOptions {
  RetryPolicy retry;
  std::size_t max_response_bytes = 1 << 20;
  std::size_t in_flight_limit = 4;  // consumed by pipeline-level concurrency
};

/// Generation front door: serves from the cache when possible, otherwise
/// calls the backend with retry/backoff, enforces the response byte cap, and
/// records what happened. Thread-safe.
class Gateway {
public:
  Gateway(std::shared_ptr<Backend> backend, std::optional<std::filesystem::path> cache_dir,
          GatewayOptions options = {});

  /// Raw completion text for the request. AuthFailure and ResponseTooLong
  /// propagate immediately; BackendUnavailable is retried per policy.
  std::string generate(const GenerationRequest& request);

  std::size_t backend_calls() const { return backend_calls_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }
  std::size_t in_flight_limit() const { return options_.in_flight_limit; }
  const Backend& backend() const { return *backend_; }

private:
  std::shared_ptr<Backend> backend_;
  std::optional<ResponseCache> cache_;
  GatewayOptions options_;
  std::atomic<std::size_t> backend_calls_{0};  // one per attempted backend call
  std::atomic<std::size_t> cache_hits_{0};
};

}  // namespace polifilter
