#pragma once

#include <chrono>
#include <string>
#include <string_view>

#include "polifilter/labels.hpp"

namespace polifilter {

/// The triple the entailment judge sees, plus its flat encoding
/// `<label-name> [SEP] <reason> [SEP] <refill>`.
struct VerifierInput {
  Label12 label{};
  std::string reason;
  std::string refill;
  std::string encoded;
};

inline constexpr std::string_view kSepToken = " [SEP] ";

/// Builds the encoded form. Throws InputError if either text is empty after
/// trimming or contains the separator token (the encoding must keep exactly
/// two separators).
VerifierInput make_verifier_input(Label12 label, std::string_view reason,
                                  std::string_view refill);

/// Scores how well a refill supports the original classification-with-reason.
class Verifier {
public:
  virtual ~Verifier() = default;

  /// Entailment score in [0,1].
  virtual double score(const VerifierInput& input) = 0;

  virtual std::string name() const = 0;
};

/// Training-free stand-in: word-level Jaccard similarity between reason and
/// refill. Fully offline and deterministic.
class LexicalBaseline : public Verifier {
public:
  double score(const VerifierInput& input) override;
  std::string name() const override { return "lexical"; }
};

struct RemoteScorerConfig {
  std::string endpoint;  // http://host[:port]/path
  std::string api_key;   // bearer token when non-empty
  std::chrono::seconds connect_timeout{10};
  std::chrono::seconds read_timeout{60};
};

/// Calls a scoring service: POST {"text": encoded} -> {"score": float}.
class RemoteScorer : public Verifier {
public:
  explicit RemoteScorer(RemoteScorerConfig config);

  /// Throws BackendUnavailable on transport failure, non-200 status, or a
  /// malformed/out-of-range score.
  double score(const VerifierInput& input) override;
  std::string name() const override { return "remote"; }

private:
  RemoteScorerConfig config_;
  std::string base_url_;
  std::string path_;
};

}  // namespace polifilter
