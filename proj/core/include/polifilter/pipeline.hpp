#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polifilter/corpus.hpp"
#include "polifilter/gateway.hpp"
#include "polifilter/labels.hpp"
#include "polifilter/verifier.hpp"

namespace polifilter {

/// A classifier pair that survived the substring check. The reason is the
/// recovered paragraph substring (canonical casing/spacing), so substituting
/// it back into [span_start, span_end) reproduces the paragraph exactly.
struct FilteredPair {
  Label12 label{};
  std::string reason;
  std::size_t span_start = 0;  // code points, inclusive
  std::size_t span_end = 0;    // exclusive
};

struct FilterResult {
  std::vector<FilteredPair> kept;                          // completion order
  std::vector<std::pair<Label12, std::string>> dropped;    // hallucinated reasons
};

/// Keeps a pair iff its reason, normalized (lowercased, whitespace collapsed),
/// occurs contiguously in the normalized paragraph text. First occurrence
/// decides the recovered span.
FilterResult hallucination_filter(const Paragraph& paragraph,
                                  std::span<const std::pair<Label12, std::string>> pairs);

/// Replaces the code-point range [start, end) with the mask token.
/// Throws InvalidSpan.
std::string mask_reason(std::string_view paragraph_text,
                        std::pair<std::size_t, std::size_t> reason_span);

/// One row of the verifier training set.
struct EntailmentExample {
  std::string paragraph_id;
  Label12 label{};
  std::string reason;
  std::string refill;
  std::string encoded;
  int entailment = 0;  // 1 iff the predicted label is among the gold labels
  double gold_reason_overlap = 0.0;  // best word overlap against any gold reason
};

/// Decoding and orchestration knobs shared by phase 2 and phase 3.
struct PipelineConfig {
  std::size_t max_new_tokens = 512;
  double temperature = 0.0;
  std::vector<std::string> stop_sequences{"\n\n"};  // stop on blank line
  std::size_t workers = 0;  // 0 = gateway's in-flight limit
};

struct EntailmentBuildSummary {
  std::size_t paragraphs = 0;
  std::size_t parsed_pairs = 0;
  std::size_t dropped_lines = 0;  // malformed or unknown-class completion lines
  std::size_t hallucinated = 0;   // pairs dropped by the substring check
  std::size_t examples = 0;
  std::size_t positives = 0;
  std::array<std::size_t, kLabelCount> per_class_examples{};
  std::array<std::size_t, kLabelCount> per_class_positives{};
  std::size_t backend_calls = 0;  // during this build
  std::size_t cache_hits = 0;

  std::string to_text() const;
};

/// Phase 2: classify each training paragraph, filter hallucinations, mask and
/// refill every kept reason, and label each triple by whether the predicted
/// label is among the paragraph's gold labels. Output order follows the input
/// paragraph order, pairs in completion order.
std::vector<EntailmentExample> build_entailment_dataset(
    std::span<const Paragraph> train_paragraphs, Gateway& gateway, const PipelineConfig& config,
    EntailmentBuildSummary* summary = nullptr);

void write_entailment_jsonl(std::span<const EntailmentExample> examples,
                            const std::filesystem::path& out_path);
std::vector<EntailmentExample> read_entailment_jsonl(const std::filesystem::path& path);

/// Forwards to the verifier; kept as the single seam between pipeline and
/// scorer implementations.
double verify(const VerifierInput& input, Verifier& verifier);

/// Full record of one classification decision.
struct Verdict {
  ReasonedPrediction prediction;
  std::pair<std::size_t, std::size_t> reason_span{0, 0};
  Refill refill;
  double score = 0.0;
  bool accepted = false;  // score >= threshold at decision time
};

/// Runs all three stages for one paragraph. Zero kept pairs is a valid empty
/// result, not an error.
std::vector<Verdict> classify_paragraph(const Paragraph& paragraph, Gateway& gateway,
                                        Verifier& verifier, double threshold,
                                        const PipelineConfig& config = {});

/// Distinct labels over accepted verdicts.
std::set<Label12> accepted_labels(std::span<const Verdict> verdicts);

/// One serialized verdict of the predictions file.
struct PredictionRecord {
  std::string paragraph_id;
  Label12 label{};
  std::string reason;
  std::array<std::size_t, 2> reason_span{0, 0};
  std::string refill;
  double score = 0.0;
  bool accepted = false;
};

void write_predictions_jsonl(std::span<const PredictionRecord> records,
                             const std::filesystem::path& out_path);
std::vector<PredictionRecord> read_predictions_jsonl(const std::filesystem::path& path);

struct RunSummary {
  std::size_t paragraphs = 0;
  std::size_t parsed_pairs = 0;
  std::size_t dropped_lines = 0;
  std::size_t hallucinated = 0;
  std::size_t verdicts = 0;
  std::size_t accepted = 0;
  double threshold = 0.0;
  std::size_t backend_calls = 0;  // during this run
  std::size_t cache_hits = 0;

  std::string to_text() const;
};

/// Phase 3: classify every paragraph, write the predictions file sorted by
/// paragraph_id (verdict order preserved within a paragraph), return counts.
RunSummary run_inference(std::span<const Paragraph> test_paragraphs, Gateway& gateway,
                         Verifier& verifier, double threshold, const PipelineConfig& config,
                         const std::filesystem::path& out_path);

}  // namespace polifilter
