#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "polifilter/corpus.hpp"
#include "polifilter/labels.hpp"

namespace polifilter {

/// Per-paragraph decision outcome for every class. Gold labels are deduped
/// per (paragraph, label), so each cell is 0 or 1.
struct ParagraphCounts {
  std::array<unsigned, kLabelCount> tp{};
  std::array<unsigned, kLabelCount> fp{};
  std::array<unsigned, kLabelCount> fn{};
};

ParagraphCounts match_predictions(const Paragraph& paragraph,
                                  const std::set<Label12>& predicted_labels);

struct ClassScore {
  Label12 label{};
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;  // tp/(tp+fp), 0/0 -> 0
  double recall = 0.0;     // tp/(tp+fn), 0/0 -> 0
  double f1 = 0.0;         // harmonic mean, 0/0 -> 0
  std::size_t support = 0;  // gold points of this class = tp + fn
};

struct Averages {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct AverageScores {
  Averages micro;     // from pooled counts
  Averages macro;     // unweighted mean over all 12 classes
  Averages weighted;  // support-weighted mean
};

/// Pools per-paragraph counts into per-class scores (all 12 classes, enum
/// order) and the three averages.
std::pair<std::vector<ClassScore>, AverageScores> aggregate(
    std::span<const ParagraphCounts> counts);

/// Unit-cost edit distance over Unicode scalar values.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// levenshtein(a,b) / max(|a|,|b|) in code points; both empty -> 0.
double norm_levenshtein(std::string_view a, std::string_view b);

/// Jaccard similarity of word sets; words are lowercased runs of
/// alphanumerics. Both sets empty -> 0.
double word_overlap(std::string_view a, std::string_view b);

struct ExplainabilityRecord {
  std::string paragraph_id;
  std::size_t gold_len = 0;    // code points of the gold reason
  std::size_t reason_len = 0;  // code points of the predicted reason
  double norm_levenshtein = 0.0;
  double overlap = 0.0;
};

/// Percentage of records per overlap band. Left-closed bins: 0.5 belongs to
/// high, 0.1 to mid.
struct OverlapBins {
  double high = 0.0;  // overlap in [0.5, 1.0]
  double mid = 0.0;   // overlap in [0.1, 0.5)
  double low = 0.0;   // overlap in [0, 0.1)
};

OverlapBins overlap_bins(std::span<const ExplainabilityRecord> records);

struct PredictedReason {
  Label12 label{};
  std::string reason;
};

/// Pairs each accepted reason with the same-label gold annotation of highest
/// word overlap (first such annotation on ties). Reasons whose label has no
/// gold annotation are excluded: they are classification false positives, not
/// explainability data points.
std::vector<std::pair<Annotation, std::string>> pair_reasons(
    const Paragraph& paragraph, std::span<const PredictedReason> accepted);

struct SampledSpan {
  std::size_t start = 0;  // code points, inclusive
  std::size_t end = 0;    // exclusive
  std::string text;
};

/// Samples a contiguous span whose length/paragraph-length ratio is drawn
/// from the empirical distribution (realized length at least one character).
/// Deterministic for a fixed seed. Throws ParagraphTooShort on empty text
/// and InputError on an empty or out-of-range distribution.
SampledSpan random_reason_baseline(const Paragraph& paragraph,
                                   std::span<const double> length_ratios, std::uint64_t seed);

}  // namespace polifilter
