#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polifilter/corpus.hpp"
#include "polifilter/metrics.hpp"
#include "polifilter/pipeline.hpp"

namespace polifilter {

struct EvaluateOptions {
  std::string split = "test";     // "train", "test", or "all"
  bool include_rejected = false;  // score rejected verdicts too
};

struct EvalReport {
  std::vector<ClassScore> classes;  // all 12, enum order
  AverageScores averages;
  OverlapBins bins;
  std::vector<ExplainabilityRecord> records;  // one per paired reason
  std::size_t explainability_records = 0;     // == records.size() when built here
  std::size_t paragraphs = 0;        // paragraphs scored
  std::size_t records_total = 0;     // prediction records seen
  std::size_t records_scored = 0;    // records contributing labels
  std::size_t records_skipped = 0;   // records outside the selected split
  std::string split;
};

/// Scores predictions against every paragraph of the selected split; a
/// paragraph with no accepted predictions counts its gold labels as misses.
/// Throws UnknownParagraph when a record names a paragraph_id absent from the
/// corpus and InputError on a bad split name.
EvalReport evaluate_predictions(const CanonicalCorpus& corpus,
                                std::span<const PredictionRecord> records,
                                const EvaluateOptions& options = {});

/// Per-class precision/recall/F1 + support table with the three average rows.
std::string render_classification_table(const EvalReport& report);

/// Overlap-band table; row labels "50 - 100", "10 - 50", "less than 10",
/// shares rendered to one decimal.
std::string render_overlap_table(const OverlapBins& bins, std::size_t n_records);

/// Machine-readable report (stable field set, schema shipped in data/).
std::string report_to_json(const EvalReport& report);

/// Rebuilds the renderable part of a report from report_to_json output.
/// Individual explainability records travel in the scatter CSV, not the JSON.
EvalReport report_from_json(const std::string& json_text);

/// `paragraph_id,gold_len,reason_len,norm_levenshtein,overlap` rows.
void write_scatter_csv(std::span<const ExplainabilityRecord> records,
                       const std::filesystem::path& out_path);

/// Gold-label predictions with randomly sampled reason spans for every gold
/// annotation of the selected split: classification is perfect by
/// construction, so evaluation isolates reason quality.
std::vector<PredictionRecord> random_baseline_predictions(std::span<const Paragraph> paragraphs,
                                                          const Split& split,
                                                          std::string_view split_filter,
                                                          std::span<const double> length_ratios,
                                                          std::uint64_t seed);

}  // namespace polifilter
