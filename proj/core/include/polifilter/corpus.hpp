#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polifilter/labels.hpp"

namespace polifilter {

/// One expert annotation: a label justified by a contiguous excerpt of the
/// owning paragraph. Offsets count Unicode scalar values.
struct Annotation {
  Label12 label{};
  std::size_t span_start = 0;  // inclusive
  std::size_t span_end = 0;    // exclusive
  std::string reason_text;     // equals the paragraph substring [span_start, span_end)

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct Paragraph {
  std::string policy_id;
  std::string paragraph_id;  // unique within the corpus
  std::string text;
  std::vector<Annotation> annotations;

  /// Distinct labels over all annotations, in enum order.
  std::set<Label12> gold_labels() const;

  friend bool operator==(const Paragraph&, const Paragraph&) = default;
};

/// Throws InvalidSpan unless every annotation span is inside the text and its
/// reason_text matches the spanned substring.
void validate_annotations(const Paragraph& paragraph);

struct Split {
  std::set<std::string> train_policy_ids;
  std::set<std::string> test_policy_ids;

  bool is_train(const std::string& policy_id) const { return train_policy_ids.count(policy_id) > 0; }
  bool is_test(const std::string& policy_id) const { return test_policy_ids.count(policy_id) > 0; }

  friend bool operator==(const Split&, const Split&) = default;
};

/// Seeded policy-level split: no policy ever appears on both sides, and the
/// assignment is a pure function of (policy ids, seed, counts).
Split split_by_policy(std::span<const Paragraph> paragraphs, std::uint64_t seed,
                      std::size_t train_policies, std::size_t test_policies);

/// Split from explicit policy-id lists; validates disjointness and coverage.
Split split_from_lists(std::span<const Paragraph> paragraphs,
                       const std::vector<std::string>& train_ids,
                       const std::vector<std::string>& test_ids);

struct SideStats {
  std::size_t policies = 0;
  std::size_t paragraphs = 0;
  std::size_t annotations = 0;
  std::array<std::size_t, kLabelCount> support{};  // gold annotations per class
  // Distinct-label-count histogram over paragraphs.
  std::size_t one_label = 0;
  std::size_t two_labels = 0;
  std::size_t three_plus_labels = 0;
  std::size_t unannotated = 0;

  double share_one() const;
  double share_two() const;
  double share_three_plus() const;
};

struct StatsTable {
  SideStats train;
  SideStats test;
  SideStats total;

  std::string to_text() const;
};

StatsTable corpus_stats(std::span<const Paragraph> paragraphs, const Split& split);

/// Canonical corpus JSONL, one paragraph per line, sorted by
/// (policy_id, paragraph_id). reason_text is derived on read, not stored.
void export_canonical(std::span<const Paragraph> paragraphs, const Split& split,
                      const std::filesystem::path& out_path);

struct CanonicalCorpus {
  std::vector<Paragraph> paragraphs;
  Split split;
};

CanonicalCorpus read_canonical(const std::filesystem::path& path);

/// Empirical |reason| / |paragraph| length ratios (code points), used by the
/// random-reason baseline.
std::vector<double> annotation_length_ratios(std::span<const Paragraph> paragraphs);

}  // namespace polifilter
