#include "polifilter/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "polifilter/errors.hpp"
#include "polifilter/rng.hpp"
#include "polifilter/text.hpp"

namespace polifilter {
namespace {

double ratio_or_zero(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double f1_of(double precision, double recall) {
  const double sum = precision + recall;
  return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

}  // namespace

ParagraphCounts match_predictions(const Paragraph& paragraph,
                                  const std::set<Label12>& predicted_labels) {
  const std::set<Label12> gold = paragraph.gold_labels();
  ParagraphCounts counts;
  for (Label12 label : all_labels()) {
    const bool g = gold.count(label) > 0;
    const bool p = predicted_labels.count(label) > 0;
    const std::size_t i = label_index(label);
    counts.tp[i] = g && p ? 1 : 0;
    counts.fp[i] = !g && p ? 1 : 0;
    counts.fn[i] = g && !p ? 1 : 0;
  }
  return counts;
}

std::pair<std::vector<ClassScore>, AverageScores> aggregate(
    std::span<const ParagraphCounts> counts) {
  std::vector<ClassScore> classes(kLabelCount);
  for (Label12 label : all_labels()) classes[label_index(label)].label = label;
  for (const auto& c : counts) {
    for (std::size_t i = 0; i < kLabelCount; ++i) {
      classes[i].tp += c.tp[i];
      classes[i].fp += c.fp[i];
      classes[i].fn += c.fn[i];
    }
  }

  std::size_t pooled_tp = 0;
  std::size_t pooled_fp = 0;
  std::size_t pooled_fn = 0;
  double support_total = 0.0;
  AverageScores averages;
  for (auto& cls : classes) {
    cls.precision = ratio_or_zero(static_cast<double>(cls.tp), static_cast<double>(cls.tp + cls.fp));
    cls.recall = ratio_or_zero(static_cast<double>(cls.tp), static_cast<double>(cls.tp + cls.fn));
    cls.f1 = f1_of(cls.precision, cls.recall);
    cls.support = cls.tp + cls.fn;
    pooled_tp += cls.tp;
    pooled_fp += cls.fp;
    pooled_fn += cls.fn;
    averages.macro.precision += cls.precision;
    averages.macro.recall += cls.recall;
    averages.macro.f1 += cls.f1;
    averages.weighted.precision += cls.precision * static_cast<double>(cls.support);
    averages.weighted.recall += cls.recall * static_cast<double>(cls.support);
    averages.weighted.f1 += cls.f1 * static_cast<double>(cls.support);
    support_total += static_cast<double>(cls.support);
  }
  averages.micro.precision =
      ratio_or_zero(static_cast<double>(pooled_tp), static_cast<double>(pooled_tp + pooled_fp));
  averages.micro.recall =
      ratio_or_zero(static_cast<double>(pooled_tp), static_cast<double>(pooled_tp + pooled_fn));
  averages.micro.f1 = f1_of(averages.micro.precision, averages.micro.recall);
  averages.macro.precision /= static_cast<double>(kLabelCount);
  averages.macro.recall /= static_cast<double>(kLabelCount);
  averages.macro.f1 /= static_cast<double>(kLabelCount);
  averages.weighted.precision = ratio_or_zero(averages.weighted.precision, support_total);
  averages.weighted.recall = ratio_or_zero(averages.weighted.recall, support_total);
  averages.weighted.f1 = ratio_or_zero(averages.weighted.f1, support_total);
  return {std::move(classes), averages};
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  const std::u32string ua = text::decode_utf8(a);
  const std::u32string ub = text::decode_utf8(b);
  if (ua.empty()) return ub.size();
  if (ub.empty()) return ua.size();

  std::vector<std::size_t> prev(ub.size() + 1);
  std::vector<std::size_t> curr(ub.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= ua.size(); ++i) {
    curr[0] = i;
    for (std::size_t j = 1; j <= ub.size(); ++j) {
      const std::size_t substitute = prev[j - 1] + (ua[i - 1] == ub[j - 1] ? 0 : 1);
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, substitute});
    }
    std::swap(prev, curr);
  }
  return prev[ub.size()];
}

double norm_levenshtein(std::string_view a, std::string_view b) {
  const std::size_t la = text::cp_length(a);
  const std::size_t lb = text::cp_length(b);
  const std::size_t longest = std::max(la, lb);
  if (longest == 0) return 0.0;
  return static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

double word_overlap(std::string_view a, std::string_view b) {
  const std::vector<std::string> wa = text::tokenize_words(a);
  const std::vector<std::string> wb = text::tokenize_words(b);
  const std::set<std::string> sa(wa.begin(), wa.end());
  const std::set<std::string> sb(wb.begin(), wb.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t intersection = 0;
  for (const auto& w : sa) intersection += sb.count(w);
  const std::size_t uni = sa.size() + sb.size() - intersection;
  return static_cast<double>(intersection) / static_cast<double>(uni);
}

OverlapBins overlap_bins(std::span<const ExplainabilityRecord> records) {
  OverlapBins bins;
  if (records.empty()) return bins;
  std::size_t high = 0;
  std::size_t mid = 0;
  std::size_t low = 0;
  for (const auto& r : records) {
    if (r.overlap >= 0.5) {
      ++high;
    } else if (r.overlap >= 0.1) {
      ++mid;
    } else {
      ++low;
    }
  }
  const double n = static_cast<double>(records.size());
  bins.high = 100.0 * static_cast<double>(high) / n;
  bins.mid = 100.0 * static_cast<double>(mid) / n;
  bins.low = 100.0 * static_cast<double>(low) / n;
  return bins;
}

std::vector<std::pair<Annotation, std::string>> pair_reasons(
    const Paragraph& paragraph, std::span<const PredictedReason> accepted) {
  std::vector<std::pair<Annotation, std::string>> pairs;
  for (const auto& pred : accepted) {
    const Annotation* best = nullptr;
    double best_overlap = -1.0;
    for (const auto& gold : paragraph.annotations) {
      if (gold.label != pred.label) continue;
      const double o = word_overlap(pred.reason, gold.reason_text);
      if (o > best_overlap) {
        best_overlap = o;
        best = &gold;
      }
    }
    if (best) pairs.emplace_back(*best, pred.reason);
  }
  return pairs;
}

SampledSpan random_reason_baseline(const Paragraph& paragraph,
                                   std::span<const double> length_ratios, std::uint64_t seed) {
  if (length_ratios.empty()) throw InputError("empty length-ratio distribution");
  for (double r : length_ratios) {
    if (!(r > 0.0 && r <= 1.0)) {
      throw InputError("length ratio " + std::to_string(r) + " outside (0, 1]");
    }
  }
  const std::size_t len = text::cp_length(paragraph.text);
  if (len == 0) {
    throw ParagraphTooShort("paragraph " + paragraph.paragraph_id +
                            " is empty, cannot sample a reason span");
  }
  std::mt19937_64 engine(seed);
  const double ratio = length_ratios[static_cast<std::size_t>(
      rng::bounded(engine, length_ratios.size()))];
  std::size_t target = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(len)));
  target = std::clamp<std::size_t>(target, 1, len);
  const std::size_t start = static_cast<std::size_t>(rng::bounded(engine, len - target + 1));
  SampledSpan span;
  span.start = start;
  span.end = start + target;
  span.text = text::cp_substr(paragraph.text, start, target);
  return span;
}

}  // namespace polifilter
