#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "polifilter/corpus.hpp"
#include "polifilter/errors.hpp"
#include "polifilter/metrics.hpp"
#include "polifilter/text.hpp"
#include "oracles.hpp"

using namespace polifilter;

namespace {

Paragraph with_gold(std::initializer_list<Label12> labels) {
  Paragraph p;
  p.policy_id = "a";
  p.paragraph_id = "a#0";
  p.text = "x";
  for (Label12 label : labels) {
    Annotation ann;
    ann.label = label;
    ann.span_start = 0;
    ann.span_end = 1;
    ann.reason_text = "x";
    p.annotations.push_back(ann);
  }
  return p;
}

std::set<Label12> to_labels(const std::set<int>& indices) {
  std::set<Label12> labels;
  for (int i : indices) labels.insert(all_labels()[static_cast<std::size_t>(i)]);
  return labels;
}

}  // namespace

TEST_CASE("match_predictions fills one confusion cell per class") {
  const Paragraph p = with_gold({Label12::FirstPartyCollectionUse,
                                 Label12::ThirdPartySharingCollection});
  const ParagraphCounts counts = match_predictions(
      p, {Label12::FirstPartyCollectionUse, Label12::DataSecurity});
  for (Label12 label : all_labels()) {
    const std::size_t i = label_index(label);
    std::size_t expect_tp = 0;
    std::size_t expect_fp = 0;
    std::size_t expect_fn = 0;
    if (label == Label12::FirstPartyCollectionUse) expect_tp = 1;
    if (label == Label12::DataSecurity) expect_fp = 1;
    if (label == Label12::ThirdPartySharingCollection) expect_fn = 1;
    CHECK(counts.tp[i] == expect_tp);
    CHECK(counts.fp[i] == expect_fp);
    CHECK(counts.fn[i] == expect_fn);
  }
}

TEST_CASE("match_predictions handles empty sides") {
  const Paragraph gold_only = with_gold({Label12::DoNotTrack});
  const ParagraphCounts misses = match_predictions(gold_only, {});
  CHECK(misses.fn[label_index(Label12::DoNotTrack)] == 1);
  CHECK(misses.tp[label_index(Label12::DoNotTrack)] == 0);

  const Paragraph unannotated = with_gold({});
  const ParagraphCounts ghosts = match_predictions(unannotated, {Label12::PolicyChange});
  CHECK(ghosts.fp[label_index(Label12::PolicyChange)] == 1);
  std::size_t total = 0;
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    total += ghosts.tp[i] + ghosts.fn[i];
  }
  CHECK(total == 0);
}

TEST_CASE("duplicate gold annotations count once per paragraph") {
  const Paragraph p = with_gold({Label12::DataRetention, Label12::DataRetention});
  const ParagraphCounts counts = match_predictions(p, {Label12::DataRetention});
  CHECK(counts.tp[label_index(Label12::DataRetention)] == 1);
  CHECK(counts.fn[label_index(Label12::DataRetention)] == 0);
}

TEST_CASE("aggregate pools counts into per-class scores and three averages") {
  const auto a = label_index(Label12::FirstPartyCollectionUse);
  const auto b = label_index(Label12::ThirdPartySharingCollection);
  std::vector<ParagraphCounts> counts(3);
  counts[0].tp[a] = 1;
  counts[0].tp[b] = 1;
  counts[1].tp[a] = 1;
  counts[1].fn[b] = 1;
  counts[2].fp[a] = 1;

  const auto [classes, averages] = aggregate(counts);
  REQUIRE(classes.size() == kLabelCount);
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    CHECK(classes[i].label == all_labels()[i]);
  }

  CHECK(classes[a].tp == 2);
  CHECK(classes[a].fp == 1);
  CHECK(classes[a].fn == 0);
  CHECK(classes[a].precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(classes[a].recall == 1.0);
  CHECK(classes[a].f1 == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(classes[a].support == 2);

  CHECK(classes[b].tp == 1);
  CHECK(classes[b].fp == 0);
  CHECK(classes[b].fn == 1);
  CHECK(classes[b].precision == 1.0);
  CHECK(classes[b].recall == 0.5);
  CHECK(classes[b].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(classes[b].support == 2);

  const auto c = label_index(Label12::DoNotTrack);
  CHECK(classes[c].precision == 0.0);
  CHECK(classes[c].recall == 0.0);
  CHECK(classes[c].f1 == 0.0);
  CHECK(classes[c].support == 0);

  CHECK(averages.micro.precision == 0.75);
  CHECK(averages.micro.recall == 0.75);
  CHECK(averages.micro.f1 == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(averages.macro.precision == doctest::Approx((2.0 / 3.0 + 1.0) / 12.0).epsilon(1e-12));
  CHECK(averages.macro.recall == 0.125);
  CHECK(averages.macro.f1 == doctest::Approx((0.8 + 2.0 / 3.0) / 12.0).epsilon(1e-12));
  CHECK(averages.weighted.precision == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(averages.weighted.recall == 0.75);
  CHECK(averages.weighted.f1 == doctest::Approx(11.0 / 15.0).epsilon(1e-12));
}

TEST_CASE("aggregate of nothing is all zeros") {
  const auto [classes, averages] = aggregate({});
  for (const ClassScore& cls : classes) {
    CHECK(cls.tp == 0);
    CHECK(cls.precision == 0.0);
    CHECK(cls.f1 == 0.0);
    CHECK(cls.support == 0);
  }
  CHECK(averages.micro.f1 == 0.0);
  CHECK(averages.macro.f1 == 0.0);
  CHECK(averages.weighted.f1 == 0.0);
}

TEST_CASE("aggregate agrees with the plain-formula scorer on random instances") {
  std::mt19937 rng(4021u);
  for (int round = 0; round < 200; ++round) {
    const std::size_t paragraphs = 1 + rng() % 8;
    std::vector<ParagraphCounts> counts;
    std::vector<std::array<oracles::ClassTally, oracles::kClasses>> tallies;
    for (std::size_t k = 0; k < paragraphs; ++k) {
      std::set<int> gold;
      std::set<int> predicted;
      for (int c = 0; c < static_cast<int>(kLabelCount); ++c) {
        if (rng() % 4 == 0) gold.insert(c);
        if (rng() % 4 == 0) predicted.insert(c);
      }
      Paragraph p;
      p.paragraph_id = "r#" + std::to_string(k);
      p.text = "x";
      for (int c : gold) {
        Annotation ann;
        ann.label = all_labels()[static_cast<std::size_t>(c)];
        ann.span_end = 1;
        ann.reason_text = "x";
        p.annotations.push_back(ann);
      }
      counts.push_back(match_predictions(p, to_labels(predicted)));
      tallies.push_back(oracles::tally_paragraph(gold, predicted));
    }

    const auto [classes, averages] = aggregate(counts);
    const oracles::ScoreResult expected = oracles::score_plain(tallies);
    for (std::size_t c = 0; c < kLabelCount; ++c) {
      CHECK(classes[c].tp == expected.classes[c].tp);
      CHECK(classes[c].fp == expected.classes[c].fp);
      CHECK(classes[c].fn == expected.classes[c].fn);
      CHECK(classes[c].support == expected.classes[c].support);
      CHECK(std::abs(classes[c].precision - expected.classes[c].precision) <= 1e-12);
      CHECK(std::abs(classes[c].recall - expected.classes[c].recall) <= 1e-12);
      CHECK(std::abs(classes[c].f1 - expected.classes[c].f1) <= 1e-12);
    }
    CHECK(std::abs(averages.micro.precision - expected.averages.micro_precision) <= 1e-12);
    CHECK(std::abs(averages.micro.recall - expected.averages.micro_recall) <= 1e-12);
    CHECK(std::abs(averages.micro.f1 - expected.averages.micro_f1) <= 1e-12);
    CHECK(std::abs(averages.macro.precision - expected.averages.macro_precision) <= 1e-12);
    CHECK(std::abs(averages.macro.recall - expected.averages.macro_recall) <= 1e-12);
    CHECK(std::abs(averages.macro.f1 - expected.averages.macro_f1) <= 1e-12);
    CHECK(std::abs(averages.weighted.precision - expected.averages.weighted_precision) <= 1e-12);
    CHECK(std::abs(averages.weighted.recall - expected.averages.weighted_recall) <= 1e-12);
    CHECK(std::abs(averages.weighted.f1 - expected.averages.weighted_f1) <= 1e-12);
  }
}

TEST_CASE("levenshtein matches the classic hand values") {
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("", "") == 0);
  CHECK(levenshtein("", "abc") == 3);
  CHECK(levenshtein("abc", "") == 3);
  CHECK(levenshtein("same", "same") == 0);
  CHECK(levenshtein("flaw", "lawn") == 2);
  CHECK(levenshtein("café", "cafe") == 1);
}

TEST_CASE("levenshtein counts code points, not bytes") {
  CHECK(levenshtein("ééé", "é") == 2);
  CHECK(levenshtein("日本語", "日本") == 1);
  CHECK(levenshtein("a🙂b", "ab") == 1);
}

TEST_CASE("levenshtein agrees with the full-matrix oracle on random pairs") {
  std::mt19937 rng(977u);
  const std::u32string alphabet = U"abcé漢";
  const auto random_string = [&] {
    std::u32string s;
    const std::size_t n = rng() % 41;
    for (std::size_t i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
    return s;
  };
  for (int round = 0; round < 500; ++round) {
    const std::u32string ua = random_string();
    const std::u32string ub = random_string();
    const std::string a = text::encode_utf8(ua);
    const std::string b = text::encode_utf8(ub);
    const std::size_t expected = oracles::levenshtein_matrix(ua, ub);
    CHECK(levenshtein(a, b) == expected);
    CHECK(levenshtein(b, a) == expected);
  }
}

TEST_CASE("norm_levenshtein divides by the longer length") {
  CHECK(norm_levenshtein("kitten", "sitting") == 3.0 / 7.0);
  CHECK(norm_levenshtein("", "") == 0.0);
  CHECK(norm_levenshtein("", "xyz") == 1.0);
  CHECK(norm_levenshtein("xyz", "") == 1.0);
  CHECK(norm_levenshtein("same", "same") == 0.0);
  CHECK(norm_levenshtein("éé", "é") == 0.5);
}

TEST_CASE("word_overlap is Jaccard similarity over lowercased word sets") {
  CHECK(word_overlap("Opt out of emails", "opt OUT, of emails!") == 1.0);
  CHECK(word_overlap("collect email data", "collect phone data") == 0.5);
  CHECK(word_overlap("alpha beta", "gamma delta") == 0.0);
  CHECK(word_overlap("data data data", "data") == 1.0);
  CHECK(word_overlap("retain 30 days", "30 days retention") == 0.5);
  CHECK(word_overlap("!!!", "???") == 0.0);
  CHECK(word_overlap("", "words here") == 0.0);
}

TEST_CASE("overlap_bins uses left-closed boundaries at 0.5 and 0.1") {
  const auto record = [](double overlap) {
    ExplainabilityRecord r;
    r.overlap = overlap;
    return r;
  };
  CHECK(overlap_bins({}).high == 0.0);
  CHECK(overlap_bins({}).mid == 0.0);
  CHECK(overlap_bins({}).low == 0.0);

  const std::vector<ExplainabilityRecord> edge = {record(0.5), record(0.1), record(0.0999),
                                                  record(1.0), record(0.0)};
  const OverlapBins bins = overlap_bins(edge);
  CHECK(bins.high == 40.0);
  CHECK(bins.mid == 20.0);
  CHECK(bins.low == 40.0);

  const std::vector<ExplainabilityRecord> thirds = {record(0.6), record(0.3), record(0.05)};
  const OverlapBins even = overlap_bins(thirds);
  CHECK(even.high == doctest::Approx(100.0 / 3.0).epsilon(1e-12));
  CHECK(even.mid == doctest::Approx(100.0 / 3.0).epsilon(1e-12));
  CHECK(even.low == doctest::Approx(100.0 / 3.0).epsilon(1e-12));
  CHECK(even.high + even.mid + even.low == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("pair_reasons picks the best same-label gold annotation") {
  Paragraph p;
  p.paragraph_id = "a#0";
  p.text = "We retain logs for 30 days. We delete backups after 90 days.";
  Annotation first;
  first.label = Label12::DataRetention;
  first.span_start = 3;
  first.span_end = 26;
  first.reason_text = "retain logs for 30 days";
  Annotation second;
  second.label = Label12::DataRetention;
  second.span_start = 31;
  second.span_end = 60;
  second.reason_text = "delete backups after 90 days";
  p.annotations = {first, second};

  SUBCASE("highest overlap wins") {
    const std::vector<PredictedReason> accepted = {
        {Label12::DataRetention, "backups deleted after 90 days"}};
    const auto pairs = pair_reasons(p, accepted);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].first == second);
    CHECK(pairs[0].second == "backups deleted after 90 days");
  }
  SUBCASE("ties go to the first annotation") {
    const std::vector<PredictedReason> accepted = {
        {Label12::DataRetention, "completely unrelated words"}};
    const auto pairs = pair_reasons(p, accepted);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].first == first);
  }
  SUBCASE("labels without gold annotations are excluded") {
    const std::vector<PredictedReason> accepted = {
        {Label12::DoNotTrack, "retain logs for 30 days"},
        {Label12::DataRetention, "retain logs for 30 days"}};
    const auto pairs = pair_reasons(p, accepted);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].first == first);
  }
  SUBCASE("output follows accepted order") {
    const std::vector<PredictedReason> accepted = {
        {Label12::DataRetention, "delete backups after 90 days"},
        {Label12::DataRetention, "retain logs for 30 days"}};
    const auto pairs = pair_reasons(p, accepted);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].first == second);
    CHECK(pairs[1].first == first);
  }
}

TEST_CASE("random reason baseline samples spans from the length distribution") {
  Paragraph p;
  p.paragraph_id = "a#0";
  p.text = "abcdefghij";
  const std::vector<double> ratios = {0.3};

  const SampledSpan once = random_reason_baseline(p, ratios, 42);
  const SampledSpan again = random_reason_baseline(p, ratios, 42);
  CHECK(once.start == again.start);
  CHECK(once.end == again.end);
  CHECK(once.text == again.text);
  CHECK(once.end - once.start == 3);
  CHECK(once.text == text::cp_substr(p.text, once.start, once.end - once.start));

  bool any_differs = false;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SampledSpan span = random_reason_baseline(p, ratios, seed);
    CHECK(span.start < span.end);
    CHECK(span.end <= 10);
    CHECK(span.end - span.start == 3);
    if (span.start != once.start) any_differs = true;
  }
  CHECK(any_differs);
}

TEST_CASE("random reason baseline clamps the realized length to [1, text]") {
  Paragraph p;
  p.paragraph_id = "a#0";
  p.text = "abc";
  const SampledSpan tiny = random_reason_baseline(p, std::vector<double>{1e-9}, 3);
  CHECK(tiny.end - tiny.start == 1);
  const SampledSpan whole = random_reason_baseline(p, std::vector<double>{1.0}, 3);
  CHECK(whole.start == 0);
  CHECK(whole.end == 3);
  CHECK(whole.text == "abc");
}

TEST_CASE("random reason baseline spans count code points") {
  Paragraph p;
  p.paragraph_id = "a#0";
  p.text = "ééééé ccccc";
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SampledSpan span = random_reason_baseline(p, std::vector<double>{0.5}, seed);
    CHECK(span.end <= text::cp_length(p.text));
    CHECK(span.text == text::cp_substr(p.text, span.start, span.end - span.start));
  }
}

TEST_CASE("random reason baseline validates its inputs") {
  Paragraph p;
  p.paragraph_id = "a#0";
  p.text = "abc";
  CHECK_THROWS_AS(random_reason_baseline(p, {}, 1), InputError);
  CHECK_THROWS_AS(random_reason_baseline(p, std::vector<double>{0.0}, 1), InputError);
  CHECK_THROWS_AS(random_reason_baseline(p, std::vector<double>{1.5}, 1), InputError);
  CHECK_THROWS_AS(random_reason_baseline(p, std::vector<double>{-0.1}, 1), InputError);
  Paragraph empty;
  empty.paragraph_id = "a#1";
  CHECK_THROWS_AS(random_reason_baseline(empty, std::vector<double>{0.5}, 1), ParagraphTooShort);
}
