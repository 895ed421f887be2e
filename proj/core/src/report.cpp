#include "polifilter/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "polifilter/errors.hpp"
#include "polifilter/text.hpp"

namespace polifilter {
namespace {

using nlohmann::json;

enum class SplitFilter { Train, Test, All };

SplitFilter parse_split_filter(std::string_view name) {
  if (name == "train") return SplitFilter::Train;
  if (name == "test") return SplitFilter::Test;
  if (name == "all") return SplitFilter::All;
  throw InputError("split must be train, test, or all, got '" + std::string(name) + "'");
}

bool selected(const Split& split, const std::string& policy_id, SplitFilter filter) {
  switch (filter) {
    case SplitFilter::Train: return split.is_train(policy_id);
    case SplitFilter::Test: return split.is_test(policy_id);
    case SplitFilter::All: return true;
  }
  return false;
}

json averages_json(const Averages& a) {
  return json{{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
}

Averages averages_from(const json& obj) {
  Averages a;
  a.precision = obj.at("precision").get<double>();
  a.recall = obj.at("recall").get<double>();
  a.f1 = obj.at("f1").get<double>();
  return a;
}

}  // namespace

EvalReport evaluate_predictions(const CanonicalCorpus& corpus,
                                std::span<const PredictionRecord> records,
                                const EvaluateOptions& options) {
  const SplitFilter filter = parse_split_filter(options.split);

  std::map<std::string, const Paragraph*> by_id;
  for (const auto& p : corpus.paragraphs) by_id.emplace(p.paragraph_id, &p);

  std::map<std::string, std::set<Label12>> predicted_labels;
  std::map<std::string, std::vector<PredictedReason>> predicted_reasons;
  EvalReport report;
  report.split = options.split;
  report.records_total = records.size();
  for (const auto& r : records) {
    const auto it = by_id.find(r.paragraph_id);
    if (it == by_id.end()) {
      throw UnknownParagraph("predictions reference unknown paragraph_id '" + r.paragraph_id +
                             "'");
    }
    if (!selected(corpus.split, it->second->policy_id, filter)) {
      ++report.records_skipped;
      continue;
    }
    if (!r.accepted && !options.include_rejected) continue;
    ++report.records_scored;
    predicted_labels[r.paragraph_id].insert(r.label);
    predicted_reasons[r.paragraph_id].push_back({r.label, r.reason});
  }

  std::vector<ParagraphCounts> counts;
  for (const auto& p : corpus.paragraphs) {
    if (!selected(corpus.split, p.policy_id, filter)) continue;
    ++report.paragraphs;
    static const std::set<Label12> kNone;
    const auto labels_it = predicted_labels.find(p.paragraph_id);
    counts.push_back(
        match_predictions(p, labels_it == predicted_labels.end() ? kNone : labels_it->second));
    const auto reasons_it = predicted_reasons.find(p.paragraph_id);
    if (reasons_it == predicted_reasons.end()) continue;
    for (const auto& [gold, reason] : pair_reasons(p, reasons_it->second)) {
      ExplainabilityRecord rec;
      rec.paragraph_id = p.paragraph_id;
      rec.gold_len = text::cp_length(gold.reason_text);
      rec.reason_len = text::cp_length(reason);
      rec.norm_levenshtein = norm_levenshtein(gold.reason_text, reason);
      rec.overlap = word_overlap(gold.reason_text, reason);
      report.records.push_back(std::move(rec));
    }
  }

  auto [classes, averages] = aggregate(counts);
  report.classes = std::move(classes);
  report.averages = averages;
  report.bins = overlap_bins(report.records);
  report.explainability_records = report.records.size();
  return report;
}

std::string render_classification_table(const EvalReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-34s %6s %6s %6s %8s\n", "class", "P", "R", "F1",
                "support");
  out << line;
  std::size_t support_total = 0;
  for (const auto& cls : report.classes) {
    std::snprintf(line, sizeof(line), "%-34s %6.2f %6.2f %6.2f %8zu\n",
                  std::string(label_name(cls.label)).c_str(), cls.precision, cls.recall, cls.f1,
                  cls.support);
    out << line;
    support_total += cls.support;
  }
  const auto average_row = [&](const char* name, const Averages& a) {
    std::snprintf(line, sizeof(line), "%-34s %6.2f %6.2f %6.2f %8zu\n", name, a.precision,
                  a.recall, a.f1, support_total);
    out << line;
  };
  average_row("Micro Average", report.averages.micro);
  average_row("Macro Average", report.averages.macro);
  average_row("Weighted Average", report.averages.weighted);
  return out.str();
}

std::string render_overlap_table(const OverlapBins& bins, std::size_t n_records) {
  std::ostringstream out;
  char line[96];
  std::snprintf(line, sizeof(line), "%-20s %7s\n", "Overlap percentage", "Share");
  out << line;
  const auto row = [&](const char* name, double value) {
    std::snprintf(line, sizeof(line), "%-20s %6.1f%%\n", name, value);
    out << line;
  };
  row("50 - 100", bins.high);
  row("10 - 50", bins.mid);
  row("less than 10", bins.low);
  out << "records: " << n_records << '\n';
  return out.str();
}

std::string report_to_json(const EvalReport& report) {
  json classes = json::array();
  for (const auto& cls : report.classes) {
    classes.push_back({
        {"label", std::string(label_name(cls.label))},
        {"tp", cls.tp},
        {"fp", cls.fp},
        {"fn", cls.fn},
        {"precision", cls.precision},
        {"recall", cls.recall},
        {"f1", cls.f1},
        {"support", cls.support},
    });
  }
  const json obj = {
      {"split", report.split},
      {"counts",
       {
           {"paragraphs", report.paragraphs},
           {"records_total", report.records_total},
           {"records_scored", report.records_scored},
           {"records_skipped", report.records_skipped},
       }},
      {"classification",
       {
           {"classes", classes},
           {"averages",
            {
                {"micro", averages_json(report.averages.micro)},
                {"macro", averages_json(report.averages.macro)},
                {"weighted", averages_json(report.averages.weighted)},
            }},
       }},
      {"explainability",
       {
           {"bins",
            {
                {"overlap_50_100", report.bins.high},
                {"overlap_10_50", report.bins.mid},
                {"overlap_below_10", report.bins.low},
            }},
           {"records", report.explainability_records},
       }},
  };
  return obj.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& json_text) {
  json obj;
  try {
    obj = json::parse(json_text);
  } catch (const json::exception& ex) {
    throw MalformedSource(std::string("bad report JSON: ") + ex.what());
  }
  try {
    EvalReport report;
    report.split = obj.at("split").get<std::string>();
    const json& counts = obj.at("counts");
    report.paragraphs = counts.at("paragraphs").get<std::size_t>();
    report.records_total = counts.at("records_total").get<std::size_t>();
    report.records_scored = counts.at("records_scored").get<std::size_t>();
    report.records_skipped = counts.at("records_skipped").get<std::size_t>();
    const json& classification = obj.at("classification");
    for (const json& c : classification.at("classes")) {
      ClassScore cls;
      const std::string name = c.at("label").get<std::string>();
      const auto label = parse_label(name);
      if (!label) throw MalformedSource("bad report JSON: unknown label '" + name + "'");
      cls.label = *label;
      cls.tp = c.at("tp").get<std::size_t>();
      cls.fp = c.at("fp").get<std::size_t>();
      cls.fn = c.at("fn").get<std::size_t>();
      cls.precision = c.at("precision").get<double>();
      cls.recall = c.at("recall").get<double>();
      cls.f1 = c.at("f1").get<double>();
      cls.support = c.at("support").get<std::size_t>();
      report.classes.push_back(cls);
    }
    const json& averages = classification.at("averages");
    report.averages.micro = averages_from(averages.at("micro"));
    report.averages.macro = averages_from(averages.at("macro"));
    report.averages.weighted = averages_from(averages.at("weighted"));
    const json& explainability = obj.at("explainability");
    const json& bins = explainability.at("bins");
    report.bins.high = bins.at("overlap_50_100").get<double>();
    report.bins.mid = bins.at("overlap_10_50").get<double>();
    report.bins.low = bins.at("overlap_below_10").get<double>();
    report.explainability_records = explainability.at("records").get<std::size_t>();
    return report;
  } catch (const json::exception& ex) {
    throw MalformedSource(std::string("bad report JSON: ") + ex.what());
  }
}

void write_scatter_csv(std::span<const ExplainabilityRecord> records,
                       const std::filesystem::path& out_path) {
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + out_path.string() + " for writing");
  out << "paragraph_id,gold_len,reason_len,norm_levenshtein,overlap\n";
  char buf[64];
  for (const auto& r : records) {
    out << r.paragraph_id << ',' << r.gold_len << ',' << r.reason_len << ',';
    std::snprintf(buf, sizeof(buf), "%.6g,%.6g\n", r.norm_levenshtein, r.overlap);
    out << buf;
  }
  if (!out) throw IoFailure("write to " + out_path.string() + " failed");
}

std::vector<PredictionRecord> random_baseline_predictions(std::span<const Paragraph> paragraphs,
                                                          const Split& split,
                                                          std::string_view split_filter,
                                                          std::span<const double> length_ratios,
                                                          std::uint64_t seed) {
  const SplitFilter filter = parse_split_filter(split_filter);
  std::vector<PredictionRecord> records;
  std::uint64_t k = 0;
  for (const auto& p : paragraphs) {
    if (!selected(split, p.policy_id, filter)) continue;
    for (const auto& ann : p.annotations) {
      // Distinct sub-seed per annotation keeps samples independent while the
      // whole file stays a pure function of (corpus, seed).
      const std::uint64_t sub_seed = seed + 0x9E3779B97F4A7C15ULL * ++k;
      const SampledSpan span = random_reason_baseline(p, length_ratios, sub_seed);
      PredictionRecord r;
      r.paragraph_id = p.paragraph_id;
      r.label = ann.label;
      r.reason = span.text;
      r.reason_span = {span.start, span.end};
      r.refill = span.text;
      r.score = 1.0;
      r.accepted = true;
      records.push_back(std::move(r));
    }
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const PredictionRecord& a, const PredictionRecord& b) {
                     return a.paragraph_id < b.paragraph_id;
                   });
  return records;
}

}  // namespace polifilter
