#include "polifilter/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "polifilter/errors.hpp"
#include "polifilter/metrics.hpp"
#include "polifilter/text.hpp"

namespace polifilter {
namespace {

using nlohmann::json;

/// Index-parallel map with fail-fast: the first exception stops the pool and
/// is rethrown on the caller's thread.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  if (n == 0) return;
  workers = std::min(workers == 0 ? std::size_t{1} : workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  const auto work = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct Stage1Result {
  std::string raw;
  ParsedPairs parsed;
  FilterResult filtered;
};

GenerationRequest make_request(Role role, std::string prompt, const PipelineConfig& config) {
  GenerationRequest request;
  request.role = role;
  request.prompt = std::move(prompt);
  request.max_new_tokens = config.max_new_tokens;
  request.temperature = config.temperature;
  request.stop_sequences = config.stop_sequences;
  return request;
}

Stage1Result run_stage1(const Paragraph& paragraph, Gateway& gateway,
                        const PipelineConfig& config) {
  Stage1Result result;
  result.raw = gateway.generate(
      make_request(Role::ExplainedClassifier, build_classifier_prompt(paragraph), config));
  result.parsed = parse_classifier_output(result.raw);
  result.filtered = hallucination_filter(paragraph, result.parsed.pairs);
  return result;
}

std::string obtain_refill(const Paragraph& paragraph, const FilteredPair& pair, Gateway& gateway,
                          const PipelineConfig& config) {
  const std::string masked = mask_reason(paragraph.text, {pair.span_start, pair.span_end});
  const std::string raw = gateway.generate(
      make_request(Role::BlankFiller, build_filler_prompt(masked, pair.label), config));
  return parse_filler_output(raw);
}

std::string count_line(const char* name, std::size_t total, const char* sub, std::size_t n) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s: %zu (%s: %zu)\n", name, total, sub, n);
  return buf;
}

}  // namespace

FilterResult hallucination_filter(const Paragraph& paragraph,
                                  std::span<const std::pair<Label12, std::string>> pairs) {
  const text::NormalizedText norm_text = text::normalize_for_match(paragraph.text);
  FilterResult result;
  for (const auto& [label, reason] : pairs) {
    const text::NormalizedText norm_reason = text::normalize_for_match(reason);
    if (norm_reason.chars.empty()) {
      result.dropped.emplace_back(label, reason);
      continue;
    }
    const std::size_t at = norm_text.chars.find(norm_reason.chars);
    if (at == std::u32string::npos) {
      result.dropped.emplace_back(label, reason);
      continue;
    }
    FilteredPair kept;
    kept.label = label;
    kept.span_start = norm_text.source_index[at];
    kept.span_end = norm_text.source_index[at + norm_reason.chars.size() - 1] + 1;
    kept.reason =
        text::cp_substr(paragraph.text, kept.span_start, kept.span_end - kept.span_start);
    result.kept.push_back(std::move(kept));
  }
  return result;
}

std::string mask_reason(std::string_view paragraph_text,
                        std::pair<std::size_t, std::size_t> reason_span) {
  const auto [start, end] = reason_span;
  const std::size_t len = text::cp_length(paragraph_text);
  if (!(start < end && end <= len)) {
    throw InvalidSpan("span [" + std::to_string(start) + ", " + std::to_string(end) +
                      ") outside text of length " + std::to_string(len));
  }
  return text::cp_replace(paragraph_text, start, end, kMaskToken);
}

std::vector<EntailmentExample> build_entailment_dataset(
    std::span<const Paragraph> train_paragraphs, Gateway& gateway, const PipelineConfig& config,
    EntailmentBuildSummary* summary) {
  struct PerParagraph {
    std::vector<EntailmentExample> examples;
    std::size_t parsed_pairs = 0;
    std::size_t dropped_lines = 0;
    std::size_t hallucinated = 0;
  };
  const std::size_t calls_before = gateway.backend_calls();
  const std::size_t hits_before = gateway.cache_hits();

  std::vector<PerParagraph> partial(train_paragraphs.size());
  const std::size_t workers = config.workers == 0 ? gateway.in_flight_limit() : config.workers;
  parallel_for(train_paragraphs.size(), workers, [&](std::size_t i) {
    const Paragraph& paragraph = train_paragraphs[i];
    const std::set<Label12> gold = paragraph.gold_labels();
    const Stage1Result stage1 = run_stage1(paragraph, gateway, config);
    PerParagraph& out = partial[i];
    out.parsed_pairs = stage1.parsed.pairs.size();
    out.dropped_lines = stage1.parsed.dropped_lines;
    out.hallucinated = stage1.filtered.dropped.size();
    for (const FilteredPair& pair : stage1.filtered.kept) {
      const std::string refill = obtain_refill(paragraph, pair, gateway, config);
      const VerifierInput input = make_verifier_input(pair.label, pair.reason, refill);
      EntailmentExample example;
      example.paragraph_id = paragraph.paragraph_id;
      example.label = pair.label;
      example.reason = input.reason;
      example.refill = input.refill;
      example.encoded = input.encoded;
      example.entailment = gold.count(pair.label) > 0 ? 1 : 0;
      double best = 0.0;
      for (const Annotation& ann : paragraph.annotations) {
        best = std::max(best, word_overlap(pair.reason, ann.reason_text));
      }
      example.gold_reason_overlap = best;
      out.examples.push_back(std::move(example));
    }
  });

  std::vector<EntailmentExample> examples;
  EntailmentBuildSummary stats;
  stats.paragraphs = train_paragraphs.size();
  for (auto& part : partial) {
    stats.parsed_pairs += part.parsed_pairs;
    stats.dropped_lines += part.dropped_lines;
    stats.hallucinated += part.hallucinated;
    for (auto& example : part.examples) {
      const std::size_t i = label_index(example.label);
      ++stats.per_class_examples[i];
      if (example.entailment == 1) {
        ++stats.per_class_positives[i];
        ++stats.positives;
      }
      examples.push_back(std::move(example));
    }
  }
  stats.examples = examples.size();
  stats.backend_calls = gateway.backend_calls() - calls_before;
  stats.cache_hits = gateway.cache_hits() - hits_before;
  if (summary) *summary = stats;
  return examples;
}

std::string EntailmentBuildSummary::to_text() const {
  std::ostringstream out;
  out << "paragraphs: " << paragraphs << '\n';
  out << count_line("parsed pairs", parsed_pairs, "dropped lines", dropped_lines);
  out << "hallucination-filtered: " << hallucinated << '\n';
  char buf[128];
  std::snprintf(buf, sizeof(buf), "examples: %zu (entailment=1: %zu, entailment=0: %zu)\n",
                examples, positives, examples - positives);
  out << buf;
  out << count_line("backend calls", backend_calls, "cache hits", cache_hits);
  out << "per-class examples (total / entailment=1):\n";
  for (Label12 label : all_labels()) {
    const std::size_t i = label_index(label);
    std::snprintf(buf, sizeof(buf), "  %-34s %5zu / %zu\n",
                  std::string(label_name(label)).c_str(), per_class_examples[i],
                  per_class_positives[i]);
    out << buf;
  }
  return out.str();
}

void write_entailment_jsonl(std::span<const EntailmentExample> examples,
                            const std::filesystem::path& out_path) {
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + out_path.string() + " for writing");
  for (const auto& e : examples) {
    const json obj = {
        {"paragraph_id", e.paragraph_id},
        {"label", std::string(label_name(e.label))},
        {"reason", e.reason},
        {"refill", e.refill},
        {"encoded", e.encoded},
        {"entailment", e.entailment},
        {"gold_reason_overlap", e.gold_reason_overlap},
    };
    out << obj.dump() << '\n';
  }
  if (!out) throw IoFailure("write to " + out_path.string() + " failed");
}

std::vector<EntailmentExample> read_entailment_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::vector<EntailmentExample> examples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string origin = path.string() + ":" + std::to_string(line_no);
    try {
      const json obj = json::parse(line);
      EntailmentExample e;
      e.paragraph_id = obj.at("paragraph_id").get<std::string>();
      const std::string name = obj.at("label").get<std::string>();
      const auto label = parse_label(name);
      if (!label) throw MalformedSource(origin + ": unknown label '" + name + "'");
      e.label = *label;
      e.reason = obj.at("reason").get<std::string>();
      e.refill = obj.at("refill").get<std::string>();
      e.encoded = obj.at("encoded").get<std::string>();
      e.entailment = obj.at("entailment").get<int>();
      if (e.entailment != 0 && e.entailment != 1) {
        throw MalformedSource(origin + ": entailment must be 0 or 1");
      }
      e.gold_reason_overlap = obj.at("gold_reason_overlap").get<double>();
      examples.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw MalformedSource(origin + ": " + ex.what());
    }
  }
  return examples;
}

double verify(const VerifierInput& input, Verifier& verifier) { return verifier.score(input); }

namespace {

std::vector<Verdict> verdicts_from_stage1(const Paragraph& paragraph, const Stage1Result& stage1,
                                          Gateway& gateway, Verifier& verifier, double threshold,
                                          const PipelineConfig& config) {
  std::vector<Verdict> verdicts;
  verdicts.reserve(stage1.filtered.kept.size());
  for (const FilteredPair& pair : stage1.filtered.kept) {
    Verdict verdict;
    verdict.prediction.paragraph_id = paragraph.paragraph_id;
    verdict.prediction.label = pair.label;
    verdict.prediction.reason = pair.reason;
    verdict.prediction.raw_generation = stage1.raw;
    verdict.reason_span = {pair.span_start, pair.span_end};
    verdict.refill.paragraph_id = paragraph.paragraph_id;
    verdict.refill.label = pair.label;
    verdict.refill.refill_text = obtain_refill(paragraph, pair, gateway, config);
    const VerifierInput input =
        make_verifier_input(pair.label, pair.reason, verdict.refill.refill_text);
    verdict.score = verify(input, verifier);
    verdict.accepted = verdict.score >= threshold;
    verdicts.push_back(std::move(verdict));
  }
  return verdicts;
}

}  // namespace

std::vector<Verdict> classify_paragraph(const Paragraph& paragraph, Gateway& gateway,
                                        Verifier& verifier, double threshold,
                                        const PipelineConfig& config) {
  const Stage1Result stage1 = run_stage1(paragraph, gateway, config);
  return verdicts_from_stage1(paragraph, stage1, gateway, verifier, threshold, config);
}

std::set<Label12> accepted_labels(std::span<const Verdict> verdicts) {
  std::set<Label12> labels;
  for (const auto& v : verdicts) {
    if (v.accepted) labels.insert(v.prediction.label);
  }
  return labels;
}

void write_predictions_jsonl(std::span<const PredictionRecord> records,
                             const std::filesystem::path& out_path) {
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + out_path.string() + " for writing");
  for (const auto& r : records) {
    const json obj = {
        {"paragraph_id", r.paragraph_id},
        {"label", std::string(label_name(r.label))},
        {"reason", r.reason},
        {"reason_span", json::array({r.reason_span[0], r.reason_span[1]})},
        {"refill", r.refill},
        {"score", r.score},
        {"accepted", r.accepted},
    };
    out << obj.dump() << '\n';
  }
  if (!out) throw IoFailure("write to " + out_path.string() + " failed");
}

std::vector<PredictionRecord> read_predictions_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::vector<PredictionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string origin = path.string() + ":" + std::to_string(line_no);
    try {
      const json obj = json::parse(line);
      PredictionRecord r;
      r.paragraph_id = obj.at("paragraph_id").get<std::string>();
      const std::string name = obj.at("label").get<std::string>();
      const auto label = parse_label(name);
      if (!label) throw MalformedSource(origin + ": unknown label '" + name + "'");
      r.label = *label;
      r.reason = obj.at("reason").get<std::string>();
      const json& span = obj.at("reason_span");
      if (!span.is_array() || span.size() != 2) {
        throw MalformedSource(origin + ": reason_span must be [start, end]");
      }
      r.reason_span = {span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()};
      r.refill = obj.at("refill").get<std::string>();
      r.score = obj.at("score").get<double>();
      r.accepted = obj.at("accepted").get<bool>();
      records.push_back(std::move(r));
    } catch (const json::exception& ex) {
      throw MalformedSource(origin + ": " + ex.what());
    }
  }
  return records;
}

std::string RunSummary::to_text() const {
  std::ostringstream out;
  out << "paragraphs: " << paragraphs << '\n';
  out << count_line("parsed pairs", parsed_pairs, "dropped lines", dropped_lines);
  out << "hallucination-filtered: " << hallucinated << '\n';
  out << count_line("verdicts", verdicts, "accepted", accepted);
  out << "acceptance threshold: " << json(threshold).dump() << '\n';
  out << count_line("backend calls", backend_calls, "cache hits", cache_hits);
  return out.str();
}

RunSummary run_inference(std::span<const Paragraph> test_paragraphs, Gateway& gateway,
                         Verifier& verifier, double threshold, const PipelineConfig& config,
                         const std::filesystem::path& out_path) {
  struct PerParagraph {
    std::vector<Verdict> verdicts;
    std::size_t parsed_pairs = 0;
    std::size_t dropped_lines = 0;
    std::size_t hallucinated = 0;
  };
  const std::size_t calls_before = gateway.backend_calls();
  const std::size_t hits_before = gateway.cache_hits();

  std::vector<PerParagraph> partial(test_paragraphs.size());
  const std::size_t workers = config.workers == 0 ? gateway.in_flight_limit() : config.workers;
  parallel_for(test_paragraphs.size(), workers, [&](std::size_t i) {
    const Stage1Result stage1 = run_stage1(test_paragraphs[i], gateway, config);
    partial[i].parsed_pairs = stage1.parsed.pairs.size();
    partial[i].dropped_lines = stage1.parsed.dropped_lines;
    partial[i].hallucinated = stage1.filtered.dropped.size();
    partial[i].verdicts =
        verdicts_from_stage1(test_paragraphs[i], stage1, gateway, verifier, threshold, config);
  });

  RunSummary summary;
  summary.paragraphs = test_paragraphs.size();
  summary.threshold = threshold;
  std::vector<PredictionRecord> records;
  for (std::size_t i = 0; i < partial.size(); ++i) {
    summary.parsed_pairs += partial[i].parsed_pairs;
    summary.dropped_lines += partial[i].dropped_lines;
    summary.hallucinated += partial[i].hallucinated;
    for (const Verdict& v : partial[i].verdicts) {
      ++summary.verdicts;
      if (v.accepted) ++summary.accepted;
      PredictionRecord r;
      r.paragraph_id = v.prediction.paragraph_id;
      r.label = v.prediction.label;
      r.reason = v.prediction.reason;
      r.reason_span = {v.reason_span.first, v.reason_span.second};
      r.refill = v.refill.refill_text;
      r.score = v.score;
      r.accepted = v.accepted;
      records.push_back(std::move(r));
    }
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const PredictionRecord& a, const PredictionRecord& b) {
                     return a.paragraph_id < b.paragraph_id;
                   });
  write_predictions_jsonl(records, out_path);
  summary.backend_calls = gateway.backend_calls() - calls_before;
  summary.cache_hits = gateway.cache_hits() - hits_before;
  return summary;
}

}  // namespace polifilter
