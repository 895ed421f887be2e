// Regenerates the committed goldens under tests/fixtures/mini from the raw
// synthetic corpus in tests/fixtures/raw_mini. Build target: make_fixtures.
//
//   make_fixtures <raw_mini_dir> <mini_dir>
//
// The mock script it writes exercises every completion-handling path: correct
// lines, a hallucinated reason, wrong-label reasons, an unknown class name,
// and free-text lines that do not parse. Goldens are produced through the
// library so they stay consistent with the pipeline by construction; tests
// then compare fresh runs byte-for-byte against the committed files.

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "polifilter/backend.hpp"
#include "polifilter/corpus.hpp"
#include "polifilter/digest.hpp"
#include "polifilter/errors.hpp"
#include "polifilter/gateway.hpp"
#include "polifilter/metrics.hpp"
#include "polifilter/opp115.hpp"
#include "polifilter/pipeline.hpp"
#include "polifilter/report.hpp"
#include "polifilter/verifier.hpp"

namespace {

using namespace polifilter;

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path.string());
  out << content;
}

std::string correct_line(const Annotation& annotation) {
  return "Label: " + std::string(label_name(annotation.label)) + " | Reason: \"" +
         annotation.reason_text + "\"";
}

/// Classifier completion for one paragraph: one correct line per gold
/// annotation plus scripted imperfections on selected paragraphs.
std::string classifier_completion(const Paragraph& paragraph) {
  std::vector<std::string> lines;
  for (const auto& annotation : paragraph.annotations) lines.push_back(correct_line(annotation));
  if (paragraph.paragraph_id == "p01_alpha.com#001") {
    lines.push_back("Label: Data Security | Reason: \"we escrow your keys offsite\"");
  } else if (paragraph.paragraph_id == "p03_gamma.net#000") {
    lines.push_back("Label: Do Not Track | Reason: \"Contact privacy@gamma.net\"");
  } else if (paragraph.paragraph_id == "p05_epsilon.co#001") {
    lines.push_back("Note: backups are encrypted.");
  } else if (paragraph.paragraph_id == "p02_beta.org#000") {
    lines.push_back("Label: Policy Change | Reason: \"we use TLS d\xC3\xA9"
                    "bit\xC3\xA9 encryption\"");
    lines.push_back("This paragraph is about security.");
  } else if (paragraph.paragraph_id == "p04_delta.io#001") {
    lines.push_back("Label: Quantum Stuff | Reason: \"Children under 13\"");
  }
  std::string joined;
  for (const auto& line : lines) {
    joined += line;
    joined += '\n';
  }
  return joined;
}

/// Filler completion for one surviving pair. Correct labels echo the masked
/// reason (one of them reworded, one wrapped in quotes to exercise the
/// parser); wrong labels produce text sharing no words with the reason.
std::string filler_completion(const Paragraph& paragraph, const FilteredPair& pair) {
  const bool correct = paragraph.gold_labels().count(pair.label) > 0;
  if (!correct) return "unrelated filler tokens qq zz";
  if (paragraph.paragraph_id == "p02_beta.org#001") {
    return "opt out of all marketing emails please";
  }
  if (paragraph.paragraph_id == "p04_delta.io#000") {
    return "\"" + pair.reason + "\"";
  }
  return pair.reason;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: make_fixtures <raw_mini_dir> <mini_dir>\n";
    return 2;
  }
  const std::filesystem::path raw_dir = argv[1];
  const std::filesystem::path mini = argv[2];
  std::filesystem::create_directories(mini);

  const ImportResult imported = import_opp115(raw_dir, TierMapping::opp115_default(), {});
  const Split split = split_from_lists(imported.paragraphs,
                                       read_lines(mini / "train_policies.txt"),
                                       read_lines(mini / "test_policies.txt"));
  write_file(mini / "golden_stats.txt", corpus_stats(imported.paragraphs, split).to_text());
  export_canonical(imported.paragraphs, split, mini / "golden_corpus.jsonl");

  const CanonicalCorpus corpus = read_canonical(mini / "golden_corpus.jsonl");
  std::vector<Paragraph> train;
  std::vector<Paragraph> test;
  for (const auto& paragraph : corpus.paragraphs) {
    (corpus.split.is_train(paragraph.policy_id) ? train : test).push_back(paragraph);
  }

  // Script both roles for every paragraph, then validate the script by
  // running the full pipeline against it.
  PipelineConfig config;
  nlohmann::json script_lines = nlohmann::json::array();
  auto add_entry = [&](Role role, const std::string& prompt, const std::string& completion) {
    script_lines.push_back({{"match",
                             {{"role", std::string(role_name(role))},
                              {"prompt_sha256", sha256_hex(prompt)}}},
                            {"completion", completion}});
  };
  for (const auto& paragraph : corpus.paragraphs) {
    const std::string completion = classifier_completion(paragraph);
    add_entry(Role::ExplainedClassifier, build_classifier_prompt(paragraph), completion);
    const ParsedPairs parsed = parse_classifier_output(completion);
    const FilterResult filtered = hallucination_filter(paragraph, parsed.pairs);
    for (const auto& pair : filtered.kept) {
      const std::string masked =
          mask_reason(paragraph.text, {pair.span_start, pair.span_end});
      add_entry(Role::BlankFiller, build_filler_prompt(masked, pair.label),
                filler_completion(paragraph, pair));
    }
  }
  {
    std::string script_text;
    for (const auto& entry : script_lines) script_text += entry.dump() + "\n";
    write_file(mini / "mock_script.jsonl", script_text);
  }

  write_file(mini / "golden_classifier_prompt.txt",
             build_classifier_prompt(corpus.paragraphs.front()));

  {
    auto backend = std::make_shared<MockBackend>(MockBackend::from_script(mini / "mock_script.jsonl"));
    Gateway gateway(backend, std::nullopt);
    EntailmentBuildSummary summary;
    const auto examples = build_entailment_dataset(train, gateway, config, &summary);
    write_entailment_jsonl(examples, mini / "golden_entailment.jsonl");
    write_file(mini / "golden_entailment_summary.txt", summary.to_text());
  }
  {
    auto backend = std::make_shared<MockBackend>(MockBackend::from_script(mini / "mock_script.jsonl"));
    Gateway gateway(backend, std::nullopt);
    LexicalBaseline verifier;
    const RunSummary summary =
        run_inference(test, gateway, verifier, 0.5, config, mini / "golden_predictions.jsonl");
    write_file(mini / "golden_run_summary.txt", summary.to_text());
  }
  {
    const auto records = read_predictions_jsonl(mini / "golden_predictions.jsonl");
    const EvalReport report = evaluate_predictions(corpus, records, {});
    write_file(mini / "golden_report.json", report_to_json(report));
    write_file(mini / "golden_report.txt",
               render_classification_table(report) + "\n" +
                   render_overlap_table(report.bins, report.explainability_records));
    write_scatter_csv(report.records, mini / "golden_scatter.csv");
  }
  {
    const std::vector<double> ratios = annotation_length_ratios(train);
    const auto records =
        random_baseline_predictions(corpus.paragraphs, corpus.split, "test", ratios, 7);
    write_predictions_jsonl(records, mini / "golden_baseline.jsonl");
  }
  std::cout << "fixtures written to " << mini << "\n";
  return 0;
}
