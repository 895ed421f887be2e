// Command-line front end: ingest/split/build-entailment-set/classify/
// evaluate/baseline-random/report. Exit codes: 0 success, 2 bad input,
// 3 backend or scorer failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "polifilter/corpus.hpp"
#include "polifilter/errors.hpp"
#include "polifilter/gateway.hpp"
#include "polifilter/metrics.hpp"
#include "polifilter/opp115.hpp"
#include "polifilter/pipeline.hpp"
#include "polifilter/report.hpp"
#include "polifilter/text.hpp"
#include "polifilter/verifier.hpp"

namespace {

using namespace polifilter;

struct SplitArgs {
  std::uint64_t seed = 17;
  bool seed_given = false;
  std::size_t train_policies = 0;
  std::size_t test_policies = 0;
  std::string train_list;
  std::string test_list;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--seed", seed, "Split seed")->capture_default_str();
    cmd.add_option("--train-policies", train_policies, "Policies on the train side");
    cmd.add_option("--test-policies", test_policies, "Policies on the test side");
    cmd.add_option("--train-list", train_list, "File with one train policy id per line");
    cmd.add_option("--test-list", test_list, "File with one test policy id per line");
  }
};

std::vector<std::string> read_id_list(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open policy list " + path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    const auto trimmed = text::trim(line);
    if (!trimmed.empty()) ids.emplace_back(trimmed);
  }
  return ids;
}

struct SplitOutcome {
  Split split;
  std::optional<std::uint64_t> seed;  // set when the split was seeded
};

SplitOutcome make_split(std::span<const Paragraph> paragraphs, const SplitArgs& args) {
  const bool lists = !args.train_list.empty() || !args.test_list.empty();
  const bool counts = args.train_policies != 0 || args.test_policies != 0;
  if (lists && counts) {
    throw InputError("give either --train-list/--test-list or policy counts, not both");
  }
  if (lists) {
    if (args.train_list.empty() || args.test_list.empty()) {
      throw InputError("--train-list and --test-list must be given together");
    }
    return {split_from_lists(paragraphs, read_id_list(args.train_list),
                             read_id_list(args.test_list)),
            std::nullopt};
  }
  if (!counts) {
    throw InputError("a split needs --train-policies/--test-policies or explicit lists");
  }
  return {split_by_policy(paragraphs, args.seed, args.train_policies, args.test_policies),
          args.seed};
}

struct BackendArgs {
  std::string endpoint;
  std::string mock_script;
  std::string model = "default";
  std::string cache_dir;
  std::size_t workers = 4;
  std::size_t max_new_tokens = 512;
  double temperature = 0.0;
  std::vector<std::string> stop_sequences{"\n\n"};
  std::size_t retries = 3;

  void add_to(CLI::App& cmd) {
    auto* backend = cmd.add_option_group("backend", "Generation backend (exactly one)");
    backend->add_option("--endpoint", endpoint, "Chat-completions URL (http)");
    backend->add_option("--mock-script", mock_script, "Scripted-completions JSONL");
    backend->require_option(1);
    cmd.add_option("--model", model, "Model identifier sent to the endpoint")
        ->capture_default_str();
    cmd.add_option("--cache-dir", cache_dir, "Completion cache directory");
    cmd.add_option("--workers", workers, "Concurrent in-flight requests")
        ->capture_default_str();
    cmd.add_option("--max-new-tokens", max_new_tokens, "Generation length cap")
        ->capture_default_str();
    cmd.add_option("--temperature", temperature, "Sampling temperature")->capture_default_str();
    cmd.add_option("--stop", stop_sequences, "Stop sequences");
    cmd.add_option("--retries", retries, "Attempts per request")->capture_default_str();
  }

  Gateway make_gateway() const {
    std::shared_ptr<Backend> backend;
    if (!mock_script.empty()) {
      backend = std::make_shared<MockBackend>(MockBackend::from_script(mock_script));
    } else {
      HttpBackendConfig config;
      config.endpoint = endpoint;
      config.model = model;
      if (const char* key = std::getenv("POLIFILTER_API_KEY")) config.api_key = key;
      backend = std::make_shared<HttpBackend>(std::move(config));
    }
    GatewayOptions options;
    options.retry.max_attempts = retries;
    options.in_flight_limit = workers;
    std::optional<std::filesystem::path> cache;
    if (!cache_dir.empty()) cache = cache_dir;
    return Gateway(std::move(backend), cache, options);
  }

  PipelineConfig make_pipeline_config() const {
    PipelineConfig config;
    config.max_new_tokens = max_new_tokens;
    config.temperature = temperature;
    config.stop_sequences = stop_sequences;
    return config;
  }
};

struct VerifierArgs {
  std::string kind = "lexical";
  std::string scorer_endpoint;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--verifier", kind, "Verifier: lexical or remote")
        ->check(CLI::IsMember({"lexical", "remote"}))
        ->capture_default_str();
    cmd.add_option("--scorer-endpoint", scorer_endpoint, "Remote scorer URL (http)");
  }

  std::unique_ptr<Verifier> make_verifier() const {
    if (kind == "lexical") return std::make_unique<LexicalBaseline>();
    if (scorer_endpoint.empty()) {
      throw InputError("--verifier remote needs --scorer-endpoint");
    }
    RemoteScorerConfig config;
    config.endpoint = scorer_endpoint;
    if (const char* key = std::getenv("POLIFILTER_API_KEY")) config.api_key = key;
    return std::make_unique<RemoteScorer>(std::move(config));
  }
};

std::vector<Paragraph> side_paragraphs(const CanonicalCorpus& corpus, const std::string& side) {
  std::vector<Paragraph> out;
  for (const auto& p : corpus.paragraphs) {
    if (side == "all" || (side == "train" && corpus.split.is_train(p.policy_id)) ||
        (side == "test" && corpus.split.is_test(p.policy_id))) {
      out.push_back(p);
    }
  }
  return out;
}

// Sidecar recording how a seeded output was produced; no timestamps so
// reruns stay byte-identical.
void write_meta(const std::filesystem::path& out_path, const std::string& command,
                std::optional<std::uint64_t> seed, nlohmann::json inputs) {
  nlohmann::json meta = {{"command", command}, {"inputs", std::move(inputs)}};
  if (seed) meta["seed"] = *seed;
  const std::filesystem::path path = out_path.string() + ".meta.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path.string());
  out << meta.dump(2) << '\n';
}

int cmd_ingest(const std::string& raw_dir, const std::string& out_path,
               const std::string& mapping_path, bool skip_unmappable, bool include_unannotated,
               const SplitArgs& split_args) {
  const TierMapping mapping =
      mapping_path.empty() ? TierMapping::opp115_default() : TierMapping::load_csv(mapping_path);
  ImportOptions options;
  options.skip_unmappable = skip_unmappable;
  options.include_unannotated = include_unannotated;
  const ImportResult result = import_opp115(raw_dir, mapping, options);
  const SplitOutcome outcome = make_split(result.paragraphs, split_args);
  export_canonical(result.paragraphs, outcome.split, out_path);
  write_meta(out_path, "ingest", outcome.seed,
             {{"raw_dir", raw_dir},
              {"mapping", mapping_path.empty() ? "builtin" : mapping_path}});

  std::cout << corpus_stats(result.paragraphs, outcome.split).to_text();
  std::cout << "annotations kept: " << result.annotations_total
            << " (duplicates removed: " << result.annotations_deduplicated << ")\n";
  if (result.unmappable_rows > 0) {
    std::cout << "unmappable rows skipped: " << result.unmappable_rows << '\n';
    for (const auto& line : result.unmappable) std::cout << "  " << line << '\n';
  }
  std::cout << "wrote corpus: " << out_path << '\n';
  return 0;
}

int cmd_split(const std::string& corpus_path, const std::string& out_path,
              const SplitArgs& split_args) {
  const CanonicalCorpus corpus = read_canonical(corpus_path);
  const SplitOutcome outcome = make_split(corpus.paragraphs, split_args);
  export_canonical(corpus.paragraphs, outcome.split, out_path);
  write_meta(out_path, "split", outcome.seed, {{"corpus", corpus_path}});
  std::cout << corpus_stats(corpus.paragraphs, outcome.split).to_text();
  std::cout << "wrote corpus: " << out_path << '\n';
  return 0;
}

int cmd_build_entailment_set(const std::string& corpus_path, const std::string& out_path,
                             const BackendArgs& backend_args) {
  const CanonicalCorpus corpus = read_canonical(corpus_path);
  const std::vector<Paragraph> train = side_paragraphs(corpus, "train");
  Gateway gateway = backend_args.make_gateway();
  EntailmentBuildSummary summary;
  const auto examples =
      build_entailment_dataset(train, gateway, backend_args.make_pipeline_config(), &summary);
  write_entailment_jsonl(examples, out_path);
  std::cout << summary.to_text();
  std::cout << "wrote entailment set: " << out_path << '\n';
  return 0;
}

int cmd_classify(const std::string& corpus_path, const std::string& out_path,
                 const std::string& side, double threshold, const BackendArgs& backend_args,
                 const VerifierArgs& verifier_args) {
  const CanonicalCorpus corpus = read_canonical(corpus_path);
  const std::vector<Paragraph> paragraphs = side_paragraphs(corpus, side);
  Gateway gateway = backend_args.make_gateway();
  const auto verifier = verifier_args.make_verifier();
  const RunSummary summary = run_inference(paragraphs, gateway, *verifier, threshold,
                                           backend_args.make_pipeline_config(), out_path);
  std::cout << summary.to_text();
  std::cout << "wrote predictions: " << out_path << '\n';
  return 0;
}

int cmd_evaluate(const std::string& corpus_path, const std::string& predictions_path,
                 const std::string& out_dir, const std::string& side, bool include_rejected) {
  const CanonicalCorpus corpus = read_canonical(corpus_path);
  const auto records = read_predictions_jsonl(predictions_path);
  EvaluateOptions options;
  options.split = side;
  options.include_rejected = include_rejected;
  const EvalReport report = evaluate_predictions(corpus, records, options);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  const std::string text = render_classification_table(report) + "\n" +
                           render_overlap_table(report.bins, report.explainability_records);
  {
    std::ofstream out(dir / "report.txt", std::ios::binary);
    if (!out) throw IoFailure("cannot write " + (dir / "report.txt").string());
    out << text;
  }
  {
    std::ofstream out(dir / "report.json", std::ios::binary);
    if (!out) throw IoFailure("cannot write " + (dir / "report.json").string());
    out << report_to_json(report);
  }
  write_scatter_csv(report.records, dir / "scatter.csv");
  std::cout << text;
  std::cout << "wrote report: " << (dir / "report.json").string() << '\n';
  return 0;
}

int cmd_baseline_random(const std::string& corpus_path, const std::string& out_path,
                        const std::string& side, const std::string& ratios_side,
                        std::uint64_t seed) {
  const CanonicalCorpus corpus = read_canonical(corpus_path);
  const std::vector<Paragraph> ratio_source = side_paragraphs(corpus, ratios_side);
  const std::vector<double> ratios = annotation_length_ratios(ratio_source);
  if (ratios.empty()) {
    throw InputError("no annotations on the " + ratios_side +
                     " side to estimate length ratios from");
  }
  const auto records =
      random_baseline_predictions(corpus.paragraphs, corpus.split, side, ratios, seed);
  write_predictions_jsonl(records, out_path);
  write_meta(out_path, "baseline-random", seed,
             {{"corpus", corpus_path}, {"split", side}, {"ratios_from", ratios_side}});
  std::cout << "baseline predictions: " << records.size() << " (split: " << side << ")\n";
  std::cout << "wrote predictions: " << out_path << '\n';
  return 0;
}

int cmd_report(const std::string& report_path, const std::string& out_path) {
  std::ifstream in(report_path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + report_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const EvalReport report = report_from_json(buf.str());
  const std::string text = render_classification_table(report) + "\n" +
                           render_overlap_table(report.bins, report.explainability_records);
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoFailure("cannot write " + out_path);
    out << text;
  }
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-policy paragraph classification with verified reasons"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file (key=value; [section] per subcommand)");
  app.set_version_flag("--version", "polifilter 0.1.0");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Import a raw annotated corpus");
  std::string raw_dir;
  std::string ingest_out;
  std::string mapping_path;
  bool skip_unmappable = false;
  bool include_unannotated = false;
  SplitArgs ingest_split;
  ingest->add_option("--raw", raw_dir, "Raw corpus directory")->required();
  ingest->add_option("--out", ingest_out, "Canonical corpus JSONL to write")->required();
  ingest->add_option("--mapping", mapping_path, "Practice/attribute mapping CSV");
  ingest->add_flag("--skip-unmappable", skip_unmappable,
                   "Report unmappable practice/attribute pairs instead of aborting");
  ingest->add_flag("--include-unannotated", include_unannotated,
                   "Keep paragraphs with no mapped annotations");
  ingest_split.add_to(*ingest);

  // split
  auto* split_cmd = app.add_subcommand("split", "Re-assign the train/test split");
  std::string split_corpus;
  std::string split_out;
  SplitArgs split_args;
  split_cmd->add_option("--corpus", split_corpus, "Canonical corpus JSONL")->required();
  split_cmd->add_option("--out", split_out, "Corpus JSONL to write")->required();
  split_args.add_to(*split_cmd);

  // build-entailment-set
  auto* build = app.add_subcommand("build-entailment-set",
                                   "Run phase 2 over the training split");
  std::string build_corpus;
  std::string build_out;
  BackendArgs build_backend;
  build->add_option("--corpus", build_corpus, "Canonical corpus JSONL")->required();
  build->add_option("--out", build_out, "Entailment JSONL to write")->required();
  build_backend.add_to(*build);

  // classify
  auto* classify = app.add_subcommand("classify", "Run phase 3 over a split");
  std::string classify_corpus;
  std::string classify_out;
  std::string classify_side = "test";
  double threshold = 0.5;
  BackendArgs classify_backend;
  VerifierArgs classify_verifier;
  classify->add_option("--corpus", classify_corpus, "Canonical corpus JSONL")->required();
  classify->add_option("--out", classify_out, "Predictions JSONL to write")->required();
  classify->add_option("--split", classify_side, "Side to classify")
      ->check(CLI::IsMember({"train", "test", "all"}))
      ->capture_default_str();
  classify->add_option("--threshold", threshold, "Acceptance threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  classify_backend.add_to(*classify);
  classify_verifier.add_to(*classify);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against gold labels");
  std::string eval_corpus;
  std::string eval_predictions;
  std::string eval_out_dir;
  std::string eval_side = "test";
  bool include_rejected = false;
  evaluate->add_option("--corpus", eval_corpus, "Canonical corpus JSONL")->required();
  evaluate->add_option("--predictions", eval_predictions, "Predictions JSONL")->required();
  evaluate->add_option("--out-dir", eval_out_dir, "Directory for report files")->required();
  evaluate->add_option("--split", eval_side, "Side to score")
      ->check(CLI::IsMember({"train", "test", "all"}))
      ->capture_default_str();
  evaluate->add_flag("--include-rejected", include_rejected,
                     "Score rejected verdicts as predictions too");

  // baseline-random
  auto* baseline = app.add_subcommand("baseline-random",
                                      "Gold labels with randomly sampled reason spans");
  std::string baseline_corpus;
  std::string baseline_out;
  std::string baseline_side = "test";
  std::string ratios_side = "train";
  std::uint64_t baseline_seed = 17;
  baseline->add_option("--corpus", baseline_corpus, "Canonical corpus JSONL")->required();
  baseline->add_option("--out", baseline_out, "Predictions JSONL to write")->required();
  baseline->add_option("--split", baseline_side, "Side to generate for")
      ->check(CLI::IsMember({"train", "test", "all"}))
      ->capture_default_str();
  baseline->add_option("--ratios-from", ratios_side, "Side the length ratios come from")
      ->check(CLI::IsMember({"train", "test", "all"}))
      ->capture_default_str();
  baseline->add_option("--seed", baseline_seed, "Sampling seed")->capture_default_str();

  // report
  auto* report = app.add_subcommand("report", "Re-render a report JSON as text");
  std::string report_path;
  std::string report_out;
  report->add_option("--report", report_path, "report.json produced by evaluate")->required();
  report->add_option("--out", report_out, "Also write the text here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ingest->parsed()) {
      return cmd_ingest(raw_dir, ingest_out, mapping_path, skip_unmappable, include_unannotated,
                        ingest_split);
    }
    if (split_cmd->parsed()) return cmd_split(split_corpus, split_out, split_args);
    if (build->parsed()) return cmd_build_entailment_set(build_corpus, build_out, build_backend);
    if (classify->parsed()) {
      return cmd_classify(classify_corpus, classify_out, classify_side, threshold,
                          classify_backend, classify_verifier);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(eval_corpus, eval_predictions, eval_out_dir, eval_side,
                          include_rejected);
    }
    if (baseline->parsed()) {
      return cmd_baseline_random(baseline_corpus, baseline_out, baseline_side, ratios_side,
                                 baseline_seed);
    }
    if (report->parsed()) return cmd_report(report_path, report_out);
  } catch (const ServiceError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 3;
  } catch (const InputError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
