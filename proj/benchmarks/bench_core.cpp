// Microbenchmarks for the per-paragraph hot paths: edit distance, reason
// overlap, completion parsing, and the hallucination filter.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "polifilter/corpus.hpp"
#include "polifilter/digest.hpp"
#include "polifilter/gateway.hpp"
#include "polifilter/labels.hpp"
#include "polifilter/metrics.hpp"
#include "polifilter/pipeline.hpp"

namespace {

using namespace polifilter;

std::string random_words(std::mt19937& rng, std::size_t n_words) {
  static const char* kWords[] = {"collect",  "share",   "email",    "address", "policy",
                                 "retain",   "consent", "partner",  "account", "delete",
                                 "security", "cookie",  "tracking", "opt",     "period"};
  std::string out;
  for (std::size_t i = 0; i < n_words; ++i) {
    if (!out.empty()) out += ' ';
    out += kWords[rng() % (sizeof(kWords) / sizeof(kWords[0]))];
  }
  return out;
}

void bm_levenshtein(benchmark::State& state) {
  std::mt19937 rng(7u);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::string a;
  std::string b;
  for (std::size_t i = 0; i < n; ++i) {
    a += static_cast<char>('a' + rng() % 26);
    b += static_cast<char>('a' + rng() % 26);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(levenshtein(a, b));
  }
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(bm_levenshtein)->Arg(8)->Arg(64)->Arg(512)->Complexity(benchmark::oNSquared);

void bm_word_overlap(benchmark::State& state) {
  std::mt19937 rng(11u);
  const std::string gold = random_words(rng, 24);
  const std::string predicted = random_words(rng, 24);
  for (auto _ : state) {
    benchmark::DoNotOptimize(word_overlap(gold, predicted));
  }
}
BENCHMARK(bm_word_overlap);

void bm_parse_classifier_output(benchmark::State& state) {
  std::mt19937 rng(13u);
  std::string completion;
  for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
    completion += "Label: " + std::string(label_name(all_labels()[rng() % kLabelCount])) +
                  " | Reason: \"" + random_words(rng, 12) + "\"\n";
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_classifier_output(completion));
  }
}
BENCHMARK(bm_parse_classifier_output)->Arg(2)->Arg(8);

void bm_hallucination_filter(benchmark::State& state) {
  std::mt19937 rng(17u);
  Paragraph p;
  p.paragraph_id = "bench#000";
  std::vector<std::string> sentences;
  for (int i = 0; i < 12; ++i) {
    sentences.push_back(random_words(rng, 18));
    p.text += sentences.back() + ". ";
  }
  std::vector<std::pair<Label12, std::string>> pairs;
  for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
    const bool present = i % 2 == 0;
    pairs.emplace_back(all_labels()[rng() % kLabelCount],
                       present ? sentences[rng() % sentences.size()] : random_words(rng, 18));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(hallucination_filter(p, pairs));
  }
}
BENCHMARK(bm_hallucination_filter)->Arg(2)->Arg(8);

void bm_sha256_prompt(benchmark::State& state) {
  std::mt19937 rng(19u);
  const std::string prompt = random_words(rng, 160);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sha256_hex(prompt));
  }
}
BENCHMARK(bm_sha256_prompt);

}  // namespace

BENCHMARK_MAIN();
