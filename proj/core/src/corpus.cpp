#include "polifilter/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "polifilter/errors.hpp"
#include "polifilter/rng.hpp"
#include "polifilter/text.hpp"

namespace polifilter {
namespace {

using nlohmann::json;

std::vector<std::string> distinct_policies(std::span<const Paragraph> paragraphs) {
  std::set<std::string> ids;
  for (const auto& p : paragraphs) ids.insert(p.policy_id);
  return {ids.begin(), ids.end()};
}

void accumulate(SideStats& side, const Paragraph& p) {
  ++side.paragraphs;
  side.annotations += p.annotations.size();
  for (const auto& a : p.annotations) ++side.support[label_index(a.label)];
  switch (p.gold_labels().size()) {
    case 0: ++side.unannotated; break;
    case 1: ++side.one_label; break;
    case 2: ++side.two_labels; break;
    default: ++side.three_plus_labels; break;
  }
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", v * 100.0);
  return buf;
}

}  // namespace

std::set<Label12> Paragraph::gold_labels() const {
  std::set<Label12> labels;
  for (const auto& a : annotations) labels.insert(a.label);
  return labels;
}

void validate_annotations(const Paragraph& paragraph) {
  const std::size_t len = text::cp_length(paragraph.text);
  for (const auto& a : paragraph.annotations) {
    if (!(a.span_start < a.span_end && a.span_end <= len)) {
      throw InvalidSpan("paragraph " + paragraph.paragraph_id + ": span [" +
                        std::to_string(a.span_start) + ", " + std::to_string(a.span_end) +
                        ") outside text of length " + std::to_string(len));
    }
    const std::string spanned = text::cp_substr(paragraph.text, a.span_start, a.span_end - a.span_start);
    if (spanned != a.reason_text) {
      throw InvalidSpan("paragraph " + paragraph.paragraph_id +
                        ": reason_text does not match the spanned substring");
    }
  }
}

Split split_by_policy(std::span<const Paragraph> paragraphs, std::uint64_t seed,
                      std::size_t train_policies, std::size_t test_policies) {
  std::vector<std::string> ids = distinct_policies(paragraphs);
  if (train_policies + test_policies != ids.size()) {
    throw BadCounts("train_policies + test_policies = " +
                    std::to_string(train_policies + test_policies) + " but corpus has " +
                    std::to_string(ids.size()) + " policies");
  }
  std::mt19937_64 engine(seed);
  rng::shuffle(ids, engine);
  Split split;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i < train_policies) {
      split.train_policy_ids.insert(ids[i]);
    } else {
      split.test_policy_ids.insert(ids[i]);
    }
  }
  return split;
}

Split split_from_lists(std::span<const Paragraph> paragraphs,
                       const std::vector<std::string>& train_ids,
                       const std::vector<std::string>& test_ids) {
  Split split;
  split.train_policy_ids.insert(train_ids.begin(), train_ids.end());
  split.test_policy_ids.insert(test_ids.begin(), test_ids.end());
  for (const auto& id : split.train_policy_ids) {
    if (split.test_policy_ids.count(id)) {
      throw BadCounts("policy '" + id + "' listed on both sides of the split");
    }
  }
  const std::vector<std::string> ids = distinct_policies(paragraphs);
  for (const auto& id : ids) {
    if (!split.is_train(id) && !split.is_test(id)) {
      throw BadCounts("policy '" + id + "' missing from the split lists");
    }
  }
  if (split.train_policy_ids.size() + split.test_policy_ids.size() != ids.size()) {
    throw BadCounts("split lists name policies that are not in the corpus");
  }
  return split;
}

double SideStats::share_one() const {
  const std::size_t n = one_label + two_labels + three_plus_labels;
  return n == 0 ? 0.0 : static_cast<double>(one_label) / static_cast<double>(n);
}

double SideStats::share_two() const {
  const std::size_t n = one_label + two_labels + three_plus_labels;
  return n == 0 ? 0.0 : static_cast<double>(two_labels) / static_cast<double>(n);
}

double SideStats::share_three_plus() const {
  const std::size_t n = one_label + two_labels + three_plus_labels;
  return n == 0 ? 0.0 : static_cast<double>(three_plus_labels) / static_cast<double>(n);
}

StatsTable corpus_stats(std::span<const Paragraph> paragraphs, const Split& split) {
  StatsTable stats;
  std::set<std::string> train_seen;
  std::set<std::string> test_seen;
  for (const auto& p : paragraphs) {
    accumulate(stats.total, p);
    if (split.is_train(p.policy_id)) {
      accumulate(stats.train, p);
      train_seen.insert(p.policy_id);
    } else if (split.is_test(p.policy_id)) {
      accumulate(stats.test, p);
      test_seen.insert(p.policy_id);
    }
  }
  stats.train.policies = train_seen.size();
  stats.test.policies = test_seen.size();
  stats.total.policies = train_seen.size() + test_seen.size();
  return stats;
}

std::string StatsTable::to_text() const {
  std::ostringstream out;
  out << "policies: " << total.policies << " (train " << train.policies << " / test "
      << test.policies << ")\n";
  out << "paragraphs: " << total.paragraphs << " (train " << train.paragraphs << " / test "
      << test.paragraphs << ")\n";
  out << "annotations: " << total.annotations << " (train " << train.annotations << " / test "
      << test.annotations << ")\n";
  out << "\nlabel histogram (share of annotated paragraphs by distinct label count)\n";
  char line[160];
  std::snprintf(line, sizeof(line), "  %-6s %9s %9s %10s %12s\n", "side", "1 label", "2 labels",
                "3+ labels", "unannotated");
  out << line;
  const auto row = [&](const char* name, const SideStats& s) {
    std::snprintf(line, sizeof(line), "  %-6s %9s %9s %10s %12zu\n", name,
                  pct(s.share_one()).c_str(), pct(s.share_two()).c_str(),
                  pct(s.share_three_plus()).c_str(), s.unannotated);
    out << line;
  };
  row("train", train);
  row("test", test);
  row("total", total);
  out << "\nper-class support (gold annotations)\n";
  std::snprintf(line, sizeof(line), "  %-34s %7s %7s %7s\n", "class", "train", "test", "total");
  out << line;
  for (Label12 label : all_labels()) {
    const std::size_t i = label_index(label);
    std::snprintf(line, sizeof(line), "  %-34s %7zu %7zu %7zu\n",
                  std::string(label_name(label)).c_str(), train.support[i], test.support[i],
                  total.support[i]);
    out << line;
  }
  return out.str();
}

void export_canonical(std::span<const Paragraph> paragraphs, const Split& split,
                      const std::filesystem::path& out_path) {
  std::vector<const Paragraph*> order;
  order.reserve(paragraphs.size());
  for (const auto& p : paragraphs) order.push_back(&p);
  std::sort(order.begin(), order.end(), [](const Paragraph* a, const Paragraph* b) {
    return std::tie(a->policy_id, a->paragraph_id) < std::tie(b->policy_id, b->paragraph_id);
  });

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + out_path.string() + " for writing");
  for (const Paragraph* p : order) {
    const char* side = nullptr;
    if (split.is_train(p->policy_id)) {
      side = "train";
    } else if (split.is_test(p->policy_id)) {
      side = "test";
    } else {
      throw InputError("policy '" + p->policy_id + "' is not assigned to either split side");
    }
    json annotations = json::array();
    for (const auto& a : p->annotations) {
      annotations.push_back({{"label", std::string(label_name(a.label))},
                             {"span_start", a.span_start},
                             {"span_end", a.span_end}});
    }
    const json obj = {{"policy_id", p->policy_id},
                      {"paragraph_id", p->paragraph_id},
                      {"split", side},
                      {"text", p->text},
                      {"annotations", annotations}};
    out << obj.dump() << '\n';
  }
  if (!out) throw IoFailure("write to " + out_path.string() + " failed");
}

CanonicalCorpus read_canonical(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  CanonicalCorpus corpus;
  std::map<std::string, std::string> policy_side;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& ex) {
      throw MalformedSource(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
    try {
      Paragraph p;
      p.policy_id = obj.at("policy_id").get<std::string>();
      p.paragraph_id = obj.at("paragraph_id").get<std::string>();
      p.text = obj.at("text").get<std::string>();
      const std::string side = obj.at("split").get<std::string>();
      if (side != "train" && side != "test") {
        throw MalformedSource(path.string() + ":" + std::to_string(line_no) +
                              ": split must be \"train\" or \"test\"");
      }
      auto [it, inserted] = policy_side.emplace(p.policy_id, side);
      if (!inserted && it->second != side) {
        throw MalformedSource(path.string() + ":" + std::to_string(line_no) + ": policy '" +
                              p.policy_id + "' tagged with conflicting splits");
      }
      if (!seen_ids.insert(p.paragraph_id).second) {
        throw MalformedSource(path.string() + ":" + std::to_string(line_no) +
                              ": duplicate paragraph_id '" + p.paragraph_id + "'");
      }
      for (const auto& a : obj.at("annotations")) {
        Annotation ann;
        const std::string name = a.at("label").get<std::string>();
        const auto label = parse_label(name);
        if (!label) {
          throw MalformedSource(path.string() + ":" + std::to_string(line_no) +
                                ": unknown label '" + name + "'");
        }
        ann.label = *label;
        ann.span_start = a.at("span_start").get<std::size_t>();
        ann.span_end = a.at("span_end").get<std::size_t>();
        ann.reason_text = text::cp_substr(p.text, ann.span_start, ann.span_end - ann.span_start);
        p.annotations.push_back(std::move(ann));
      }
      validate_annotations(p);
      corpus.paragraphs.push_back(std::move(p));
    } catch (const json::exception& ex) {
      throw MalformedSource(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  for (const auto& [policy, side] : policy_side) {
    if (side == "train") {
      corpus.split.train_policy_ids.insert(policy);
    } else {
      corpus.split.test_policy_ids.insert(policy);
    }
  }
  return corpus;
}

std::vector<double> annotation_length_ratios(std::span<const Paragraph> paragraphs) {
  std::vector<double> ratios;
  for (const auto& p : paragraphs) {
    const std::size_t len = text::cp_length(p.text);
    if (len == 0) continue;
    for (const auto& a : p.annotations) {
      ratios.push_back(static_cast<double>(a.span_end - a.span_start) / static_cast<double>(len));
    }
  }
  return ratios;
}

}  // namespace polifilter
