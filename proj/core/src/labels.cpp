#include "polifilter/labels.hpp"

#include <cctype>
#include <unordered_map>

namespace polifilter {
namespace {

constexpr std::array<std::string_view, kLabelCount> kNames = {
    "First Party Collection/Use",
    "Third Party Sharing/Collection",
    "User Choice/Control",
    "User Access, Edit and Deletion",
    "Introductory/Generic",
    "Policy Change",
    "Data Security",
    "International & Specific Audience",
    "Practice Not Covered",
    "Data Retention",
    "Privacy Contact Information",
    "Do Not Track",
};

// Lowercase and collapse every non-alphanumeric run to a single space.
std::string fold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_gap = false;
  for (unsigned char c : s) {
    if (std::isalnum(c)) {
      if (pending_gap && !out.empty()) out.push_back(' ');
      pending_gap = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    } else {
      pending_gap = true;
    }
  }
  return out;
}

}  // namespace

const std::array<Label12, kLabelCount>& all_labels() {
  static const std::array<Label12, kLabelCount> labels = [] {
    std::array<Label12, kLabelCount> a{};
    for (std::size_t i = 0; i < kLabelCount; ++i) a[i] = static_cast<Label12>(i);
    return a;
  }();
  return labels;
}

std::string_view label_name(Label12 label) {
  return kNames[static_cast<std::size_t>(label)];
}

std::optional<Label12> parse_label(std::string_view name) {
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (kNames[i] == name) return static_cast<Label12>(i);
  }
  return std::nullopt;
}

std::optional<Label12> parse_label_lenient(std::string_view name) {
  static const std::unordered_map<std::string, Label12> folded = [] {
    std::unordered_map<std::string, Label12> m;
    for (std::size_t i = 0; i < kLabelCount; ++i) {
      m.emplace(fold(kNames[i]), static_cast<Label12>(i));
    }
    return m;
  }();
  auto it = folded.find(fold(name));
  if (it == folded.end()) return std::nullopt;
  return it->second;
}

}  // namespace polifilter
