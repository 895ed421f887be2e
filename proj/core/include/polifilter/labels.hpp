#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace polifilter {

/// The 12 paragraph categories: the 9 unambiguous first-tier data practices
/// plus the three subcategories that replace the practice "Other".
enum class Label12 : int {
  FirstPartyCollectionUse,
  ThirdPartySharingCollection,
  UserChoiceControl,
  UserAccessEditDeletion,
  IntroductoryGeneric,
  PolicyChange,
  DataSecurity,
  InternationalSpecificAudience,
  PracticeNotCovered,
  DataRetention,
  PrivacyContactInformation,
  DoNotTrack,
};

inline constexpr std::size_t kLabelCount = 12;

const std::array<Label12, kLabelCount>& all_labels();

/// Canonical display name, e.g. "First Party Collection/Use".
std::string_view label_name(Label12 label);

/// Parse a canonical name back to its label. Exact match only.
std::optional<Label12> parse_label(std::string_view name);

/// Case- and punctuation-insensitive parse, for model output that does not
/// reproduce the canonical spelling exactly.
std::optional<Label12> parse_label_lenient(std::string_view name);

inline std::size_t label_index(Label12 label) { return static_cast<std::size_t>(label); }

}  // namespace polifilter
