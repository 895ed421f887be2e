#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polifilter/corpus.hpp"
#include "polifilter/labels.hpp"

namespace polifilter {

/// Maps a first-tier data practice (plus, for ambiguous practices, a
/// distinguishing attribute value) to one of the 12 classes. Rows with an
/// empty attribute are wildcards that match the practice regardless of its
/// attributes; specific rows win over wildcards.
class TierMapping {
public:
  struct Row {
    std::string data_practice;
    std::string data_attribute;  // empty = wildcard
    Label12 label{};
  };

  TierMapping() = default;
  explicit TierMapping(std::vector<Row> rows) : rows_(std::move(rows)) {}

  /// The mapping shipped with this project: the nine unambiguous practices
  /// map directly; "Other" maps through its "Other Type" attribute value.
  static TierMapping opp115_default();

  /// UTF-8 CSV `data_practice,data_attribute,label12`, empty attribute = wildcard.
  static TierMapping load_csv(const std::filesystem::path& path);

  void save_csv(const std::filesystem::path& path) const;

  std::optional<Label12> lookup(std::string_view practice,
                                std::span<const std::string> attribute_values) const;

  const std::vector<Row>& rows() const { return rows_; }

private:
  std::vector<Row> rows_;
};

struct ImportOptions {
  bool skip_unmappable = false;     // report and continue instead of aborting
  bool include_unannotated = false; // keep paragraphs with zero mapped annotations
};

struct ImportResult {
  std::vector<Paragraph> paragraphs;
  std::size_t policies = 0;
  std::size_t annotations_total = 0;
  std::size_t annotations_deduplicated = 0;
  // Distinct (practice, attribute-values) combinations with no mapping, with
  // one occurrence location each. Empty unless skip_unmappable was set.
  std::vector<std::string> unmappable;
  std::size_t unmappable_rows = 0;
};

/// Ingest a directory in the released OPP-115 layout:
///   annotations/<policy>.csv          one annotation per row
///   sanitized_policies/<policy>.html  segments separated by "|||"
/// Paragraphs come out in (policy_id, document order). Throws MalformedSource
/// on unparseable files and UnmappableLabel when a practice/attribute pair is
/// missing from the mapping (unless options.skip_unmappable).
ImportResult import_opp115(const std::filesystem::path& raw_dir, const TierMapping& mapping,
                           const ImportOptions& options = {});

}  // namespace polifilter
