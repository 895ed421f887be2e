#include "polifilter/opp115.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "polifilter/errors.hpp"
#include "polifilter/text.hpp"

namespace polifilter {
namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedSource("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string s = buf.str();
  if (s.size() >= 3 && s.compare(0, 3, "\xEF\xBB\xBF") == 0) s.erase(0, 3);
  return s;
}

struct CsvRow {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line the row starts on
};

// Quoted-field CSV: "" escapes a quote, fields split on ',', rows on LF/CRLF.
// Newlines inside quotes stay in the field and still advance the line count.
std::vector<CsvRow> parse_csv(const std::string& data, const std::string& origin) {
  std::vector<CsvRow> rows;
  CsvRow row;
  row.line = 1;
  std::string field;
  bool quoted = false;
  bool row_has_data = false;
  std::size_t line = 1;

  const auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
  };
  const auto end_row = [&] {
    if (row_has_data || !row.fields.empty()) {
      end_field();
      rows.push_back(std::move(row));
    }
    row = CsvRow{};
    row.line = line;
    row_has_data = false;
  };

  for (std::size_t i = 0; i < data.size(); ++i) {
    const char c = data[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        row_has_data = true;
        break;
      case ',':
        end_field();
        row_has_data = true;
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        end_row();
        break;
      default:
        field += c;
        row_has_data = true;
        break;
    }
  }
  if (quoted) throw MalformedSource(origin + ":" + std::to_string(row.line) + ": unterminated quote");
  end_row();
  return rows;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_segments(const std::string& policy_text) {
  std::vector<std::string> segments;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = policy_text.find("|||", pos);
    if (next == std::string::npos) {
      segments.push_back(policy_text.substr(pos));
      break;
    }
    segments.push_back(policy_text.substr(pos, next - pos));
    pos = next + 3;
  }
  return segments;
}

// Byte offset -> code-point offset within the same string.
std::size_t cp_offset(std::string_view s, std::size_t byte_pos) {
  return text::cp_length(s.substr(0, byte_pos));
}

struct RawAnnotation {
  std::string practice;
  std::vector<std::string> attribute_values;
  std::optional<std::pair<std::size_t, std::size_t>> hull;  // code points
  std::vector<std::string> selected_texts;
  std::string origin;  // file:line, for errors
};

RawAnnotation parse_annotation_row(const CsvRow& row, const std::string& origin,
                                   std::size_t segment_cp_len) {
  RawAnnotation out;
  out.practice = row.fields[5];
  out.origin = origin;
  const std::string& attrs_text = row.fields[6];
  if (text::trim(attrs_text).empty()) return out;
  json attrs;
  try {
    attrs = json::parse(attrs_text);
  } catch (const json::exception& ex) {
    throw MalformedSource(origin + ": bad attributes JSON: " + ex.what());
  }
  if (!attrs.is_object()) throw MalformedSource(origin + ": attributes JSON is not an object");
  std::optional<std::size_t> lo;
  std::optional<std::size_t> hi;
  for (const auto& [name, attr] : attrs.items()) {
    if (!attr.is_object()) continue;
    if (auto it = attr.find("value"); it != attr.end() && it->is_string()) {
      out.attribute_values.push_back(it->get<std::string>());
    }
    if (auto it = attr.find("selectedText"); it != attr.end() && it->is_string()) {
      const std::string sel = it->get<std::string>();
      if (!sel.empty() && sel != "null" && sel != "Not selected") out.selected_texts.push_back(sel);
    }
    const auto s_it = attr.find("startIndexInSegment");
    const auto e_it = attr.find("endIndexInSegment");
    if (s_it == attr.end() || e_it == attr.end()) continue;
    if (!s_it->is_number_integer() || !e_it->is_number_integer()) continue;
    const auto s = s_it->get<long long>();
    const auto e = e_it->get<long long>();
    // OPP-115 uses -1 for "no selection"; out-of-range ends show up in the
    // raw release too, so invalid spans fall back rather than abort.
    if (s < 0 || e <= s || static_cast<std::size_t>(e) > segment_cp_len) continue;
    const auto us = static_cast<std::size_t>(s);
    const auto ue = static_cast<std::size_t>(e);
    if (!lo || us < *lo) lo = us;
    if (!hi || ue > *hi) hi = ue;
  }
  if (lo && hi) out.hull = std::make_pair(*lo, *hi);
  return out;
}

std::optional<std::pair<std::size_t, std::size_t>> locate_selected_text(
    const std::string& segment, const std::vector<std::string>& selected_texts) {
  for (const auto& sel : selected_texts) {
    const std::size_t byte_pos = segment.find(sel);
    if (byte_pos == std::string::npos) continue;
    const std::size_t start = cp_offset(segment, byte_pos);
    return std::make_pair(start, start + text::cp_length(sel));
  }
  return std::nullopt;
}

}  // namespace

TierMapping TierMapping::opp115_default() {
  using L = Label12;
  return TierMapping({
      {"First Party Collection/Use", "", L::FirstPartyCollectionUse},
      {"Third Party Sharing/Collection", "", L::ThirdPartySharingCollection},
      {"User Choice/Control", "", L::UserChoiceControl},
      {"User Access, Edit and Deletion", "", L::UserAccessEditDeletion},
      {"Data Retention", "", L::DataRetention},
      {"Data Security", "", L::DataSecurity},
      {"Policy Change", "", L::PolicyChange},
      {"Do Not Track", "", L::DoNotTrack},
      {"International and Specific Audiences", "", L::InternationalSpecificAudience},
      {"Other", "Introductory/Generic", L::IntroductoryGeneric},
      {"Other", "Privacy contact information", L::PrivacyContactInformation},
      {"Other", "Practice not covered", L::PracticeNotCovered},
  });
}

TierMapping TierMapping::load_csv(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  const std::vector<CsvRow> rows = parse_csv(data, path.string());
  std::vector<Row> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const CsvRow& row = rows[i];
    const std::string origin = path.string() + ":" + std::to_string(row.line);
    if (row.fields.size() != 3) {
      throw MalformedSource(origin + ": expected 3 fields, got " +
                            std::to_string(row.fields.size()));
    }
    if (i == 0 && row.fields[0] == "data_practice" && row.fields[1] == "data_attribute" &&
        row.fields[2] == "label12") {
      continue;
    }
    const auto label = parse_label(row.fields[2]);
    if (!label) throw MalformedSource(origin + ": unknown class name '" + row.fields[2] + "'");
    if (row.fields[0].empty()) throw MalformedSource(origin + ": empty data_practice");
    out.push_back({row.fields[0], row.fields[1], *label});
  }
  return TierMapping(std::move(out));
}

void TierMapping::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  out << "data_practice,data_attribute,label12\n";
  for (const auto& row : rows_) {
    out << csv_quote(row.data_practice) << ',' << csv_quote(row.data_attribute) << ','
        << csv_quote(std::string(label_name(row.label))) << '\n';
  }
  if (!out) throw IoFailure("write to " + path.string() + " failed");
}

std::optional<Label12> TierMapping::lookup(std::string_view practice,
                                           std::span<const std::string> attribute_values) const {
  for (const auto& row : rows_) {
    if (row.data_practice != practice || row.data_attribute.empty()) continue;
    for (const auto& value : attribute_values) {
      if (value == row.data_attribute) return row.label;
    }
  }
  for (const auto& row : rows_) {
    if (row.data_practice == practice && row.data_attribute.empty()) return row.label;
  }
  return std::nullopt;
}

ImportResult import_opp115(const std::filesystem::path& raw_dir, const TierMapping& mapping,
                           const ImportOptions& options) {
  const std::filesystem::path ann_dir = raw_dir / "annotations";
  const std::filesystem::path text_dir = raw_dir / "sanitized_policies";
  if (!std::filesystem::is_directory(ann_dir)) {
    throw MalformedSource("missing annotations directory: " + ann_dir.string());
  }
  std::vector<std::filesystem::path> ann_files;
  for (const auto& entry : std::filesystem::directory_iterator(ann_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      ann_files.push_back(entry.path());
    }
  }
  if (ann_files.empty()) {
    throw MalformedSource("no annotation files under " + ann_dir.string());
  }
  std::sort(ann_files.begin(), ann_files.end());

  ImportResult result;
  // Distinct unmappable (practice, attribute values) -> first occurrence.
  std::map<std::string, std::string> unmappable;

  for (const auto& csv_path : ann_files) {
    const std::string policy_id = csv_path.stem().string();
    const std::filesystem::path text_path = text_dir / (policy_id + ".html");
    if (!std::filesystem::is_regular_file(text_path)) {
      throw MalformedSource("missing policy text for '" + policy_id + "': " + text_path.string());
    }
    const std::vector<std::string> segments = split_segments(read_file(text_path));

    std::vector<Paragraph> paragraphs(segments.size());
    std::vector<std::set<std::tuple<int, std::size_t, std::size_t>>> seen(segments.size());
    std::vector<std::size_t> segment_cp_len(segments.size());
    for (std::size_t i = 0; i < segments.size(); ++i) {
      char idx[32];
      std::snprintf(idx, sizeof(idx), "%03zu", i);
      paragraphs[i].policy_id = policy_id;
      paragraphs[i].paragraph_id = policy_id + "#" + idx;
      paragraphs[i].text = segments[i];
      segment_cp_len[i] = text::cp_length(segments[i]);
    }

    const std::vector<CsvRow> rows = parse_csv(read_file(csv_path), csv_path.string());
    for (const CsvRow& row : rows) {
      const std::string origin = csv_path.string() + ":" + std::to_string(row.line);
      if (row.fields.size() < 7) {
        throw MalformedSource(origin + ": expected at least 7 fields, got " +
                              std::to_string(row.fields.size()));
      }
      std::size_t segment_id = 0;
      try {
        segment_id = std::stoul(row.fields[4]);
      } catch (const std::exception&) {
        throw MalformedSource(origin + ": segment id '" + row.fields[4] + "' is not a number");
      }
      if (segment_id >= segments.size()) {
        throw MalformedSource(origin + ": segment id " + std::to_string(segment_id) +
                              " out of range, policy has " + std::to_string(segments.size()) +
                              " segments");
      }
      const RawAnnotation raw = parse_annotation_row(row, origin, segment_cp_len[segment_id]);
      const auto label = mapping.lookup(raw.practice, raw.attribute_values);
      if (!label) {
        std::string key = raw.practice;
        for (const auto& v : raw.attribute_values) key += " / " + v;
        unmappable.emplace(key, origin);
        ++result.unmappable_rows;
        continue;
      }

      auto span = raw.hull;
      if (!span) span = locate_selected_text(segments[segment_id], raw.selected_texts);
      if (!span) span = std::make_pair(std::size_t{0}, segment_cp_len[segment_id]);
      if (span->first >= span->second) {
        // Empty segment: nothing to anchor the annotation to.
        throw MalformedSource(origin + ": annotation on empty segment " +
                              std::to_string(segment_id));
      }

      if (!seen[segment_id].insert({static_cast<int>(*label), span->first, span->second}).second) {
        ++result.annotations_deduplicated;
        continue;
      }
      Annotation ann;
      ann.label = *label;
      ann.span_start = span->first;
      ann.span_end = span->second;
      ann.reason_text =
          text::cp_substr(segments[segment_id], span->first, span->second - span->first);
      paragraphs[segment_id].annotations.push_back(std::move(ann));
    }

    ++result.policies;
    for (auto& p : paragraphs) {
      std::sort(p.annotations.begin(), p.annotations.end(),
                [](const Annotation& a, const Annotation& b) {
                  return std::tie(a.span_start, a.span_end, a.label) <
                         std::tie(b.span_start, b.span_end, b.label);
                });
      if (p.annotations.empty() && !options.include_unannotated) continue;
      validate_annotations(p);
      result.annotations_total += p.annotations.size();
      result.paragraphs.push_back(std::move(p));
    }
  }

  for (const auto& [key, origin] : unmappable) {
    result.unmappable.push_back(key + " (first at " + origin + ")");
  }
  if (!unmappable.empty() && !options.skip_unmappable) {
    std::string msg = "unmappable practice/attribute pairs:";
    for (const auto& line : result.unmappable) msg += "\n  " + line;
    throw UnmappableLabel(msg);
  }
  return result;
}

}  // namespace polifilter
