#include "polifilter/gateway.hpp"

#include <sstream>
#include <thread>

#include "polifilter/errors.hpp"
#include "polifilter/text.hpp"

namespace polifilter {
namespace {

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t count = 0;
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace

std::string build_classifier_prompt(const Paragraph& paragraph) {
  if (paragraph.text.empty()) throw InputError("cannot build a prompt for an empty paragraph");
  std::ostringstream out;
  out << "Task: identify every data-practice category the paragraph below talks about, and "
         "quote the exact part of the paragraph that shows it.\n\nCategories:\n";
  for (Label12 label : all_labels()) out << "- " << label_name(label) << '\n';
  out << "\nParagraph:\n" << paragraph.text << "\n\n";
  out << "Respond with one line per applicable category and nothing else, each line formatted "
         "exactly as:\n";
  out << "Label: <category> | Reason: \"<excerpt copied from the paragraph>\"\n";
  out << "Copy the excerpt exactly as it appears in the paragraph, keeping any quotation marks "
         "inside it; the surrounding quotes above are the only delimiters.\n";
  return out.str();
}

std::string build_filler_prompt(std::string_view masked_text, Label12 label) {
  const std::size_t masks = count_occurrences(masked_text, kMaskToken);
  if (masks == 0) {
    throw NoMaskToken("masked text contains no " + std::string(kMaskToken) + " token");
  }
  if (masks > 1) {
    throw MultipleMaskTokens("masked text contains " + std::to_string(masks) + " " +
                             std::string(kMaskToken) + " tokens, expected exactly one");
  }
  std::ostringstream out;
  out << "A paragraph from a privacy policy has one span hidden behind the token " << kMaskToken
      << ". The hidden span is the part of the paragraph that shows the category: "
      << label_name(label) << ".\n\nParagraph:\n"
      << masked_text << "\n\n";
  out << "Reply on a single line with only the text that replaces " << kMaskToken << ".\n";
  return out.str();
}

ParsedPairs parse_classifier_output(std::string_view raw) {
  ParsedPairs out;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    const std::size_t eol = raw.find('\n', pos);
    std::string_view line =
        raw.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? raw.size() + 1 : eol + 1;

    line = text::trim(line);
    if (line.empty()) continue;
    const auto reject = [&out] { ++out.dropped_lines; };

    constexpr std::string_view kLabelTag = "Label:";
    constexpr std::string_view kReasonTag = "| Reason:";
    if (line.substr(0, kLabelTag.size()) != kLabelTag) {
      reject();
      continue;
    }
    const std::string_view rest = line.substr(kLabelTag.size());
    const std::size_t sep = rest.find(kReasonTag);
    if (sep == std::string_view::npos) {
      reject();
      continue;
    }
    const auto label = parse_label_lenient(text::trim(rest.substr(0, sep)));
    const std::string_view quoted = text::trim(rest.substr(sep + kReasonTag.size()));
    if (!label || quoted.size() < 2 || quoted.front() != '"' || quoted.back() != '"') {
      reject();
      continue;
    }
    // First quote to last quote, so reasons may contain unescaped quotes.
    const std::string_view reason = quoted.substr(1, quoted.size() - 2);
    if (reason.empty()) {
      reject();
      continue;
    }
    out.pairs.emplace_back(*label, std::string(reason));
  }
  return out;
}

std::string format_classifier_output(
    std::span<const std::pair<Label12, std::string>> pairs) {
  std::string out;
  for (const auto& [label, reason] : pairs) {
    if (reason.empty()) throw InputError("cannot render an empty reason");
    if (reason.find('\n') != std::string::npos) {
      throw InputError("cannot render a reason containing a newline");
    }
    out += "Label: ";
    out += label_name(label);
    out += " | Reason: \"";
    out += reason;
    out += "\"\n";
  }
  return out;
}

std::string parse_filler_output(std::string_view raw) {
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    const std::size_t eol = raw.find('\n', pos);
    std::string_view line =
        raw.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? raw.size() + 1 : eol + 1;

    line = text::trim(line);
    if (line.size() >= 2 && line.front() == '"' && line.back() == '"') {
      line = text::trim(line.substr(1, line.size() - 2));
    }
    if (!line.empty()) return std::string(line);
  }
  throw EmptyGeneration("filler completion has no non-empty line");
}

Gateway::Gateway(std::shared_ptr<Backend> backend, std::optional<std::filesystem::path> cache_dir,
                 GatewayOptions options)
    : backend_(std::move(backend)), options_(options) {
  if (!backend_) throw InputError("gateway needs a backend");
  if (options_.retry.max_attempts == 0) throw InputError("retry.max_attempts must be >= 1");
  if (cache_dir) cache_.emplace(*cache_dir);
}

std::string Gateway::generate(const GenerationRequest& request) {
  if (request.prompt.empty()) throw InputError("generation request has an empty prompt");
  if (request.max_new_tokens == 0) throw InputError("max_new_tokens must be >= 1");

  const std::string key = cache_key(request, backend_->model_id());
  if (cache_) {
    if (auto hit = cache_->get(key)) {
      ++cache_hits_;
      return *hit;
    }
  }

  std::chrono::milliseconds backoff = options_.retry.initial_backoff;
  std::string last_error;
  for (std::size_t attempt = 1; attempt <= options_.retry.max_attempts; ++attempt) {
    try {
      ++backend_calls_;
      std::string completion = backend_->complete(request);
      if (completion.size() > options_.max_response_bytes) {
        throw ResponseTooLong("completion is " + std::to_string(completion.size()) +
                              " bytes, cap is " + std::to_string(options_.max_response_bytes));
      }
      if (cache_) cache_->put(key, request, backend_->model_id(), completion);
      return completion;
    } catch (const AuthFailure&) {
      throw;  // retrying cannot fix credentials
    } catch (const ResponseTooLong&) {
      throw;  // deterministic, retrying reproduces it
    } catch (const BackendUnavailable& ex) {
      last_error = ex.what();
      if (attempt < options_.retry.max_attempts && backoff.count() > 0) {
        std::this_thread::sleep_for(backoff);
        backoff = std::chrono::milliseconds(static_cast<long long>(
            static_cast<double>(backoff.count()) * options_.retry.backoff_multiplier));
      }
    }
  }
  throw BackendUnavailable("backend failed after " + std::to_string(options_.retry.max_attempts) +
                           " attempts: " + last_error);
}

}  // namespace polifilter
