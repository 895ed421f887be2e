#pragma once

// Shared helpers for the test binaries: fixture paths, temp directories,
// file IO, subprocess execution for CLI-level checks, and a validator for
// the JSON-schema subset used by the shipped report schema.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace testsupport {

inline std::filesystem::path fixtures_dir() { return POLIFILTER_FIXTURES_DIR; }
inline std::filesystem::path data_dir() { return POLIFILTER_DATA_DIR; }
inline std::filesystem::path mini_dir() { return fixtures_dir() / "mini"; }
inline std::filesystem::path raw_mini_dir() { return fixtures_dir() / "raw_mini"; }

#ifdef POLIFILTER_TOOL_PATH
inline std::string tool_path() { return POLIFILTER_TOOL_PATH; }
#endif

/// Unique directory under the system temp root, removed on destruction.
class TempDir {
public:
  TempDir() {
    const auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    for (int attempt = 0; attempt < 100; ++attempt) {
      auto candidate = base / ("polifilter_test_" + std::to_string(rd()));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = std::move(candidate);
        return;
      }
    }
    throw std::runtime_error("cannot create a temp directory");
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

inline std::string shell_quote(const std::string& s) {
  std::string quoted = "'";
  for (char c : s) {
    if (c == '\'') {
      quoted += "'\\''";
    } else {
      quoted += c;
    }
  }
  quoted += "'";
  return quoted;
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs `command` (already quoted) through the shell with stdout/stderr
/// captured into files under `dir`. `env_prefix` may hold KEY=value
/// assignments to prepend.
inline RunResult run_command(const std::string& command, const std::filesystem::path& dir,
                             const std::string& env_prefix = "") {
  const auto out_path = dir / "cmd_stdout.txt";
  const auto err_path = dir / "cmd_stderr.txt";
  const std::string full = env_prefix + (env_prefix.empty() ? "" : " ") + command + " > " +
                           shell_quote(out_path.string()) + " 2> " +
                           shell_quote(err_path.string());
  const int status = std::system(full.c_str());
  RunResult result;
  if (status == -1) {
    result.exit_code = -1;
  } else if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else {
    result.exit_code = -2;
  }
  result.out = read_file(out_path);
  result.err = read_file(err_path);
  return result;
}

#ifdef POLIFILTER_TOOL_PATH
/// Runs the CLI binary with pre-quoted argument list.
inline RunResult run_cli(const std::vector<std::string>& args, const TempDir& dir,
                         const std::string& env_prefix = "") {
  std::string command = shell_quote(tool_path());
  for (const auto& arg : args) command += " " + shell_quote(arg);
  return run_command(command, dir.path(), env_prefix);
}
#endif

/// First violation of `value` against the schema subset (type, required,
/// properties, items, enum, minimum/maximum, minItems/maxItems), or "" when
/// the document conforms.
inline std::string schema_violation(const nlohmann::json& schema, const nlohmann::json& value,
                                    const std::string& where = "$") {
  if (schema.contains("type")) {
    const std::string type = schema.at("type").get<std::string>();
    const bool ok = type == "object"    ? value.is_object()
                    : type == "array"   ? value.is_array()
                    : type == "string"  ? value.is_string()
                    : type == "integer" ? value.is_number_integer() || value.is_number_unsigned()
                    : type == "number"  ? value.is_number()
                    : type == "boolean" ? value.is_boolean()
                                        : false;
    if (!ok) return where + ": expected type " + type;
  }
  if (schema.contains("enum")) {
    bool matched = false;
    for (const auto& candidate : schema.at("enum")) matched = matched || candidate == value;
    if (!matched) return where + ": value not in enum";
  }
  if (value.is_number()) {
    const double v = value.get<double>();
    if (schema.contains("minimum") && v < schema.at("minimum").get<double>()) {
      return where + ": below minimum";
    }
    if (schema.contains("maximum") && v > schema.at("maximum").get<double>()) {
      return where + ": above maximum";
    }
  }
  if (value.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema.at("required")) {
        if (!value.contains(key.get<std::string>())) {
          return where + ": missing required key " + key.get<std::string>();
        }
      }
    }
    if (schema.contains("properties")) {
      for (const auto& [key, sub] : schema.at("properties").items()) {
        if (!value.contains(key)) continue;
        const std::string violation = schema_violation(sub, value.at(key), where + "." + key);
        if (!violation.empty()) return violation;
      }
    }
  }
  if (value.is_array()) {
    if (schema.contains("minItems") && value.size() < schema.at("minItems").get<std::size_t>()) {
      return where + ": fewer than minItems";
    }
    if (schema.contains("maxItems") && value.size() > schema.at("maxItems").get<std::size_t>()) {
      return where + ": more than maxItems";
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        const std::string violation =
            schema_violation(schema.at("items"), value[i], where + "[" + std::to_string(i) + "]");
        if (!violation.empty()) return violation;
      }
    }
  }
  return "";
}

}  // namespace testsupport
