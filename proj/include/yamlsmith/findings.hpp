#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace yamlsmith::validate {

/// Byte range [begin, end) into the candidate text, plus 1-based line and
/// column of both ends.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t end_line = 1;
  std::size_t end_column = 1;

  bool contains(const Span& other) const noexcept {
    return begin <= other.begin && other.end <= end;
  }
  bool operator==(const Span&) const = default;
};

/// Computes line/column for byte offsets of one text.
class LineIndex {
 public:
  explicit LineIndex(std::string_view text);

  Span span(std::size_t begin, std::size_t end) const;
  /// Byte offset of a 0-based line/column pair, clamped into the text.
  std::size_t offset(std::size_t line0, std::size_t column0) const;
  std::size_t line_end(std::size_t offset) const;
  std::size_t size() const noexcept { return size_; }

 private:
  std::vector<std::size_t> starts_;
  std::size_t size_;
};

enum class Severity { error, warning, info };

std::string_view to_string(Severity severity);

namespace codes {
inline constexpr std::string_view kYamlSyntax = "YAML_SYNTAX";
inline constexpr std::string_view kDuplicateKey = "DUPLICATE_KEY";
inline constexpr std::string_view kNotAPlaybook = "NOT_A_PLAYBOOK";
inline constexpr std::string_view kNotAPlay = "NOT_A_PLAY";
inline constexpr std::string_view kNotATask = "NOT_A_TASK";
inline constexpr std::string_view kMissingHosts = "MISSING_HOSTS";
inline constexpr std::string_view kEmptyTasks = "EMPTY_TASKS";
inline constexpr std::string_view kNoModule = "NO_MODULE";
inline constexpr std::string_view kMultipleModules = "MULTIPLE_MODULES";
inline constexpr std::string_view kUnknownModule = "UNKNOWN_MODULE";
inline constexpr std::string_view kMissingRequired = "MISSING_REQUIRED";
inline constexpr std::string_view kInvalidChoice = "INVALID_CHOICE";
inline constexpr std::string_view kInvalidType = "INVALID_TYPE";
inline constexpr std::string_view kUnknownParam = "UNKNOWN_PARAM";
inline constexpr std::string_view kExtraDocument = "EXTRA_DOCUMENT";
}  // namespace codes

struct Finding {
  Severity severity = Severity::error;
  std::string code;
  std::string message;
  Span span;

  bool operator==(const Finding&) const = default;
};

/// Orders by span start, then end, then code and message.
void sort_findings(std::vector<Finding>& findings);

std::size_t count_severity(const std::vector<Finding>& findings, Severity severity);

/// {"findings": [...], "catalog_version": ..., "errors": n, "warnings": n}
std::string findings_to_json(const std::vector<Finding>& findings,
                             std::string_view catalog_version, int indent = 2);

/// One line per finding: "<line>:<col>: <severity> <CODE>: <message>".
std::string findings_to_text(const std::vector<Finding>& findings);

}  // namespace yamlsmith::validate
