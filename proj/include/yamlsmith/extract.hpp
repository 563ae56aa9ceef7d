#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace yamlsmith::extract {

enum class Origin { fenced, unfenced };

std::string_view to_string(Origin origin);

/// A candidate code region of a model response. Lines are 1-based and
/// inclusive; fenced blocks exclude the fence lines. An empty fenced block
/// has start_line == end_line == the line after the opening fence.
struct CodeBlock {
  std::string content;
  std::size_t start_line = 1;
  std::size_t end_line = 1;
  Origin origin = Origin::fenced;
  std::string language_tag;
  std::string note;  // set for an unterminated fence

  std::size_t line_count() const noexcept { return end_line - start_line + 1; }
  bool operator==(const CodeBlock&) const = default;
};

/// Blocks between ``` fence pairs. A fence line is at most four spaces of
/// indentation then exactly three backticks; the opening fence may carry a
/// language tag. Content is dedented by the opening fence's indentation.
std::vector<CodeBlock> extract_fenced(std::string_view text);

/// Runs of at least three YAML-looking lines outside fenced regions.
std::vector<CodeBlock> extract_unfenced(std::string_view text);

/// Fenced and unfenced blocks together, ordered by start line.
std::vector<CodeBlock> extract_all(std::string_view text);

/// `---`, `- key:`, `key:`, `- item`, or a `# comment` line.
bool looks_like_yaml_line(std::string_view line);

enum class Policy { first, largest, all_parseable };

std::string_view to_string(Policy policy);
std::optional<Policy> parse_policy(std::string_view name);

class NoCandidate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// first / largest (ties: earliest) / every block that parses as YAML.
/// Throws NoCandidate for first and largest over an empty list.
std::vector<CodeBlock> select_candidates(const std::vector<CodeBlock>& blocks, Policy policy);

inline constexpr double kEchoThreshold = 0.8;
inline constexpr std::size_t kEchoGram = 8;

struct PromptSnippet {
  std::string label;
  std::string code;
};

struct EchoMatch {
  std::size_t block_index = 0;
  std::string snippet_label;
  double ratio = 0.0;

  bool operator==(const EchoMatch&) const = default;
};

struct EchoReport {
  std::vector<EchoMatch> echoed_blocks;
  bool any_echo = false;
};

/// Fenced examples embedded in a prompt, labelled by the nearest non-blank
/// line above the opening fence.
std::vector<PromptSnippet> prompt_snippets(std::string_view prompt);

/// Collapses whitespace runs to one space and trims the ends.
std::string normalize_whitespace(std::string_view text);

/// Distinct character 8-grams of the normalized snippet that also occur in
/// the normalized block, over distinct 8-grams of the snippet. Snippets
/// shorter than one gram compare by equality.
double overlap_ratio(std::string_view snippet, std::string_view block);

/// Each block is reported once, against its best-matching snippet, when that
/// ratio reaches `threshold`.
EchoReport detect_echo(std::string_view prompt, const std::vector<CodeBlock>& blocks,
                       double threshold = kEchoThreshold);

}  // namespace yamlsmith::extract
