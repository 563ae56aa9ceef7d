#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace yamlsmith::prompt {

/// Layout family used to wrap a request before it is sent to a model.
enum class TemplateKind { alpaca, llama2_chat, raw };

std::string_view to_string(TemplateKind kind);

/// Throws std::invalid_argument for unknown names.
TemplateKind parse_template_kind(std::string_view name);

struct ExampleSnippet {
  std::string label;  // line introducing the example, may be empty
  std::string code;   // YAML body, rendered inside a ```yaml fence

  bool operator==(const ExampleSnippet&) const = default;
};

/// Structured prompt request.
///
/// `response_header` is the closing line that hands the turn to the model
/// (e.g. "Then write this Yaml file."). It is rendered after the examples,
/// at the end of the last section before the model's turn.
struct PromptSpec {
  std::string system_text;
  std::string instruction;
  std::string input_context;
  std::vector<ExampleSnippet> example_snippets;
  std::string response_header;

  bool operator==(const PromptSpec&) const = default;
};

struct ModelProfile {
  std::string name;
  TemplateKind template_kind = TemplateKind::raw;
  std::size_t context_window = 0;
  std::size_t default_reserve_output = 0;
  std::vector<std::string> stop_markers;
};

class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidProfile : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Opening line of an Alpaca prompt that carries an input section.
inline constexpr std::string_view kAlpacaPreamble =
    "Below is an instruction that describes a task, paired with an input that provides "
    "further context. Write a response that appropriately completes the request.";

/// Opening line of an Alpaca prompt without an input section.
inline constexpr std::string_view kAlpacaPreambleNoInput =
    "Below is an instruction that describes a task. Write a response that appropriately "
    "completes the request.";

void validate_spec(const PromptSpec& spec);
void validate_profile(const ModelProfile& profile);

/// alpaca (2048 tokens), llama2_chat (4096 tokens) and raw (2048 tokens).
const std::vector<ModelProfile>& builtin_profiles();
std::optional<ModelProfile> find_builtin_profile(std::string_view name);

/// Deterministic rendering; throws InvalidSpec when the instruction is empty.
std::string render_prompt(const PromptSpec& spec, TemplateKind kind);
std::string render_prompt(const PromptSpec& spec, const ModelProfile& profile);

/// Recovers a PromptSpec from text laid out by `kind`. Returns nullopt when
/// the text does not follow that layout. raw text always parses as a bare
/// instruction.
std::optional<PromptSpec> parse_prompt(std::string_view text, TemplateKind kind);

/// Heuristic token count: ceil(bytes / 4) plus one per "```" fence marker.
/// Roughly matches common BPE densities on English and YAML; it is not a
/// tokenizer and only serves budgeting.
std::size_t estimate_tokens(std::string_view text);

/// Number of "```" markers in `text` (left-to-right, non-overlapping).
std::size_t count_fence_markers(std::string_view text);

struct BudgetReport {
  std::size_t prompt_tokens = 0;
  std::size_t window = 0;
  std::size_t reserve = 0;
  bool fits = true;
  std::size_t overflow = 0;

  bool operator==(const BudgetReport&) const = default;
};

BudgetReport budget_for(std::size_t prompt_tokens, std::size_t window, std::size_t reserve);
BudgetReport check_budget(std::string_view text, const ModelProfile& profile, std::size_t reserve);

}  // namespace yamlsmith::prompt
