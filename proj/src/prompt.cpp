#include "yamlsmith/prompt.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace yamlsmith::prompt {

namespace {

constexpr std::string_view kInstructionHeader = "### Instruction:\n";
constexpr std::string_view kInputHeader = "### Input:\n";
constexpr std::string_view kResponseHeader = "### Response:";
constexpr std::string_view kInstOpen = "[INST] ";
constexpr std::string_view kInstClose = " [/INST]";
constexpr std::string_view kSysOpen = "<<SYS>>\n";
constexpr std::string_view kSysClose = "\n<</SYS>>\n\n";
constexpr std::string_view kYamlFence = "```yaml";
constexpr std::string_view kFence = "```";

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::string join(const std::vector<std::string_view>& lines, std::size_t begin, std::size_t end,
                 std::string_view sep = "\n") {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i != begin) out += sep;
    out += lines[i];
  }
  return out;
}

std::string render_example(const ExampleSnippet& example) {
  std::string out;
  if (!example.label.empty()) {
    out += example.label;
    out += '\n';
  }
  out += kYamlFence;
  out += '\n';
  out += example.code;
  if (!example.code.empty() && example.code.back() != '\n') out += '\n';
  out += kFence;
  return out;
}

// A section body: leading text, then fenced examples, then the closing line.
struct Body {
  std::string main;
  std::vector<ExampleSnippet> examples;
  std::string closing;
};

std::string render_body(std::string_view main, const std::vector<ExampleSnippet>& examples,
                        std::string_view closing) {
  std::vector<std::string> parts;
  if (!main.empty()) parts.emplace_back(main);
  for (const auto& example : examples) parts.push_back(render_example(example));
  if (!closing.empty()) parts.emplace_back(closing);
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i != 0) out += '\n';
    out += parts[i];
  }
  return out;
}

Body split_body(std::string_view text) {
  Body plain{std::string(text), {}, {}};
  const auto lines = split_lines(text);
  const auto n = lines.size();
  auto is_open = [&](std::size_t i) { return i < n && lines[i] == kYamlFence; };

  std::size_t open = 0;
  while (open < n && !is_open(open)) ++open;
  if (open == n || open == 0) return plain;

  Body body;
  std::size_t main_end = open;
  std::string label;
  if (open >= 2 && !lines[open - 1].empty()) {
    main_end = open - 1;
    label = std::string(lines[open - 1]);
  }
  body.main = join(lines, 0, main_end);

  while (true) {
    std::size_t close = open + 1;
    while (close < n && lines[close] != kFence) ++close;
    if (close == n) return plain;

    std::string code = join(lines, open + 1, close);
    if (close > open + 1) code += '\n';
    body.examples.push_back({std::move(label), std::move(code)});
    label.clear();

    if (is_open(close + 1)) {
      open = close + 1;
    } else if (is_open(close + 2) && !lines[close + 1].empty()) {
      label = std::string(lines[close + 1]);
      open = close + 2;
    } else {
      body.closing = join(lines, std::min(close + 1, n), n);
      break;
    }
  }

  if (body.main.empty() || render_body(body.main, body.examples, body.closing) != text) {
    return plain;
  }
  return body;
}

std::string strip_trailing_newlines(std::string_view text) {
  while (!text.empty() && text.back() == '\n') text.remove_suffix(1);
  return std::string(text);
}

std::string render_alpaca(const PromptSpec& spec) {
  const bool has_input = !spec.input_context.empty();
  std::string out;
  if (!spec.system_text.empty()) {
    out += spec.system_text;
  } else {
    out += has_input ? kAlpacaPreamble : kAlpacaPreambleNoInput;
  }
  out += "\n\n";
  out += kInstructionHeader;
  if (has_input) {
    out += spec.instruction;
    out += "\n\n";
    out += kInputHeader;
    out += render_body(spec.input_context, spec.example_snippets, spec.response_header);
  } else {
    out += render_body(spec.instruction, spec.example_snippets, spec.response_header);
  }
  out += "\n\n";
  out += kResponseHeader;
  return out;
}

std::string render_llama2(const PromptSpec& spec) {
  std::string body = spec.instruction;
  if (!spec.input_context.empty()) {
    body += '\n';
    body += spec.input_context;
  }
  body = render_body(body, spec.example_snippets, spec.response_header);

  std::string out(kInstOpen);
  if (!spec.system_text.empty()) {
    out += kSysOpen;
    out += spec.system_text;
    out += kSysClose;
  }
  out += body;
  out += kInstClose;
  return out;
}

std::string render_raw(const PromptSpec& spec) {
  std::vector<std::string> parts;
  for (const auto* field : {&spec.system_text, &spec.instruction, &spec.input_context}) {
    if (!field->empty()) parts.push_back(*field);
  }
  for (const auto& example : spec.example_snippets) parts.push_back(render_example(example));
  if (!spec.response_header.empty()) parts.push_back(spec.response_header);

  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i != 0) out += "\n\n";
    out += parts[i];
  }
  return out;
}

std::optional<PromptSpec> parse_alpaca(std::string_view text) {
  const std::string instruction_marker = std::string("\n\n") + std::string(kInstructionHeader);
  const auto instruction_at = text.find(instruction_marker);
  if (instruction_at == std::string_view::npos) return std::nullopt;
  if (text.size() < kResponseHeader.size() ||
      text.substr(text.size() - kResponseHeader.size()) != kResponseHeader) {
    return std::nullopt;
  }
  const auto response_at = text.size() - kResponseHeader.size();
  const auto sections_begin = instruction_at + instruction_marker.size();
  if (response_at < sections_begin || text[response_at - 1] != '\n') return std::nullopt;

  const std::string_view preamble = text.substr(0, instruction_at);
  const std::string sections =
      strip_trailing_newlines(text.substr(sections_begin, response_at - sections_begin));

  PromptSpec spec;
  const std::string input_marker = std::string("\n") + std::string(kInputHeader);
  const auto input_at = sections.find(input_marker);
  Body body;
  if (input_at != std::string::npos) {
    spec.instruction = strip_trailing_newlines(std::string_view(sections).substr(0, input_at));
    body = split_body(std::string_view(sections).substr(input_at + input_marker.size()));
    spec.input_context = std::move(body.main);
    if (spec.input_context.empty()) return std::nullopt;
  } else {
    body = split_body(sections);
    spec.instruction = std::move(body.main);
  }
  spec.example_snippets = std::move(body.examples);
  spec.response_header = std::move(body.closing);

  const std::string_view standard =
      spec.input_context.empty() ? kAlpacaPreambleNoInput : kAlpacaPreamble;
  if (preamble != standard) spec.system_text = std::string(preamble);
  if (spec.instruction.empty()) return std::nullopt;
  return spec;
}

std::optional<PromptSpec> parse_llama2(std::string_view text) {
  if (text.size() < kInstOpen.size() + kInstClose.size() || !text.starts_with(kInstOpen) ||
      !text.ends_with(kInstClose)) {
    return std::nullopt;
  }
  std::string_view inner =
      text.substr(kInstOpen.size(), text.size() - kInstOpen.size() - kInstClose.size());
  PromptSpec spec;
  if (inner.starts_with(kSysOpen)) {
    const auto close = inner.find(kSysClose, kSysOpen.size());
    if (close == std::string_view::npos) return std::nullopt;
    spec.system_text = std::string(inner.substr(kSysOpen.size(), close - kSysOpen.size()));
    inner.remove_prefix(close + kSysClose.size());
  }
  auto body = split_body(inner);
  spec.instruction = std::move(body.main);
  spec.example_snippets = std::move(body.examples);
  spec.response_header = std::move(body.closing);
  if (spec.instruction.empty()) return std::nullopt;
  return spec;
}

}  // namespace

std::string_view to_string(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::alpaca:
      return "alpaca";
    case TemplateKind::llama2_chat:
      return "llama2_chat";
    case TemplateKind::raw:
      return "raw";
  }
  return "raw";
}

TemplateKind parse_template_kind(std::string_view name) {
  if (name == "alpaca") return TemplateKind::alpaca;
  if (name == "llama2_chat") return TemplateKind::llama2_chat;
  if (name == "raw") return TemplateKind::raw;
  throw std::invalid_argument("unknown template kind '" + std::string(name) + "'");
}

void validate_spec(const PromptSpec& spec) {
  if (spec.instruction.empty()) throw InvalidSpec("prompt instruction must not be empty");
}

void validate_profile(const ModelProfile& profile) {
  if (profile.name.empty()) throw InvalidProfile("model profile needs a name");
  if (profile.context_window == 0) {
    throw InvalidProfile("profile '" + profile.name + "': context_window must be positive");
  }
  if (profile.default_reserve_output >= profile.context_window) {
    throw InvalidProfile("profile '" + profile.name +
                         "': default_reserve_output must be below context_window");
  }
}

const std::vector<ModelProfile>& builtin_profiles() {
  static const std::vector<ModelProfile> profiles = {
      {"alpaca", TemplateKind::alpaca, 2048, 512, {"### Instruction:", "### Input:"}},
      {"llama2_chat", TemplateKind::llama2_chat, 4096, 1024, {"[INST]"}},
      {"raw", TemplateKind::raw, 2048, 512, {}},
  };
  return profiles;
}

std::optional<ModelProfile> find_builtin_profile(std::string_view name) {
  for (const auto& profile : builtin_profiles()) {
    if (profile.name == name) return profile;
  }
  return std::nullopt;
}

std::string render_prompt(const PromptSpec& spec, TemplateKind kind) {
  validate_spec(spec);
  switch (kind) {
    case TemplateKind::alpaca:
      return render_alpaca(spec);
    case TemplateKind::llama2_chat:
      return render_llama2(spec);
    case TemplateKind::raw:
      return render_raw(spec);
  }
  return render_raw(spec);
}

std::string render_prompt(const PromptSpec& spec, const ModelProfile& profile) {
  return render_prompt(spec, profile.template_kind);
}

std::optional<PromptSpec> parse_prompt(std::string_view text, TemplateKind kind) {
  switch (kind) {
    case TemplateKind::alpaca:
      return parse_alpaca(text);
    case TemplateKind::llama2_chat:
      return parse_llama2(text);
    case TemplateKind::raw:
      break;
  }
  if (text.empty()) return std::nullopt;
  PromptSpec spec;
  spec.instruction = std::string(text);
  return spec;
}

std::size_t count_fence_markers(std::string_view text) {
  std::size_t count = 0;
  for (auto at = text.find(kFence); at != std::string_view::npos;
       at = text.find(kFence, at + kFence.size())) {
    ++count;
  }
  return count;
}

std::size_t estimate_tokens(std::string_view text) {
  return (text.size() + 3) / 4 + count_fence_markers(text);
}

BudgetReport budget_for(std::size_t prompt_tokens, std::size_t window, std::size_t reserve) {
  BudgetReport report;
  report.prompt_tokens = prompt_tokens;
  report.window = window;
  report.reserve = reserve;
  const std::size_t needed = prompt_tokens + reserve;
  report.fits = needed <= window;
  report.overflow = report.fits ? 0 : needed - window;
  return report;
}

BudgetReport check_budget(std::string_view text, const ModelProfile& profile,
                          std::size_t reserve) {
  return budget_for(estimate_tokens(text), profile.context_window, reserve);
}

}  // namespace yamlsmith::prompt
