#include <cctype>
#include <unordered_set>

#include "yamlsmith/extract.hpp"

namespace yamlsmith::extract {

namespace {

std::unordered_set<std::string_view> grams(std::string_view text) {
  std::unordered_set<std::string_view> out;
  if (text.size() < kEchoGram) return out;
  for (std::size_t i = 0; i + kEchoGram <= text.size(); ++i) out.insert(text.substr(i, kEchoGram));
  return out;
}

std::string_view trimmed(std::string_view line) {
  const auto first = line.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  return line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
}

}  // namespace

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (const char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

double overlap_ratio(std::string_view snippet, std::string_view block) {
  const auto a = normalize_whitespace(snippet);
  const auto b = normalize_whitespace(block);
  if (a.empty()) return 0.0;
  if (a.size() < kEchoGram) return a == b ? 1.0 : 0.0;
  const auto snippet_grams = grams(a);
  const auto block_grams = grams(b);
  std::size_t shared = 0;
  for (const auto gram : snippet_grams) shared += block_grams.count(gram);
  return static_cast<double>(shared) / static_cast<double>(snippet_grams.size());
}

std::vector<PromptSnippet> prompt_snippets(std::string_view prompt) {
  std::vector<std::string_view> lines;
  for (std::size_t start = 0; start < prompt.size();) {
    auto end = prompt.find('\n', start);
    if (end == std::string_view::npos) end = prompt.size();
    lines.push_back(prompt.substr(start, end - start));
    start = end + 1;
  }
  std::vector<PromptSnippet> out;
  for (const auto& block : extract_fenced(prompt)) {
    PromptSnippet snippet;
    snippet.code = block.content;
    // start_line is 1-based and sits just below the opening fence.
    for (std::size_t i = block.start_line - 2; i-- > 0;) {
      if (const auto line = trimmed(lines[i]); !line.empty()) {
        snippet.label = std::string(line);
        break;
      }
    }
    if (snippet.label.empty()) snippet.label = "example " + std::to_string(out.size() + 1);
    out.push_back(std::move(snippet));
  }
  return out;
}

EchoReport detect_echo(std::string_view prompt, const std::vector<CodeBlock>& blocks,
                       double threshold) {
  EchoReport report;
  const auto snippets = prompt_snippets(prompt);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const PromptSnippet* best = nullptr;
    double best_ratio = 0.0;
    for (const auto& snippet : snippets) {
      const double ratio = overlap_ratio(snippet.code, blocks[i].content);
      if (!best || ratio > best_ratio) {
        best = &snippet;
        best_ratio = ratio;
      }
    }
    if (best && best_ratio >= threshold) report.echoed_blocks.push_back({i, best->label, best_ratio});
  }
  report.any_echo = !report.echoed_blocks.empty();
  return report;
}

}  // namespace yamlsmith::extract
