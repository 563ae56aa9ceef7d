#include "yamlsmith/extract.hpp"

#include <algorithm>

#include "yamlsmith/yaml_tree.hpp"

namespace yamlsmith::extract {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

std::size_t leading_spaces(std::string_view line) {
  std::size_t n = 0;
  while (n < line.size() && line[n] == ' ') ++n;
  return n;
}

struct Fence {
  std::size_t indent = 0;
  std::string_view info;
};

std::optional<Fence> fence_line(std::string_view line) {
  const auto indent = leading_spaces(line);
  if (indent > 4) return std::nullopt;
  const auto rest = line.substr(indent);
  if (!rest.starts_with("```")) return std::nullopt;
  if (rest.size() > 3 && rest[3] == '`') return std::nullopt;
  const auto info = trim(rest.substr(3));
  if (info.find('`') != std::string_view::npos) return std::nullopt;
  return Fence{indent, info};
}

std::string strip_indent(std::string_view line, std::size_t indent) {
  return std::string(line.substr(std::min(indent, leading_spaces(line))));
}

std::string join_lines(const std::vector<std::string_view>& lines, std::size_t first,
                       std::size_t last_exclusive, std::size_t indent) {
  std::string out;
  for (std::size_t i = first; i < last_exclusive; ++i) {
    out += strip_indent(lines[i], indent);
    out += '\n';
  }
  return out;
}

struct FenceScan {
  std::vector<CodeBlock> blocks;
  std::vector<bool> fenced_lines;
};

FenceScan scan_fences(std::string_view text) {
  const auto lines = split_lines(text);
  FenceScan scan;
  scan.fenced_lines.assign(lines.size(), false);

  auto emit = [&](std::size_t open, std::size_t close, const Fence& fence, bool terminated) {
    CodeBlock block;
    block.origin = Origin::fenced;
    const auto info = fence.info;
    block.language_tag = std::string(info.substr(0, info.find_first_of(" \t")));
    block.content = join_lines(lines, open + 1, close, fence.indent);
    block.start_line = open + 2;
    block.end_line = close > open + 1 ? close : open + 2;
    if (!terminated) block.note = "unterminated fence; block runs to end of text";
    const auto last = terminated ? close : lines.size() - 1;
    for (std::size_t i = open; i <= last; ++i) scan.fenced_lines[i] = true;
    scan.blocks.push_back(std::move(block));
  };

  std::optional<std::pair<std::size_t, Fence>> open;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto fence = fence_line(lines[i]);
    if (!fence) continue;
    if (!open) {
      open.emplace(i, *fence);
    } else if (fence->info.empty()) {
      emit(open->first, i, open->second, true);
      open.reset();
    }
  }
  if (open) emit(open->first, lines.size(), open->second, false);
  return scan;
}

bool key_char(char c, bool first) {
  const bool alnum = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  return first ? alnum : alnum || c == '.' || c == '-' || c == '/';
}

}  // namespace

std::string_view to_string(Origin origin) {
  return origin == Origin::fenced ? "fenced" : "unfenced";
}

bool looks_like_yaml_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  auto s = line.substr(leading_spaces(line));
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) return false;
  if (s == "---") return true;
  if (s[0] == '#') return s.size() == 1 || s[1] == ' ';
  if (s == "-" || s.starts_with("- ")) return true;
  if (!key_char(s[0], true)) return false;
  std::size_t i = 1;
  while (i < s.size() && key_char(s[i], false)) ++i;
  return i < s.size() && s[i] == ':' && (i + 1 == s.size() || s[i + 1] == ' ');
}

std::vector<CodeBlock> extract_fenced(std::string_view text) { return scan_fences(text).blocks; }

std::vector<CodeBlock> extract_unfenced(std::string_view text) {
  const auto lines = split_lines(text);
  const auto fenced = scan_fences(text).fenced_lines;
  const auto usable = [&](std::size_t i) { return !fenced[i]; };
  const auto yaml_at = [&](std::size_t i) { return usable(i) && looks_like_yaml_line(lines[i]); };

  std::vector<CodeBlock> blocks;
  std::size_t i = 0;
  while (i < lines.size()) {
    if (!yaml_at(i)) {
      ++i;
      continue;
    }
    std::size_t last = i;
    std::size_t count = 1;
    std::size_t j = i + 1;
    while (j < lines.size() && usable(j)) {
      if (looks_like_yaml_line(lines[j])) {
        last = j;
        ++count;
        ++j;
      } else if (is_blank(lines[j])) {
        std::size_t k = j;
        while (k < lines.size() && usable(k) && is_blank(lines[k])) ++k;
        if (k < lines.size() && yaml_at(k)) {
          j = k;
        } else {
          break;
        }
      } else {
        break;
      }
    }
    if (count >= 3) {
      std::size_t indent = std::string_view::npos;
      for (std::size_t k = i; k <= last; ++k) {
        if (!is_blank(lines[k])) indent = std::min(indent, leading_spaces(lines[k]));
      }
      CodeBlock block;
      block.origin = Origin::unfenced;
      block.content = join_lines(lines, i, last + 1, indent);
      block.start_line = i + 1;
      block.end_line = last + 1;
      blocks.push_back(std::move(block));
    }
    i = last + 1;
  }
  return blocks;
}

std::vector<CodeBlock> extract_all(std::string_view text) {
  auto blocks = extract_fenced(text);
  auto unfenced = extract_unfenced(text);
  blocks.insert(blocks.end(), std::make_move_iterator(unfenced.begin()),
                std::make_move_iterator(unfenced.end()));
  std::stable_sort(blocks.begin(), blocks.end(),
                   [](const CodeBlock& a, const CodeBlock& b) { return a.start_line < b.start_line; });
  return blocks;
}

std::string_view to_string(Policy policy) {
  switch (policy) {
    case Policy::first:
      return "first";
    case Policy::largest:
      return "largest";
    case Policy::all_parseable:
      return "all_parseable";
  }
  return "largest";
}

std::optional<Policy> parse_policy(std::string_view name) {
  for (auto policy : {Policy::first, Policy::largest, Policy::all_parseable}) {
    if (to_string(policy) == name) return policy;
  }
  return std::nullopt;
}

std::vector<CodeBlock> select_candidates(const std::vector<CodeBlock>& blocks, Policy policy) {
  if (policy == Policy::all_parseable) {
    std::vector<CodeBlock> out;
    for (const auto& block : blocks) {
      if (validate::parse_yaml(block.content).root) out.push_back(block);
    }
    return out;
  }
  if (blocks.empty()) throw NoCandidate("no code block to select from");
  if (policy == Policy::first) return {blocks.front()};
  const auto* best = &blocks.front();
  for (const auto& block : blocks) {
    if (block.line_count() > best->line_count()) best = &block;
  }
  return {*best};
}

}  // namespace yamlsmith::extract
