#include "yamlsmith/yaml_tree.hpp"

#include <algorithm>
#include <exception>
#include <regex>
#include <sstream>

#include <yaml-cpp/eventhandler.h>
#include <yaml-cpp/exceptions.h>
#include <yaml-cpp/yaml.h>

namespace yamlsmith::validate {

namespace {

bool is_plain_null(std::string_view text) {
  return text.empty() || text == "~" || text == "null" || text == "Null" || text == "NULL";
}

bool is_plain_int(std::string_view text) {
  static const std::regex pattern(R"([-+]?[0-9]+|0o[0-7]+|0x[0-9a-fA-F]+)");
  return std::regex_match(text.begin(), text.end(), pattern);
}

bool is_plain_real(std::string_view text) {
  static const std::regex pattern(
      R"([-+]?(\.[0-9]+|[0-9]+(\.[0-9]*)?)([eE][-+]?[0-9]+)?|[-+]?\.(inf|Inf|INF)|\.(nan|NaN|NAN))");
  return std::regex_match(text.begin(), text.end(), pattern);
}

// Builds a Node tree from parser events, tracking byte spans.
class TreeBuilder : public YAML::EventHandler {
 public:
  TreeBuilder(std::string_view text, const LineIndex& index) : text_(text), index_(index) {}

  void OnDocumentStart(const YAML::Mark& mark) override {
    ++documents_;
    previous_start_ = last_start_;
    last_start_ = mark;
  }
  void OnDocumentEnd() override {}

  void OnNull(const YAML::Mark& mark, YAML::anchor_t) override {
    Node node;
    const auto at = offset(mark);
    node.span = index_.span(at, at);
    attach(std::move(node));
  }

  void OnAlias(const YAML::Mark& mark, YAML::anchor_t) override {
    Node node;
    node.kind = NodeKind::alias;
    const auto at = offset(mark);
    auto end = at;
    if (end < text_.size() && text_[end] == '*') {
      ++end;
      while (end < text_.size() && !is_break_or_space(text_[end]) && text_[end] != ',' &&
             text_[end] != ']' && text_[end] != '}') {
        ++end;
      }
    }
    node.span = index_.span(at, end);
    attach(std::move(node));
  }

  void OnScalar(const YAML::Mark& mark, const std::string& tag, YAML::anchor_t,
                const std::string& value) override {
    Node node;
    node.kind = NodeKind::scalar;
    node.text = value;
    const auto at = offset(mark);
    const char lead = at < text_.size() ? text_[at] : '\0';
    node.quoted = lead == '"' || lead == '\'';
    if (tag == "?") {
      if (is_plain_null(value)) {
        node.kind = NodeKind::null;
        node.text.clear();
      } else if (const auto flag = yaml_bool(value)) {
        node.scalar_type = ScalarType::boolean;
        node.text = *flag ? "true" : "false";
      } else if (is_plain_int(value)) {
        node.scalar_type = ScalarType::integer;
      } else if (is_plain_real(value)) {
        node.scalar_type = ScalarType::real;
      } else {
        node.scalar_type = ScalarType::string;
      }
    } else {
      node.scalar_type = ScalarType::string;
    }
    node.span = index_.span(at, scalar_end(at, value));
    attach(std::move(node));
  }

  void OnSequenceStart(const YAML::Mark& mark, const std::string&, YAML::anchor_t,
                       YAML::EmitterStyle::value) override {
    open(NodeKind::sequence, mark);
  }
  void OnSequenceEnd() override { close(); }

  void OnMapStart(const YAML::Mark& mark, const std::string&, YAML::anchor_t,
                  YAML::EmitterStyle::value) override {
    open(NodeKind::mapping, mark);
  }
  void OnMapEnd() override { close(); }

  std::optional<Node>& root() { return root_; }
  std::vector<Finding>& findings() { return findings_; }
  std::size_t documents() const { return documents_; }
  // yaml-cpp 0.7 can start a new document without consuming a stray token.
  bool stalled() const { return documents_ > 1 && last_start_.pos == previous_start_.pos; }
  const YAML::Mark& last_start() const { return last_start_; }

 private:
  struct Frame {
    Node node;
    std::optional<Node> pending_key;
  };

  static bool is_break_or_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

  std::size_t offset(const YAML::Mark& mark) const {
    if (mark.line < 0 || mark.column < 0) return text_.size();
    return index_.offset(static_cast<std::size_t>(mark.line),
                         static_cast<std::size_t>(mark.column));
  }

  std::size_t scalar_end(std::size_t start, std::string_view value) const {
    if (start >= text_.size()) return text_.size();
    const char lead = text_[start];
    if (lead == '"') {
      for (std::size_t i = start + 1; i < text_.size(); ++i) {
        if (text_[i] == '\\') {
          ++i;
        } else if (text_[i] == '"') {
          return i + 1;
        }
      }
      return text_.size();
    }
    if (lead == '\'') {
      for (std::size_t i = start + 1; i < text_.size(); ++i) {
        if (text_[i] != '\'') continue;
        if (i + 1 < text_.size() && text_[i + 1] == '\'') {
          ++i;
          continue;
        }
        return i + 1;
      }
      return text_.size();
    }
    if (lead == '|' || lead == '>') return block_scalar_end(start);
    if (!value.empty() && text_.compare(start, value.size(), value) == 0) {
      return start + value.size();
    }
    // Multi-line plain scalar or a tagged one: take the rest of the line.
    auto end = index_.line_end(start);
    const auto comment = text_.substr(start, end - start).find(" #");
    if (comment != std::string_view::npos) end = start + comment;
    while (end > start && (text_[end - 1] == ' ' || text_[end - 1] == '\t')) --end;
    return std::max(end, std::min(start + 1, text_.size()));
  }

  std::size_t indentation_at(std::size_t line_start) const {
    std::size_t i = line_start;
    while (i < text_.size() && text_[i] == ' ') ++i;
    return i - line_start;
  }

  std::size_t block_scalar_end(std::size_t start) const {
    auto line_end = index_.line_end(start);
    auto line_start = start;
    while (line_start > 0 && text_[line_start - 1] != '\n') --line_start;
    const auto base = indentation_at(line_start);
    auto end = line_end;
    auto cursor = line_end + 1;
    while (cursor < text_.size()) {
      const auto next_end = index_.line_end(cursor);
      const auto indent = indentation_at(cursor);
      const bool blank = cursor + indent >= next_end;
      if (!blank && indent <= base) break;
      if (!blank) end = next_end;
      cursor = next_end + 1;
    }
    return end;
  }

  void open(NodeKind kind, const YAML::Mark& mark) {
    Frame frame;
    frame.node.kind = kind;
    const auto at = offset(mark);
    frame.node.span = index_.span(at, at);
    stack_.push_back(std::move(frame));
  }

  void close() {
    if (stack_.empty()) return;
    Frame frame = std::move(stack_.back());
    stack_.pop_back();
    Node& node = frame.node;

    auto end = node.span.begin;
    for (const auto& item : node.items) end = std::max(end, item.span.end);
    for (const auto& [key, value] : node.entries) end = std::max({end, key.span.end, value.span.end});
    const auto begin = node.span.begin;
    if (begin < text_.size() && (text_[begin] == '[' || text_[begin] == '{')) {
      const char closer = text_[begin] == '[' ? ']' : '}';
      const auto found = text_.find(closer, std::max(end, begin + 1));
      end = found == std::string_view::npos ? text_.size() : found + 1;
    }
    node.span = index_.span(begin, end);

    if (node.kind == NodeKind::mapping) report_duplicates(node);
    attach(std::move(node));
  }

  void report_duplicates(const Node& mapping) {
    for (std::size_t i = 0; i < mapping.entries.size(); ++i) {
      const auto& key = mapping.entries[i].first;
      if (key.kind != NodeKind::scalar || key.text == "<<") continue;
      for (std::size_t j = 0; j < i; ++j) {
        const auto& earlier = mapping.entries[j].first;
        if (earlier.kind == NodeKind::scalar && earlier.text == key.text) {
          findings_.push_back({Severity::error, std::string(codes::kDuplicateKey),
                               "duplicate mapping key '" + key.text + "' (first defined on line " +
                                   std::to_string(earlier.span.line) + ")",
                               key.span});
          break;
        }
      }
    }
  }

  void attach(Node node) {
    if (stack_.empty()) {
      if (documents_ <= 1 && !root_) root_ = std::move(node);
      return;
    }
    Frame& top = stack_.back();
    if (top.node.kind == NodeKind::sequence) {
      top.node.items.push_back(std::move(node));
    } else if (!top.pending_key) {
      top.pending_key = std::move(node);
    } else {
      top.node.entries.emplace_back(std::move(*top.pending_key), std::move(node));
      top.pending_key.reset();
    }
  }

  std::string_view text_;
  const LineIndex& index_;
  std::vector<Frame> stack_;
  std::optional<Node> root_;
  std::vector<Finding> findings_;
  std::size_t documents_ = 0;
  YAML::Mark last_start_ = YAML::Mark::null_mark();
  YAML::Mark previous_start_ = YAML::Mark::null_mark();
};

void emit(YAML::Emitter& out, const Node& node) {
  switch (node.kind) {
    case NodeKind::null:
    case NodeKind::alias:
      out << YAML::Null;
      break;
    case NodeKind::scalar:
      if (node.scalar_type == ScalarType::string) {
        out << YAML::DoubleQuoted << node.text;
      } else {
        out << node.text;
      }
      break;
    case NodeKind::sequence:
      out << YAML::BeginSeq;
      for (const auto& item : node.items) emit(out, item);
      out << YAML::EndSeq;
      break;
    case NodeKind::mapping:
      out << YAML::BeginMap;
      for (const auto& [key, value] : node.entries) {
        out << YAML::Key;
        emit(out, key);
        out << YAML::Value;
        emit(out, value);
      }
      out << YAML::EndMap;
      break;
  }
}

}  // namespace

bool Node::is_template() const {
  return kind == NodeKind::scalar && text.find("{{") != std::string::npos;
}

const std::pair<Node, Node>* Node::entry(std::string_view key) const {
  for (const auto& item : entries) {
    if (item.first.kind == NodeKind::scalar && item.first.text == key) return &item;
  }
  return nullptr;
}

const Node* Node::get(std::string_view key) const {
  const auto* found = entry(key);
  return found ? &found->second : nullptr;
}

bool Node::equivalent(const Node& other) const {
  if (kind != other.kind) return false;
  if (kind == NodeKind::scalar && (scalar_type != other.scalar_type || text != other.text)) {
    return false;
  }
  if (items.size() != other.items.size() || entries.size() != other.entries.size()) return false;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!items[i].equivalent(other.items[i])) return false;
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].first.equivalent(other.entries[i].first) ||
        !entries[i].second.equivalent(other.entries[i].second)) {
      return false;
    }
  }
  return true;
}

std::optional<bool> yaml_bool(std::string_view text) {
  for (const auto* word : {"true", "True", "TRUE", "yes", "Yes", "YES"}) {
    if (text == word) return true;
  }
  for (const auto* word : {"false", "False", "FALSE", "no", "No", "NO"}) {
    if (text == word) return false;
  }
  return std::nullopt;
}

YamlDocument parse_yaml(std::string_view text) {
  const LineIndex index(text);
  TreeBuilder builder(text, index);
  YamlDocument result;

  auto syntax_finding = [&](const YAML::Mark& mark, std::string message) {
    std::size_t at = text.size();
    if (mark.line >= 0 && mark.column >= 0) {
      at = index.offset(static_cast<std::size_t>(mark.line), static_cast<std::size_t>(mark.column));
    }
    result.findings.push_back({Severity::error, std::string(codes::kYamlSyntax), std::move(message),
                               index.span(at, index.line_end(at))});
  };

  try {
    std::istringstream stream{std::string(text)};
    YAML::Parser parser(stream);
    while (parser.HandleNextDocument(builder)) {
      if (builder.stalled()) {
        const auto& mark = builder.last_start();
        const auto at = static_cast<std::size_t>(mark.pos);
        const std::string token = at < text.size() ? std::string(1, text[at]) : std::string("end of input");
        syntax_finding(mark, "unexpected '" + token + "' outside a flow collection");
        break;
      }
    }
  } catch (const YAML::Exception& error) {
    syntax_finding(error.mark, error.msg);
  } catch (const std::exception& error) {
    syntax_finding(YAML::Mark::null_mark(), std::string("parser failure: ") + error.what());
  }

  result.documents = builder.documents();
  for (auto& finding : builder.findings()) result.findings.push_back(std::move(finding));
  if (result.documents > 1 && result.findings.empty()) {
    result.findings.push_back({Severity::info, std::string(codes::kExtraDocument),
                               "only the first of " + std::to_string(result.documents) +
                                   " YAML documents is checked",
                               index.span(text.size(), text.size())});
  }
  sort_findings(result.findings);
  if (count_severity(result.findings, Severity::error) == 0) {
    result.root = std::move(builder.root());
    if (!result.root) {
      Node empty;
      empty.span = index.span(0, 0);
      result.root = std::move(empty);
    }
  }
  return result;
}

std::string to_yaml(const Node& node) {
  YAML::Emitter out;
  emit(out, node);
  return std::string(out.c_str()) + "\n";
}

}  // namespace yamlsmith::validate
