#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "yamlsmith/findings.hpp"

namespace yamlsmith::validate {

enum class NodeKind { null, scalar, sequence, mapping, alias };

enum class ScalarType { null, string, boolean, integer, real };

/// YAML node with the source span it was parsed from. Mapping entries keep
/// source order and duplicates (the parser reports those separately).
struct Node {
  NodeKind kind = NodeKind::null;
  ScalarType scalar_type = ScalarType::null;
  std::string text;  // booleans are normalized to "true" / "false"
  bool quoted = false;
  Span span;
  std::vector<Node> items;
  std::vector<std::pair<Node, Node>> entries;

  bool is_scalar() const noexcept { return kind == NodeKind::scalar; }
  bool is_mapping() const noexcept { return kind == NodeKind::mapping; }
  bool is_sequence() const noexcept { return kind == NodeKind::sequence; }
  bool is_null() const noexcept { return kind == NodeKind::null; }

  /// Scalar containing a Jinja2 expression "{{ ... }}".
  bool is_template() const;

  /// First entry with this scalar key, or nullptr.
  const Node* get(std::string_view key) const;
  const std::pair<Node, Node>* entry(std::string_view key) const;

  /// Structural equality: kind, scalar type and text, children; ignores spans
  /// and quoting style.
  bool equivalent(const Node& other) const;
};

/// YAML 1.1-style booleans accepted in Ansible files: true/false/yes/no in
/// lower, Capitalized or UPPER case.
std::optional<bool> yaml_bool(std::string_view text);

struct YamlDocument {
  std::optional<Node> root;  // set when parsing succeeded without errors
  std::vector<Finding> findings;
  std::size_t documents = 0;
};

/// Parses the first document of `text`. Syntax errors and duplicate mapping
/// keys become error findings and leave `root` empty. Never throws on bad
/// input.
YamlDocument parse_yaml(std::string_view text);

/// Block-style YAML for `node`; strings are always double-quoted.
std::string to_yaml(const Node& node);

}  // namespace yamlsmith::validate
