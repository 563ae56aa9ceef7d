#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "yamlsmith/catalog.hpp"
#include "yamlsmith/findings.hpp"
#include "yamlsmith/yaml_tree.hpp"

namespace yamlsmith::validate {

enum class DocumentKind { play_list, task_list, other_document };

std::string_view to_string(DocumentKind kind);

struct Param {
  std::string key;
  Span key_span;
  Node value;
};

/// One task after normalization. `module_ref` is the module key as written
/// ("ansible.builtin.service", "service", or the target of `action:`).
/// `module_keys` lists every key that could be a module; structure checks
/// flag tasks where that is not exactly one.
struct TaskNode {
  std::optional<std::string> name;
  std::string module_ref;
  Span module_span;
  std::vector<Param> module_keys;
  std::vector<Param> params;  // source order, `args:` entries included
  std::optional<Node> free_form;
  std::vector<Param> extra_keys;
  Span span;
};

struct Play {
  std::optional<std::string> name;
  bool has_hosts = false;
  bool imports_playbook = false;
  bool has_roles = false;
  bool declares_tasks = false;
  Span span;
  std::vector<TaskNode> tasks;
};

struct PlaybookAst {
  DocumentKind kind = DocumentKind::other_document;
  std::vector<Play> plays;
  std::vector<TaskNode> tasks;  // task_list, or salvaged from other_document
  Node root;
  std::vector<Finding> shape_findings;  // item-level problems seen while building
  std::string_view source;              // candidate text the spans index into

  std::size_t task_count() const;
  /// Every task, plays first, in source order.
  std::vector<const TaskNode*> all_tasks() const;
};

struct ParseResult {
  std::optional<PlaybookAst> ast;
  std::vector<Finding> findings;  // non-empty when `ast` is empty

  bool ok() const noexcept { return ast.has_value(); }
};

/// Ansible task keywords; any other key of a task mapping is a module key.
bool is_task_keyword(std::string_view key);

/// Parse and classify. `text` must outlive the result (spans and `source`
/// refer to it). Never throws on malformed input.
ParseResult parse_playbook(std::string_view text);

/// hosts on plays, one module per task, NOT_A_PLAYBOOK, empty task lists.
std::vector<Finding> validate_structure(const PlaybookAst& ast);

/// Module names and parameters against the catalog. Template expressions
/// "{{ ... }}" satisfy every value kind and choice list.
std::vector<Finding> validate_modules(const PlaybookAst& ast, const SchemaCatalog& catalog);

/// parse + structure + modules, sorted. Syntax findings when parsing fails.
std::vector<Finding> lint(std::string_view text, const SchemaCatalog& catalog);

/// YAML for a task list AST; re-parses to an equivalent tree.
std::string serialize(const PlaybookAst& ast);

}  // namespace yamlsmith::validate
