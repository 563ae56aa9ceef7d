#include "yamlsmith/playbook.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace yamlsmith::validate {

namespace {

constexpr std::array kTaskKeywords = {
    "action",        "any_errors_fatal", "args",        "async",          "become",
    "become_exe",    "become_flags",     "become_method", "become_user",  "changed_when",
    "check_mode",    "collections",      "connection",  "debugger",       "delay",
    "delegate_facts", "delegate_to",     "diff",        "environment",    "failed_when",
    "ignore_errors", "ignore_unreachable", "listen",    "local_action",   "loop",
    "loop_control",  "module_defaults",  "name",        "no_log",         "notify",
    "poll",          "port",             "register",    "remote_user",    "retries",
    "run_once",      "tags",             "throttle",    "timeout",        "until",
    "vars",          "when",             "block",       "rescue",         "always",
};

constexpr std::array kPlayMarkers = {
    "hosts", "tasks", "pre_tasks", "post_tasks", "handlers",
    "roles", "import_playbook", "ansible.builtin.import_playbook",
};

constexpr std::array kTaskSections = {"pre_tasks", "tasks", "post_tasks", "handlers"};

Span join_spans(const Span& first, const Span& last) {
  Span out = first;
  if (last.end > out.end) {
    out.end = last.end;
    out.end_line = last.end_line;
    out.end_column = last.end_column;
  }
  return out;
}

bool has_key(const Node& mapping, std::string_view key) { return mapping.entry(key) != nullptr; }

bool is_play_like(const Node& item) {
  if (!item.is_mapping()) return false;
  return std::any_of(kPlayMarkers.begin(), kPlayMarkers.end(),
                     [&](const char* key) { return has_key(item, key); });
}

bool is_block(const Node& item) { return item.is_mapping() && has_key(item, "block"); }

bool bears_module(const Node& item) {
  if (!item.is_mapping()) return false;
  if (is_block(item) || has_key(item, "action") || has_key(item, "local_action")) return true;
  return std::any_of(item.entries.begin(), item.entries.end(), [](const auto& entry) {
    return entry.first.is_scalar() && !is_task_keyword(entry.first.text);
  });
}

void apply_action(TaskNode& task, const Node& action) {
  if (action.is_scalar()) {
    const auto& text = action.text;
    const auto space = text.find_first_of(" \t");
    task.module_ref = text.substr(0, space);
    task.module_span = action.span;
    if (space != std::string::npos) {
      Node rest = action;
      rest.text = text.substr(text.find_first_not_of(" \t", space));
      rest.scalar_type = ScalarType::string;
      task.free_form = std::move(rest);
    }
  } else if (action.is_mapping()) {
    for (const auto& [key, value] : action.entries) {
      if (key.is_scalar() && key.text == "module" && value.is_scalar()) {
        task.module_ref = value.text;
        task.module_span = value.span;
      } else {
        task.params.push_back({key.text, key.span, value});
      }
    }
  }
}

void add_mapping_params(std::vector<Param>& out, const Node& mapping) {
  for (const auto& [key, value] : mapping.entries) {
    out.push_back({key.is_scalar() ? key.text : std::string(), key.span, value});
  }
}

TaskNode build_task(const Node& mapping) {
  TaskNode task;
  task.span = mapping.span;
  const Node* action = nullptr;
  std::vector<Param> args;
  for (const auto& [key, value] : mapping.entries) {
    const std::string name = key.is_scalar() ? key.text : std::string();
    if (name == "name" && value.is_scalar()) task.name = value.text;
    if (name == "action" || name == "local_action") {
      action = &value;
      task.extra_keys.push_back({name, key.span, value});
    } else if (name == "args" && value.is_mapping()) {
      add_mapping_params(args, value);
      task.extra_keys.push_back({name, key.span, value});
    } else if (is_task_keyword(name)) {
      task.extra_keys.push_back({name, key.span, value});
    } else {
      task.module_keys.push_back({name, key.span, value});
    }
  }

  if (action) {
    apply_action(task, *action);
  } else if (!task.module_keys.empty()) {
    const auto& module = task.module_keys.front();
    task.module_ref = module.key;
    task.module_span = module.key_span;
    if (module.value.is_mapping()) {
      add_mapping_params(task.params, module.value);
    } else if (module.value.is_scalar()) {
      task.free_form = module.value;
    }
  }
  task.params.insert(task.params.end(), args.begin(), args.end());
  return task;
}

void collect_tasks(const Node& list, std::vector<TaskNode>& out, std::vector<Finding>& shape) {
  if (list.is_null()) return;
  if (!list.is_sequence()) {
    shape.push_back({Severity::error, std::string(codes::kNotATask),
                     "expected a list of tasks", list.span});
    return;
  }
  for (const auto& item : list.items) {
    if (is_block(item)) {
      for (const char* section : {"block", "rescue", "always"}) {
        if (const auto* nested = item.get(section)) collect_tasks(*nested, out, shape);
      }
    } else if (item.is_mapping()) {
      out.push_back(build_task(item));
    } else {
      shape.push_back({Severity::error, std::string(codes::kNotATask),
                       "task list item is not a mapping", item.span});
    }
  }
}

Play build_play(const Node& mapping, std::vector<Finding>& shape) {
  Play play;
  play.span = mapping.span;
  if (const auto* name = mapping.get("name"); name && name->is_scalar()) play.name = name->text;
  play.has_hosts = has_key(mapping, "hosts");
  play.imports_playbook =
      has_key(mapping, "import_playbook") || has_key(mapping, "ansible.builtin.import_playbook");
  play.has_roles = has_key(mapping, "roles");
  for (const char* section : kTaskSections) {
    if (const auto* tasks = mapping.get(section)) {
      play.declares_tasks = true;
      collect_tasks(*tasks, play.tasks, shape);
    }
  }
  return play;
}

// Best-effort task view of a document that is not a playbook, so module names
// in e.g. `role: {task_name: {...}}` shapes still get checked.
void salvage_tasks(const Node& node, std::vector<TaskNode>& out) {
  if (!node.is_mapping()) return;
  const bool looks_like_task = std::any_of(node.entries.begin(), node.entries.end(), [](const auto& e) {
    return e.first.is_scalar() && is_task_keyword(e.first.text);
  });
  if (looks_like_task) {
    out.push_back(build_task(node));
    return;
  }
  if (node.entries.size() == 1 && node.entries.front().second.is_mapping()) {
    salvage_tasks(node.entries.front().second, out);
    return;
  }
  for (const auto& [key, value] : node.entries) {
    if (!key.is_scalar()) continue;
    TaskNode task;
    task.module_ref = key.text;
    task.module_span = key.span;
    task.span = join_spans(key.span, value.span);
    task.module_keys.push_back({key.text, key.span, value});
    if (value.is_mapping()) {
      add_mapping_params(task.params, value);
    } else if (value.is_sequence()) {
      for (const auto& item : value.items) {
        if (item.is_mapping()) add_mapping_params(task.params, item);
      }
    } else if (value.is_scalar()) {
      task.free_form = value;
    }
    out.push_back(std::move(task));
  }
}

std::string_view describe(const Node& node) {
  switch (node.kind) {
    case NodeKind::mapping:
      return "mapping";
    case NodeKind::sequence:
      return "list";
    case NodeKind::scalar:
      return "scalar";
    case NodeKind::alias:
      return "alias";
    case NodeKind::null:
      return "empty document";
  }
  return "document";
}

bool accepts_boolean(const Node& value) {
  if (!value.is_scalar()) return false;
  if (yaml_bool(value.text)) return true;
  static const std::set<std::string, std::less<>> extra = {"1", "0", "on", "off", "y", "n"};
  return extra.contains(value.text);
}

bool accepts_integer(const Node& value) {
  if (!value.is_scalar()) return false;
  if (value.scalar_type == ScalarType::integer) return true;
  const auto& text = value.text;
  if (text.empty()) return false;
  const std::size_t start = (text[0] == '-' || text[0] == '+') ? 1 : 0;
  return start < text.size() &&
         std::all_of(text.begin() + static_cast<std::ptrdiff_t>(start), text.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

void check_choice(const Node& value, const ParamSchema& param, const std::string& module,
                  std::vector<Finding>& out) {
  if (!param.choices || !value.is_scalar() || value.is_template()) return;
  const auto& choices = *param.choices;
  if (std::find(choices.begin(), choices.end(), value.text) != choices.end()) return;
  out.push_back({Severity::error, std::string(codes::kInvalidChoice),
                 "invalid value '" + value.text + "' for '" + param.name + "' of " + module +
                     " (valid: " + join(choices) + ")",
                 value.span});
}

void check_value(const Node& value, const ParamSchema& param, const std::string& module,
                 std::vector<Finding>& out) {
  if (value.kind == NodeKind::alias || value.is_null() || value.is_template()) return;
  bool type_ok = true;
  switch (param.value_kind) {
    case ValueKind::string:
    case ValueKind::path:
      type_ok = value.is_scalar();
      break;
    case ValueKind::boolean:
      type_ok = value.is_template() || accepts_boolean(value);
      break;
    case ValueKind::integer:
      type_ok = accepts_integer(value);
      break;
    case ValueKind::list:
      type_ok = value.is_sequence() || value.is_scalar();
      break;
  }
  if (!type_ok) {
    out.push_back({Severity::error, std::string(codes::kInvalidType),
                   "'" + param.name + "' of " + module + " expects a " +
                       std::string(to_string(param.value_kind)) + ", got a " +
                       std::string(describe(value)),
                   value.span});
    return;
  }
  if (value.is_sequence()) {
    for (const auto& item : value.items) check_choice(item, param, module, out);
  } else {
    check_choice(value, param, module, out);
  }
}

// `key=value key2=value2` arguments written inline after a module name.
std::optional<std::vector<std::pair<std::string, std::string>>> split_key_values(
    std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i == text.size()) break;
    auto end = text.find_first_of(" \t", i);
    if (end == std::string_view::npos) end = text.size();
    const auto token = text.substr(i, end - i);
    const auto eq = token.find('=');
    if (eq == std::string_view::npos || eq == 0) return std::nullopt;
    out.emplace_back(std::string(token.substr(0, eq)), std::string(token.substr(eq + 1)));
    i = end;
  }
  if (out.empty()) return std::nullopt;
  return out;
}

void validate_task(const TaskNode& task, const SchemaCatalog& catalog, std::vector<Finding>& out) {
  if (task.module_ref.empty()) return;
  const auto resolution = catalog.resolve(task.module_ref);
  if (!resolution.schema) {
    std::string message = "unknown module '" + task.module_ref + "'";
    if (!resolution.candidates.empty()) {
      message += " (ambiguous short name, candidates: " + join(resolution.candidates) + ")";
    }
    out.push_back({Severity::error, std::string(codes::kUnknownModule), message, task.module_span});
    return;
  }
  const auto& schema = *resolution.schema;
  const auto& module = schema.fqcn;
  std::set<std::string, std::less<>> present;

  if (task.free_form && !task.free_form->is_template()) {
    const auto* free_form = schema.find_param("free_form");
    if (free_form) {
      present.insert(free_form->name);
    } else if (const auto pairs = split_key_values(task.free_form->text)) {
      for (const auto& [key, text] : *pairs) {
        const auto* param = schema.find_param(key);
        if (!param) {
          out.push_back({Severity::warning, std::string(codes::kUnknownParam),
                         "unknown parameter '" + key + "' for " + module, task.free_form->span});
          continue;
        }
        present.insert(param->name);
        Node value = *task.free_form;
        value.text = text;
        value.scalar_type = ScalarType::string;
        if (const auto flag = yaml_bool(text)) {
          value.scalar_type = ScalarType::boolean;
          value.text = *flag ? "true" : "false";
        }
        check_value(value, *param, module, out);
      }
    } else {
      out.push_back({Severity::warning, std::string(codes::kUnknownParam),
                     module + " does not take free-form arguments", task.free_form->span});
    }
  }

  for (const auto& param : task.params) {
    const auto* schema_param = schema.find_param(param.key);
    if (!schema_param) {
      out.push_back({Severity::warning, std::string(codes::kUnknownParam),
                     "unknown parameter '" + param.key + "' for " + module, param.key_span});
      continue;
    }
    if (!param.value.is_null()) present.insert(schema_param->name);
    check_value(param.value, *schema_param, module, out);
  }

  for (const auto& param : schema.params) {
    if (param.required && !present.contains(param.name)) {
      out.push_back({Severity::error, std::string(codes::kMissingRequired),
                     "missing required parameter '" + param.name + "' for " + module,
                     task.module_span});
    }
  }
}

}  // namespace

std::string_view to_string(DocumentKind kind) {
  switch (kind) {
    case DocumentKind::play_list:
      return "play_list";
    case DocumentKind::task_list:
      return "task_list";
    case DocumentKind::other_document:
      return "other_document";
  }
  return "other_document";
}

bool is_task_keyword(std::string_view key) {
  if (key.starts_with("with_")) return true;
  return std::any_of(kTaskKeywords.begin(), kTaskKeywords.end(),
                     [&](const char* keyword) { return key == keyword; });
}

std::size_t PlaybookAst::task_count() const { return all_tasks().size(); }

std::vector<const TaskNode*> PlaybookAst::all_tasks() const {
  std::vector<const TaskNode*> out;
  for (const auto& play : plays) {
    for (const auto& task : play.tasks) out.push_back(&task);
  }
  for (const auto& task : tasks) out.push_back(&task);
  return out;
}

ParseResult parse_playbook(std::string_view text) {
  ParseResult result;
  auto document = parse_yaml(text);
  if (!document.root) {
    result.findings = std::move(document.findings);
    return result;
  }

  PlaybookAst ast;
  ast.source = text;
  ast.root = std::move(*document.root);
  ast.shape_findings = std::move(document.findings);
  const Node& root = ast.root;

  if (root.is_sequence()) {
    const bool plays = std::any_of(root.items.begin(), root.items.end(), is_play_like);
    if (plays) {
      ast.kind = DocumentKind::play_list;
      for (const auto& item : root.items) {
        if (item.is_mapping()) {
          ast.plays.push_back(build_play(item, ast.shape_findings));
        } else {
          ast.shape_findings.push_back({Severity::error, std::string(codes::kNotAPlay),
                                        "play list item is not a mapping", item.span});
        }
      }
    } else if (root.items.empty() || std::any_of(root.items.begin(), root.items.end(), bears_module)) {
      ast.kind = DocumentKind::task_list;
      collect_tasks(root, ast.tasks, ast.shape_findings);
    }
  }
  if (ast.kind == DocumentKind::other_document) salvage_tasks(root, ast.tasks);

  result.ast = std::move(ast);
  return result;
}

std::vector<Finding> validate_structure(const PlaybookAst& ast) {
  std::vector<Finding> out = ast.shape_findings;
  switch (ast.kind) {
    case DocumentKind::other_document:
      out.push_back({Severity::error, std::string(codes::kNotAPlaybook),
                     "top-level " + std::string(describe(ast.root)) +
                         " is neither a list of plays nor a list of tasks",
                     ast.root.span});
      break;
    case DocumentKind::play_list:
      for (const auto& play : ast.plays) {
        if (!play.has_hosts && !play.imports_playbook) {
          out.push_back({Severity::error, std::string(codes::kMissingHosts),
                         "play " + (play.name ? "'" + *play.name + "' " : std::string()) +
                             "has no 'hosts'",
                         play.span});
        }
        if (!play.imports_playbook && !play.has_roles && play.tasks.empty()) {
          out.push_back({Severity::warning, std::string(codes::kEmptyTasks),
                         "play has no tasks", play.span});
        }
      }
      break;
    case DocumentKind::task_list:
      if (ast.tasks.empty()) {
        out.push_back({Severity::warning, std::string(codes::kEmptyTasks), "task list is empty",
                       ast.root.span});
      }
      break;
  }

  if (ast.kind != DocumentKind::other_document) {
    for (const auto* task : ast.all_tasks()) {
      if (task->module_ref.empty()) {
        out.push_back({Severity::error, std::string(codes::kNoModule),
                       "task " + (task->name ? "'" + *task->name + "' " : std::string()) +
                           "does not call a module",
                       task->span});
      } else if (task->module_keys.size() > 1) {
        const auto& extra = task->module_keys[1];
        out.push_back({Severity::error, std::string(codes::kMultipleModules),
                       "task calls both '" + task->module_keys[0].key + "' and '" + extra.key + "'",
                       extra.key_span});
      }
    }
  }
  sort_findings(out);
  return out;
}

std::vector<Finding> validate_modules(const PlaybookAst& ast, const SchemaCatalog& catalog) {
  std::vector<Finding> out;
  for (const auto* task : ast.all_tasks()) validate_task(*task, catalog, out);
  sort_findings(out);
  return out;
}

std::vector<Finding> lint(std::string_view text, const SchemaCatalog& catalog) {
  auto parsed = parse_playbook(text);
  if (!parsed.ok()) return parsed.findings;
  auto findings = validate_structure(*parsed.ast);
  auto modules = validate_modules(*parsed.ast, catalog);
  findings.insert(findings.end(), modules.begin(), modules.end());
  sort_findings(findings);
  return findings;
}

std::string serialize(const PlaybookAst& ast) { return to_yaml(ast.root); }

}  // namespace yamlsmith::validate
