#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace yamlsmith::validate {

enum class ValueKind { string, boolean, integer, list, path };

std::string_view to_string(ValueKind kind);
std::optional<ValueKind> parse_value_kind(std::string_view name);

struct ParamSchema {
  std::string name;
  bool required = false;
  ValueKind value_kind = ValueKind::string;
  std::optional<std::vector<std::string>> choices;
  std::vector<std::string> aliases;
  std::optional<std::string> default_value;
};

/// Parameter grammar of one Ansible module.
///
/// `short_names` lists every other name the module resolves from: the bare
/// module name ("service") and redirected names such as
/// "ansible.builtin.mount" for ansible.posix.mount.
struct ModuleSchema {
  std::string fqcn;
  std::vector<std::string> short_names;
  std::vector<ParamSchema> params;

  /// Looks up by canonical name or alias.
  const ParamSchema* find_param(std::string_view name) const;
};

class CatalogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Resolution {
  const ModuleSchema* schema = nullptr;
  std::vector<std::string> candidates;  // set when a short name is ambiguous
};

/// Immutable once loaded; lookups are by fqcn first, then by short name.
class SchemaCatalog {
 public:
  SchemaCatalog() = default;

  /// Adds or replaces (same fqcn) a module. Throws CatalogError when the
  /// schema breaks an invariant.
  void add(ModuleSchema schema);

  /// Entries of `other` replace same-fqcn entries here.
  void merge(const SchemaCatalog& other);

  Resolution resolve(std::string_view module_ref) const;
  const ModuleSchema* find(std::string_view fqcn) const;

  std::size_t size() const noexcept { return modules_.size(); }
  bool empty() const noexcept { return modules_.empty(); }
  const std::string& version() const noexcept { return version_; }
  void set_version(std::string version) { version_ = std::move(version); }
  const std::map<std::string, ModuleSchema, std::less<>>& modules() const noexcept {
    return modules_;
  }

 private:
  std::map<std::string, ModuleSchema, std::less<>> modules_;
  std::string version_;
};

void validate_schema(const ModuleSchema& schema);

/// Catalog document: optional `version:` string and a `modules:` list whose
/// records use the ModuleSchema field names.
SchemaCatalog parse_catalog(std::string_view text, std::string_view source_name = "<catalog>");
SchemaCatalog load_catalog(const std::filesystem::path& path);

}  // namespace yamlsmith::validate
