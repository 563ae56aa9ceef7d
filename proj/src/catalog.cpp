#include "yamlsmith/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace yamlsmith::validate {

namespace {

std::string entry_name(const YAML::Node& entry, std::size_t index) {
  if (entry.IsMap() && entry["fqcn"] && entry["fqcn"].IsScalar()) {
    return entry["fqcn"].Scalar();
  }
  return "#" + std::to_string(index + 1);
}

std::vector<std::string> string_list(const YAML::Node& node, const std::string& where) {
  std::vector<std::string> out;
  if (!node || node.IsNull()) return out;
  if (!node.IsSequence()) throw CatalogError(where + " must be a list");
  for (const auto& item : node) {
    if (!item.IsScalar()) throw CatalogError(where + " must contain only strings");
    out.push_back(item.Scalar());
  }
  return out;
}

ParamSchema parse_param(const YAML::Node& node, const std::string& where) {
  if (!node.IsMap()) throw CatalogError(where + ": parameter must be a mapping");
  ParamSchema param;
  if (!node["name"] || !node["name"].IsScalar() || node["name"].Scalar().empty()) {
    throw CatalogError(where + ": parameter without a name");
  }
  param.name = node["name"].Scalar();
  const std::string here = where + " param '" + param.name + "'";
  if (const auto required = node["required"]) {
    try {
      param.required = required.as<bool>();
    } catch (const YAML::Exception&) {
      throw CatalogError(here + ": required must be a boolean");
    }
  }
  if (const auto kind = node["value_kind"]) {
    const auto parsed = kind.IsScalar() ? parse_value_kind(kind.Scalar()) : std::nullopt;
    if (!parsed) throw CatalogError(here + ": unknown value_kind");
    param.value_kind = *parsed;
  }
  if (const auto choices = node["choices"]; choices && !choices.IsNull()) {
    param.choices = string_list(choices, here + " choices");
  }
  param.aliases = string_list(node["aliases"], here + " aliases");
  if (const auto fallback = node["default"]; fallback && !fallback.IsNull()) {
    if (!fallback.IsScalar()) throw CatalogError(here + ": default must be a scalar");
    param.default_value = fallback.Scalar();
  }
  return param;
}

}  // namespace

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::string:
      return "string";
    case ValueKind::boolean:
      return "boolean";
    case ValueKind::integer:
      return "integer";
    case ValueKind::list:
      return "list";
    case ValueKind::path:
      return "path";
  }
  return "string";
}

std::optional<ValueKind> parse_value_kind(std::string_view name) {
  for (auto kind : {ValueKind::string, ValueKind::boolean, ValueKind::integer, ValueKind::list,
                    ValueKind::path}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

const ParamSchema* ModuleSchema::find_param(std::string_view name) const {
  for (const auto& param : params) {
    if (param.name == name) return &param;
  }
  for (const auto& param : params) {
    if (std::find(param.aliases.begin(), param.aliases.end(), name) != param.aliases.end()) {
      return &param;
    }
  }
  return nullptr;
}

void validate_schema(const ModuleSchema& schema) {
  if (schema.fqcn.empty()) throw CatalogError("module entry without fqcn");
  std::set<std::string, std::less<>> names;
  for (const auto& param : schema.params) {
    const std::string where = "module '" + schema.fqcn + "' param '" + param.name + "'";
    if (param.required && param.default_value) {
      throw CatalogError(where + ": required parameters cannot have a default");
    }
    if (param.choices && param.choices->empty()) {
      throw CatalogError(where + ": choices must not be empty when present");
    }
    if (!names.insert(param.name).second) throw CatalogError(where + ": declared twice");
    for (const auto& alias : param.aliases) {
      if (!names.insert(alias).second) throw CatalogError(where + ": alias '" + alias + "' clashes");
    }
  }
}

void SchemaCatalog::add(ModuleSchema schema) {
  validate_schema(schema);
  auto key = schema.fqcn;
  modules_.insert_or_assign(std::move(key), std::move(schema));
}

void SchemaCatalog::merge(const SchemaCatalog& other) {
  for (const auto& [fqcn, schema] : other.modules_) modules_.insert_or_assign(fqcn, schema);
  if (!other.version_.empty()) {
    version_ = version_.empty() ? other.version_ : version_ + "+" + other.version_;
  }
}

const ModuleSchema* SchemaCatalog::find(std::string_view fqcn) const {
  const auto it = modules_.find(fqcn);
  return it == modules_.end() ? nullptr : &it->second;
}

Resolution SchemaCatalog::resolve(std::string_view module_ref) const {
  Resolution out;
  if (const auto* exact = find(module_ref)) {
    out.schema = exact;
    return out;
  }
  std::vector<const ModuleSchema*> hits;
  for (const auto& [fqcn, schema] : modules_) {
    if (std::find(schema.short_names.begin(), schema.short_names.end(), module_ref) !=
        schema.short_names.end()) {
      hits.push_back(&schema);
    }
  }
  if (hits.size() == 1) {
    out.schema = hits.front();
  } else {
    for (const auto* hit : hits) out.candidates.push_back(hit->fqcn);
  }
  return out;
}

SchemaCatalog parse_catalog(std::string_view text, std::string_view source_name) {
  const std::string source(source_name);
  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(text));
  } catch (const YAML::Exception& error) {
    throw CatalogError(source + ": " + error.what());
  }
  SchemaCatalog catalog;
  if (!doc || doc.IsNull()) return catalog;
  if (!doc.IsMap()) throw CatalogError(source + ": catalog must be a mapping with 'modules:'");
  if (const auto version = doc["version"]; version && version.IsScalar()) {
    catalog.set_version(version.Scalar());
  }
  const auto modules = doc["modules"];
  if (!modules || modules.IsNull()) return catalog;
  if (!modules.IsSequence()) throw CatalogError(source + ": 'modules' must be a list");

  for (std::size_t i = 0; i < modules.size(); ++i) {
    const auto entry = modules[i];
    const std::string where = source + ": entry " + entry_name(entry, i);
    if (!entry.IsMap()) throw CatalogError(where + ": must be a mapping");
    ModuleSchema schema;
    if (!entry["fqcn"] || !entry["fqcn"].IsScalar() || entry["fqcn"].Scalar().empty()) {
      throw CatalogError(where + ": missing fqcn");
    }
    schema.fqcn = entry["fqcn"].Scalar();
    schema.short_names = string_list(entry["short_names"], where + " short_names");
    if (const auto params = entry["params"]; params && !params.IsNull()) {
      if (!params.IsSequence()) throw CatalogError(where + ": params must be a list");
      for (const auto& param : params) schema.params.push_back(parse_param(param, where));
    }
    try {
      catalog.add(std::move(schema));
    } catch (const CatalogError& error) {
      throw CatalogError(where + ": " + error.what());
    }
  }
  return catalog;
}

SchemaCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CatalogError(path.string() + ": cannot open catalog");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_catalog(buffer.str(), path.string());
}

}  // namespace yamlsmith::validate
