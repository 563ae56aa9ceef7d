#include "yamlsmith/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace yamlsmith::cli {

namespace {

template <typename T>
T scalar_as(const YAML::Node& node, const std::string& where, const char* expected) {
  if (!node.IsScalar()) throw ConfigError(where + " must be " + expected);
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where + " must be " + expected);
  }
}

std::size_t count_value(const YAML::Node& node, const std::string& where) {
  const auto value = scalar_as<long long>(node, where, "a non-negative integer");
  if (value < 0) throw ConfigError(where + " must be a non-negative integer");
  return static_cast<std::size_t>(value);
}

prompt::ModelProfile parse_profile(const YAML::Node& node, const std::string& where) {
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping");
  static const std::set<std::string> known = {"name", "template_kind", "context_window",
                                              "default_reserve_output", "stop_markers"};
  for (const auto& entry : node) {
    const auto key = entry.first.as<std::string>();
    if (!known.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
  prompt::ModelProfile profile;
  if (!node["name"]) throw ConfigError(where + ": missing name");
  profile.name = scalar_as<std::string>(node["name"], where + " name", "a string");
  const std::string here = where + " '" + profile.name + "'";
  if (!node["template_kind"]) throw ConfigError(here + ": missing template_kind");
  try {
    profile.template_kind =
        prompt::parse_template_kind(scalar_as<std::string>(node["template_kind"], here, "a string"));
  } catch (const std::invalid_argument&) {
    throw ConfigError(here + ": template_kind must be alpaca, llama2_chat or raw");
  }
  if (!node["context_window"]) throw ConfigError(here + ": missing context_window");
  profile.context_window = count_value(node["context_window"], here + " context_window");
  if (node["default_reserve_output"]) {
    profile.default_reserve_output = count_value(node["default_reserve_output"], here + " default_reserve_output");
  }
  if (const auto stops = node["stop_markers"]; stops && !stops.IsNull()) {
    if (!stops.IsSequence()) throw ConfigError(here + ": stop_markers must be a list");
    for (const auto& stop : stops) profile.stop_markers.push_back(scalar_as<std::string>(stop, here, "strings"));
  }
  try {
    prompt::validate_profile(profile);
  } catch (const prompt::InvalidProfile& error) {
    throw ConfigError(here + ": " + error.what());
  }
  return profile;
}

score::Weights parse_weights(const YAML::Node& node, const std::string& where) {
  score::Weights w;
  if (node.IsSequence()) {
    if (node.size() != 4) throw ConfigError(where + " needs four numbers (parse, errors, warnings, echo)");
    w.parse = scalar_as<double>(node[0], where, "numbers");
    w.errors = scalar_as<double>(node[1], where, "numbers");
    w.warnings = scalar_as<double>(node[2], where, "numbers");
    w.echo = scalar_as<double>(node[3], where, "numbers");
    return w;
  }
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping or a list of four numbers");
  for (const auto& entry : node) {
    const auto key = entry.first.as<std::string>();
    const auto value = scalar_as<double>(entry.second, where + "." + key, "a number");
    if (key == "parse") {
      w.parse = value;
    } else if (key == "errors") {
      w.errors = value;
    } else if (key == "warnings") {
      w.warnings = value;
    } else if (key == "echo") {
      w.echo = value;
    } else {
      throw ConfigError(where + ": unknown weight '" + key + "'");
    }
  }
  return w;
}

}  // namespace

void validate_config(const Config& config) {
  try {
    score::validate_weights(config.composite_weights);
  } catch (const std::invalid_argument& error) {
    throw ConfigError(error.what());
  }
  if (!(config.echo_threshold > 0.0 && config.echo_threshold <= 1.0)) {
    throw ConfigError("echo_threshold must be in (0, 1]");
  }
  if (!(config.temperature >= 0.0) || !std::isfinite(config.temperature)) {
    throw ConfigError("temperature must be non-negative");
  }
  if (config.max_new_tokens == 0) throw ConfigError("max_new_tokens must be positive");
  for (const auto& profile : config.profiles) {
    try {
      prompt::validate_profile(profile);
    } catch (const prompt::InvalidProfile& error) {
      throw ConfigError("profile '" + profile.name + "': " + error.what());
    }
  }
}

Config parse_config(std::string_view text, std::string_view source, const std::filesystem::path& base_dir) {
  const std::string origin(source);
  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(text));
  } catch (const YAML::Exception& error) {
    throw ConfigError(origin + ": " + error.what());
  }
  Config config;
  if (!doc || doc.IsNull()) return config;
  if (!doc.IsMap()) throw ConfigError(origin + ": config must be a mapping");

  for (const auto& entry : doc) {
    const auto key = entry.first.as<std::string>();
    const auto& value = entry.second;
    const std::string where = origin + ": " + key;
    if (key == "endpoint") {
      config.endpoint = scalar_as<std::string>(value, where, "a URL");
    } else if (key == "profile") {
      config.profile = scalar_as<std::string>(value, where, "a profile name");
    } else if (key == "catalog_path") {
      std::filesystem::path path = scalar_as<std::string>(value, where, "a path");
      config.catalog_path = path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    } else if (key == "candidate_policy") {
      const auto policy = extract::parse_policy(scalar_as<std::string>(value, where, "a policy"));
      if (!policy) throw ConfigError(where + " must be first, largest or all_parseable");
      config.candidate_policy = *policy;
    } else if (key == "composite_weights") {
      config.composite_weights = parse_weights(value, where);
    } else if (key == "echo_threshold") {
      config.echo_threshold = scalar_as<double>(value, where, "a number");
    } else if (key == "temperature") {
      config.temperature = scalar_as<double>(value, where, "a number");
    } else if (key == "max_new_tokens") {
      config.max_new_tokens = count_value(value, where);
    } else if (key == "profiles") {
      if (!value.IsSequence()) throw ConfigError(where + " must be a list");
      for (std::size_t i = 0; i < value.size(); ++i) {
        config.profiles.push_back(parse_profile(value[i], where + "[" + std::to_string(i) + "]"));
      }
    } else {
      throw ConfigError(origin + ": unknown key '" + key + "'");
    }
  }
  try {
    validate_config(config);
  } catch (const ConfigError& error) {
    throw ConfigError(origin + ": " + error.what());
  }
  return config;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string(), path.parent_path());
}

std::optional<prompt::ModelProfile> find_profile(const Config& config, std::string_view name) {
  for (const auto& profile : config.profiles) {
    if (profile.name == name) return profile;
  }
  return prompt::find_builtin_profile(name);
}

}  // namespace yamlsmith::cli
